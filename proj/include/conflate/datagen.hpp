#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "conflate/rng.hpp"

namespace conflate {

inline constexpr std::size_t kFoldCount = 10;
inline constexpr std::size_t kMinNameLength = 6;
inline constexpr std::size_t kMaxNameLength = 26;

struct ConflationPair {
  std::size_t entity_id = 0;
  std::string clean;      // field A
  std::string corrupted;  // field B
  std::size_t fold = 0;
};

struct CorruptionConfig {
  double substitution_rate = 0.15;
  double reversal_prob = 0.5;
  double prefix_prob = 0.3;
  std::vector<std::string> prefix_set = {"Dr.", "Mr.", "Ms.", "Prof."};
  std::uint64_t seed = 0;

  void validate() const;
};

class DatasetFormatError : public std::runtime_error {
 public:
  DatasetFormatError(const std::string& what, std::size_t line)
      : std::runtime_error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// "given family", lowercase, built from a syllable model.
std::string generate_name(Rng& rng);

std::string corrupt(const std::string& clean, const CorruptionConfig& config, Rng& rng);

struct Dataset {
  std::vector<ConflationPair> pairs;
};

struct FoldSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

// n_pairs unique clean names, one corruption each, folds assigned by a seeded shuffle.
Dataset build_dataset(std::size_t n_pairs, const CorruptionConfig& config, Rng& rng);
Dataset build_dataset(std::size_t n_pairs, const CorruptionConfig& config);

// Test = fold k, validation = fold (k+1) mod 10, train = the rest.
FoldSplit split_for_fold(const Dataset& data, std::size_t fold);

struct LengthStats {
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t min = 0;
  std::size_t max = 0;
};

LengthStats length_stats(const std::vector<std::string>& strings);
LengthStats corpus_length_stats(const Dataset& data);  // both fields pooled

void write_dataset(const Dataset& data, const std::filesystem::path& path);
Dataset read_dataset(const std::filesystem::path& path);

}  // namespace conflate

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "conflate/datagen.hpp"
#include "conflate/trainer.hpp"

namespace conflate {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Everything a command needs, as one flat key/value namespace. Resolution
// order, lowest to highest: built-in defaults, CONFLATE_SEED, config file,
// command-line flags.
struct RunConfig {
  std::string model = "cnn";
  std::string data;
  std::string out;
  std::string report;
  std::string csv;
  std::string model_path;
  std::string direction = "both";
  std::string split = "test";
  std::string query;
  std::string candidates;
  std::size_t top_k = 10;
  std::size_t pairs = 10000;
  std::size_t fold = 0;
  bool cv = false;
  std::size_t jobs = 1;
  std::uint64_t seed = 0;
  double threshold = 0.62;
  bool lowercase_fold = false;
  TrainConfig train;
  CorruptionConfig corruption;

  // Keys accepted by set(); flags use the same names with '-' for '_'.
  static const std::vector<std::string>& keys();

  void set(std::string_view key, std::string_view value);
  void load_file(const std::filesystem::path& path);
  void apply_environment();

  // Copies the shared seed into the training and corruption configs.
  TrainConfig resolved_train() const;
  CorruptionConfig resolved_corruption() const;

  nlohmann::json to_json() const;
};

}  // namespace conflate

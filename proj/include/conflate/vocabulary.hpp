#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace conflate {

class EncodingError : public std::invalid_argument {
 public:
  EncodingError(const std::string& what, char symbol, std::size_t position)
      : std::invalid_argument(what), symbol_(symbol), position_(position) {}
  char symbol() const { return symbol_; }
  std::size_t position() const { return position_; }

 private:
  char symbol_;
  std::size_t position_;
};

struct EncodedString {
  std::vector<std::uint8_t> indices;
  std::string original;

  std::size_t length() const { return indices.size(); }
};

// The 32-symbol character set: D M P S a..z '.' ' ' at indices 0..31.
class Vocabulary {
 public:
  static constexpr std::size_t kSize = 32;
  static constexpr std::uint8_t kSpace = 31;

  static const Vocabulary& standard();

  std::string_view symbols() const { return symbols_; }
  bool contains(char c) const { return index_[static_cast<unsigned char>(c)] >= 0; }
  std::uint8_t index_of(char c) const;
  char symbol_at(std::size_t i) const { return symbols_.at(i); }

  // Throws EncodingError naming the first offending character and its position.
  EncodedString encode(std::string_view text) const;
  std::string decode(const std::vector<std::uint8_t>& indices) const;

  // Lowercases everything except the capital that opens an honorific token
  // such as "Dr." or "Prof.".
  std::string fold_case(std::string_view text) const;

 private:
  Vocabulary();

  std::string symbols_;
  std::array<int, 256> index_{};
};

}  // namespace conflate

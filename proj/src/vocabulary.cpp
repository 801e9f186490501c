#include "conflate/vocabulary.hpp"

#include <cctype>

namespace conflate {

Vocabulary::Vocabulary() : symbols_("DMPSabcdefghijklmnopqrstuvwxyz. ") {
  index_.fill(-1);
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    index_[static_cast<unsigned char>(symbols_[i])] = static_cast<int>(i);
  }
}

const Vocabulary& Vocabulary::standard() {
  static const Vocabulary vocab;
  return vocab;
}

std::uint8_t Vocabulary::index_of(char c) const {
  const int i = index_[static_cast<unsigned char>(c)];
  if (i < 0) throw EncodingError(std::string("character '") + c + "' is not in the vocabulary", c, 0);
  return static_cast<std::uint8_t>(i);
}

EncodedString Vocabulary::encode(std::string_view text) const {
  if (text.empty()) throw EncodingError("cannot encode an empty string", '\0', 0);
  EncodedString out;
  out.original = std::string(text);
  out.indices.reserve(text.size());
  for (std::size_t pos = 0; pos < text.size(); ++pos) {
    const int i = index_[static_cast<unsigned char>(text[pos])];
    if (i < 0) {
      throw EncodingError("unencodable character '" + std::string(1, text[pos]) +
                              "' at position " + std::to_string(pos) + " in \"" +
                              std::string(text) + "\"",
                          text[pos], pos);
    }
    out.indices.push_back(static_cast<std::uint8_t>(i));
  }
  return out;
}

std::string Vocabulary::decode(const std::vector<std::uint8_t>& indices) const {
  std::string out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(symbols_.at(i));
  return out;
}

std::string Vocabulary::fold_case(std::string_view text) const {
  std::string out(text);
  std::size_t start = 0;
  while (start < out.size()) {
    std::size_t end = out.find(' ', start);
    if (end == std::string::npos) end = out.size();
    // A capital opening a token that ends in '.' is an honorific ("Dr.") and is kept.
    const bool honorific = end > start + 1 && out[end - 1] == '.' && contains(out[start]);
    for (std::size_t i = start; i < end; ++i) {
      if (honorific && i == start) continue;
      out[i] = static_cast<char>(std::tolower(static_cast<unsigned char>(out[i])));
    }
    start = end + 1;
  }
  return out;
}

}  // namespace conflate

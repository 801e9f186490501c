#include "conflate/datagen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "conflate/vocabulary.hpp"

namespace conflate {
namespace {

const std::vector<std::string> kOnsets = {
    "",   "",   "b",  "c",  "d",  "f",  "g",  "h",  "j",  "k",  "l",  "m",  "n",  "p",  "r", "s",
    "t",  "v",  "w",  "y",  "z",  "br", "ch", "cr", "dr", "fr", "gr", "kl", "pr", "sh", "st", "th",
    "tr", "qu", "x"};
const std::vector<std::string> kNuclei = {"a", "e", "i", "o", "u", "a", "e", "i", "o",
                                          "y", "ai", "ea", "ie", "ou", "ey"};
const std::vector<std::string> kCodas = {"", "", "", "", "", "n", "r", "l", "s",
                                         "t", "m", "ck", "nd", "rt", "ll", "ss", "ng", "z"};

std::string syllable(Rng& rng) {
  auto pick = [&rng](const std::vector<std::string>& from) -> const std::string& {
    std::uniform_int_distribution<std::size_t> d(0, from.size() - 1);
    return from[d(rng)];
  };
  std::string s = pick(kOnsets);
  s += pick(kNuclei);
  s += pick(kCodas);
  return s;
}

std::string token(Rng& rng, std::discrete_distribution<int>& syllables) {
  std::string t;
  const int count = syllables(rng) + 1;
  for (int i = 0; i < count; ++i) t += syllable(rng);
  return t;
}

std::size_t parse_count(const std::string& field, const char* what, std::size_t line) {
  std::size_t value = 0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw DatasetFormatError("line " + std::to_string(line) + ": invalid " + what + " '" + field + "'", line);
  }
  return value;
}

}  // namespace

void CorruptionConfig::validate() const {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument(std::string("CorruptionConfig: ") + name + " must lie in [0, 1]");
    }
  };
  prob(reversal_prob, "reversal_prob");
  prob(prefix_prob, "prefix_prob");
  if (!(substitution_rate >= 0.0 && substitution_rate <= 0.5)) {
    throw std::invalid_argument("CorruptionConfig: substitution_rate must lie in [0, 0.5]");
  }
  if (prefix_prob > 0.0 && prefix_set.empty()) {
    throw std::invalid_argument("CorruptionConfig: prefix_prob > 0 needs a non-empty prefix_set");
  }
  const auto& vocab = Vocabulary::standard();
  for (const auto& p : prefix_set) {
    if (p.empty() || !std::all_of(p.begin(), p.end(), [&](char c) { return vocab.contains(c) && c != ' '; })) {
      throw std::invalid_argument("CorruptionConfig: prefix '" + p + "' is not a single vocabulary token");
    }
  }
}

std::string generate_name(Rng& rng) {
  // Syllables per token are 1 + the drawn index.
  std::discrete_distribution<int> given_syllables({0.3, 0.7});
  std::discrete_distribution<int> family_syllables({0.2, 0.7, 0.1});
  for (;;) {
    std::string given = token(rng, given_syllables);
    std::string family = token(rng, family_syllables);
    if (given.size() < 2 || family.size() < 2) continue;
    std::string name = given + " " + family;
    if (name.size() >= kMinNameLength && name.size() <= kMaxNameLength) return name;
  }
}

std::string corrupt(const std::string& clean, const CorruptionConfig& config, Rng& rng) {
  const auto space = clean.find(' ');
  if (space == std::string::npos || space == 0 || space + 1 == clean.size() ||
      clean.find(' ', space + 1) != std::string::npos) {
    throw std::invalid_argument("corrupt: expected a two-token name, got \"" + clean + "\"");
  }
  std::bernoulli_distribution substitute(config.substitution_rate);
  std::uniform_int_distribution<int> other_letter(0, 24);
  std::string out = clean;
  for (char& c : out) {
    if (c == ' ') continue;
    if (substitute(rng)) {
      // One of the 25 letters that differ from c.
      int k = other_letter(rng);
      const int orig = (c >= 'a' && c <= 'z') ? c - 'a' : -1;
      if (orig >= 0 && k >= orig) ++k;
      c = static_cast<char>('a' + k);
    }
  }
  std::bernoulli_distribution reverse(config.reversal_prob);
  if (reverse(rng)) out = out.substr(space + 1) + " " + out.substr(0, space);

  std::bernoulli_distribution prefix(config.prefix_prob);
  if (prefix(rng)) {
    std::uniform_int_distribution<std::size_t> which(0, config.prefix_set.size() - 1);
    const std::string& p = config.prefix_set[which(rng)];
    if (p.size() + 1 + out.size() <= kMaxNameLength) out = p + " " + out;
  }
  return out;
}

Dataset build_dataset(std::size_t n_pairs, const CorruptionConfig& config, Rng& rng) {
  if (n_pairs < kFoldCount) throw std::invalid_argument("build_dataset: need at least one pair per fold (10)");
  config.validate();
  Dataset data;
  data.pairs.reserve(n_pairs);
  std::unordered_set<std::string> seen;
  while (data.pairs.size() < n_pairs) {
    std::string name = generate_name(rng);
    if (!seen.insert(name).second) continue;
    ConflationPair p;
    p.entity_id = data.pairs.size();
    p.corrupted = corrupt(name, config, rng);
    p.clean = std::move(name);
    data.pairs.push_back(std::move(p));
  }
  std::vector<std::size_t> order(n_pairs);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t pos = 0; pos < n_pairs; ++pos) data.pairs[order[pos]].fold = pos % kFoldCount;
  return data;
}

Dataset build_dataset(std::size_t n_pairs, const CorruptionConfig& config) {
  Rng rng(config.seed);
  return build_dataset(n_pairs, config, rng);
}

FoldSplit split_for_fold(const Dataset& data, std::size_t fold) {
  if (fold >= kFoldCount) throw std::invalid_argument("split_for_fold: fold must be < 10");
  const std::size_t val_fold = (fold + 1) % kFoldCount;
  FoldSplit split;
  for (std::size_t i = 0; i < data.pairs.size(); ++i) {
    const std::size_t f = data.pairs[i].fold;
    if (f == fold) {
      split.test.push_back(i);
    } else if (f == val_fold) {
      split.validation.push_back(i);
    } else {
      split.train.push_back(i);
    }
  }
  return split;
}

LengthStats length_stats(const std::vector<std::string>& strings) {
  LengthStats s;
  s.count = strings.size();
  if (strings.empty()) return s;
  s.min = strings.front().size();
  double sum = 0.0;
  for (const auto& str : strings) {
    sum += static_cast<double>(str.size());
    s.min = std::min(s.min, str.size());
    s.max = std::max(s.max, str.size());
  }
  s.mean = sum / static_cast<double>(s.count);
  double sq = 0.0;
  for (const auto& str : strings) {
    const double d = static_cast<double>(str.size()) - s.mean;
    sq += d * d;
  }
  s.stddev = std::sqrt(sq / static_cast<double>(s.count));
  return s;
}

LengthStats corpus_length_stats(const Dataset& data) {
  std::vector<std::string> all;
  all.reserve(2 * data.pairs.size());
  for (const auto& p : data.pairs) {
    all.push_back(p.clean);
    all.push_back(p.corrupted);
  }
  return length_stats(all);
}

void write_dataset(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (const auto& p : data.pairs) {
    out << p.entity_id << '\t' << p.clean << '\t' << p.corrupted << '\t' << p.fold << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dataset " + path.string());
  Dataset data;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 4) {
      throw DatasetFormatError("line " + std::to_string(line_no) + ": expected 4 tab-separated fields, found " +
                                   std::to_string(fields.size()),
                               line_no);
    }
    ConflationPair p;
    p.entity_id = parse_count(fields[0], "entity id", line_no);
    p.clean = fields[1];
    p.corrupted = fields[2];
    p.fold = parse_count(fields[3], "fold", line_no);
    if (p.clean.empty() || p.corrupted.empty()) {
      throw DatasetFormatError("line " + std::to_string(line_no) + ": empty string field", line_no);
    }
    if (p.fold >= kFoldCount) {
      throw DatasetFormatError("line " + std::to_string(line_no) + ": fold " + fields[3] + " is not in [0, 10)",
                               line_no);
    }
    data.pairs.push_back(std::move(p));
  }
  if (data.pairs.empty()) throw DatasetFormatError("dataset " + path.string() + " is empty", 0);
  return data;
}

}  // namespace conflate

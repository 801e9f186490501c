#include "conflate/run_config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>

namespace conflate {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename U>
U parse_unsigned(std::string_view key, std::string_view v) {
  U out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("invalid value '" + std::string(v) + "' for " + std::string(key) +
                      " (expected a non-negative integer)");
  }
  return out;
}

double parse_real(std::string_view key, std::string_view v) {
  const std::string s(v);
  char* end = nullptr;
  const double out = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw ConfigError("invalid value '" + s + "' for " + std::string(key) + " (expected a number)");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("invalid value '" + std::string(v) + "' for " + std::string(key) + " (expected true/false)");
}

std::vector<std::string> split_list(std::string_view v) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= v.size()) {
    const auto comma = v.find(',', start);
    auto item = trim(v.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k = {
      "model",        "data",         "out",           "report",       "csv",
      "model_path",   "direction",    "split",         "query",        "candidates",
      "top_k",
      "pairs",        "fold",         "cv",            "jobs",         "seed",
      "threshold",    "lowercase_fold", "batch_size",  "max_epochs",   "patience",
      "gamma",        "negatives",    "learning_rate", "clip_norm",    "init_range",
      "forget_bias",  "embedding_dim", "lstm_hidden",  "feature_maps", "boc_hidden",
      "substitution_rate", "reversal_prob", "prefix_prob", "prefixes"};
  return k;
}

void RunConfig::set(std::string_view key, std::string_view value) {
  const std::string v = trim(value);
  if (key == "model") {
    parse_model_kind(v);
    model = v;
  } else if (key == "data") {
    data = v;
  } else if (key == "out") {
    out = v;
  } else if (key == "report") {
    report = v;
  } else if (key == "csv") {
    csv = v;
  } else if (key == "model_path") {
    model_path = v;
  } else if (key == "direction") {
    if (v != "both") parse_direction(v);
    direction = v;
  } else if (key == "split") {
    if (v != "test" && v != "validation" && v != "train" && v != "all") {
      throw ConfigError("invalid split '" + v + "' (expected test, validation, train or all)");
    }
    split = v;
  } else if (key == "query") {
    query = std::string(value);
  } else if (key == "candidates") {
    candidates = v;
  } else if (key == "top_k") {
    top_k = parse_unsigned<std::size_t>(key, v);
    if (top_k < 1) throw ConfigError("top_k must be >= 1");
  } else if (key == "pairs") {
    pairs = parse_unsigned<std::size_t>(key, v);
  } else if (key == "fold") {
    fold = parse_unsigned<std::size_t>(key, v);
    if (fold >= kFoldCount) throw ConfigError("fold must be in [0, 10)");
  } else if (key == "cv") {
    cv = parse_bool(key, v);
  } else if (key == "jobs") {
    jobs = parse_unsigned<std::size_t>(key, v);
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
  } else if (key == "seed") {
    seed = parse_unsigned<std::uint64_t>(key, v);
  } else if (key == "threshold") {
    threshold = parse_real(key, v);
  } else if (key == "lowercase_fold") {
    lowercase_fold = parse_bool(key, v);
  } else if (key == "batch_size") {
    train.batch_size = parse_unsigned<std::size_t>(key, v);
  } else if (key == "max_epochs") {
    train.max_epochs = parse_unsigned<std::size_t>(key, v);
  } else if (key == "patience") {
    train.patience = parse_unsigned<std::size_t>(key, v);
  } else if (key == "gamma") {
    train.gamma = parse_real(key, v);
  } else if (key == "negatives") {
    train.negatives = parse_unsigned<std::size_t>(key, v);
  } else if (key == "learning_rate") {
    train.learning_rate = parse_real(key, v);
  } else if (key == "clip_norm") {
    train.clip_norm = parse_real(key, v);
  } else if (key == "init_range") {
    train.init_range = parse_real(key, v);
  } else if (key == "forget_bias") {
    train.forget_bias = parse_real(key, v);
  } else if (key == "embedding_dim") {
    train.dims.embedding = parse_unsigned<std::size_t>(key, v);
  } else if (key == "lstm_hidden") {
    train.dims.lstm_hidden = parse_unsigned<std::size_t>(key, v);
  } else if (key == "feature_maps") {
    train.dims.feature_maps = parse_unsigned<std::size_t>(key, v);
  } else if (key == "boc_hidden") {
    train.dims.boc_hidden = parse_unsigned<std::size_t>(key, v);
  } else if (key == "substitution_rate") {
    corruption.substitution_rate = parse_real(key, v);
  } else if (key == "reversal_prob") {
    corruption.reversal_prob = parse_real(key, v);
  } else if (key == "prefix_prob") {
    corruption.prefix_prob = parse_real(key, v);
  } else if (key == "prefixes") {
    corruption.prefix_set = split_list(v);
  } else {
    throw ConfigError("unknown configuration key '" + std::string(key) + "'");
  }
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    try {
      set(key, std::string_view(body).substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void RunConfig::apply_environment() {
  if (const char* env = std::getenv("CONFLATE_SEED"); env != nullptr && *env != '\0') {
    try {
      set("seed", env);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("CONFLATE_SEED: ") + e.what());
    }
  }
}

TrainConfig RunConfig::resolved_train() const {
  TrainConfig t = train;
  t.seed = seed;
  return t;
}

CorruptionConfig RunConfig::resolved_corruption() const {
  CorruptionConfig c = corruption;
  c.seed = seed;
  return c;
}

nlohmann::json RunConfig::to_json() const {
  return {{"model", model},
          {"data", data},
          {"out", out},
          {"report", report},
          {"csv", csv},
          {"model_path", model_path},
          {"direction", direction},
          {"split", split},
          {"query", query},
          {"candidates", candidates},
          {"top_k", top_k},
          {"pairs", pairs},
          {"fold", fold},
          {"cv", cv},
          {"jobs", jobs},
          {"seed", seed},
          {"threshold", threshold},
          {"lowercase_fold", lowercase_fold},
          {"batch_size", train.batch_size},
          {"max_epochs", train.max_epochs},
          {"patience", train.patience},
          {"gamma", train.gamma},
          {"negatives", train.negatives},
          {"learning_rate", train.learning_rate},
          {"clip_norm", train.clip_norm},
          {"init_range", train.init_range},
          {"forget_bias", train.forget_bias},
          {"embedding_dim", train.dims.embedding},
          {"lstm_hidden", train.dims.lstm_hidden},
          {"feature_maps", train.dims.feature_maps},
          {"boc_hidden", train.dims.boc_hidden},
          {"substitution_rate", corruption.substitution_rate},
          {"reversal_prob", corruption.reversal_prob},
          {"prefix_prob", corruption.prefix_prob},
          {"prefixes", corruption.prefix_set}};
}

}  // namespace conflate

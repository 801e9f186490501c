#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <utility>

#include <CLI11.hpp>

#include "conflate/datagen.hpp"
#include "conflate/model_io.hpp"
#include "conflate/ranking.hpp"
#include "conflate/report.hpp"
#include "conflate/run_config.hpp"
#include "conflate/trainer.hpp"
#include "conflate/vocabulary.hpp"

namespace conflate::cli {
namespace {

namespace fs = std::filesystem;

// Failures the user can fix by changing the invocation (exit code 2).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Overrides = std::vector<std::pair<std::string, std::string>>;

struct Invocation {
  std::string config_path;
  Overrides overrides;
};

std::string flag_name(const std::string& key) {
  std::string f = "--" + key;
  std::replace(f.begin(), f.end(), '_', '-');
  return f;
}

void add_key(CLI::App* app, Invocation& inv, const std::string& key, const std::string& help) {
  app->add_option_function<std::string>(
      flag_name(key), [&inv, key](const std::string& v) { inv.overrides.emplace_back(key, v); }, help)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
}

void add_switch(CLI::App* app, Invocation& inv, const std::string& key, const std::string& help) {
  app->add_flag_callback(flag_name(key), [&inv, key] { inv.overrides.emplace_back(key, "true"); }, help);
}

void add_common(CLI::App* app, Invocation& inv) {
  app->add_option("--config", inv.config_path, "key = value configuration file (flags override it)");
  add_key(app, inv, "seed", "master seed (falls back to CONFLATE_SEED, then 0)");
}

void add_corruption(CLI::App* app, Invocation& inv) {
  add_key(app, inv, "substitution_rate", "per-character substitution probability");
  add_key(app, inv, "reversal_prob", "token-order reversal probability");
  add_key(app, inv, "prefix_prob", "honorific prefix probability");
  add_key(app, inv, "prefixes", "comma-separated honorific prefixes");
}

void add_training(CLI::App* app, Invocation& inv) {
  for (const char* key : {"batch_size", "max_epochs", "patience", "gamma", "negatives", "learning_rate",
                          "clip_norm", "init_range", "forget_bias", "embedding_dim", "lstm_hidden",
                          "feature_maps", "boc_hidden"}) {
    add_key(app, inv, key, "training hyperparameter");
  }
}

RunConfig resolve(const Invocation& inv) {
  RunConfig cfg;
  cfg.apply_environment();
  if (!inv.config_path.empty()) {
    if (!fs::exists(inv.config_path)) throw UsageError("config file not found: " + inv.config_path);
    cfg.load_file(inv.config_path);
  }
  for (const auto& [key, value] : inv.overrides) {
    try {
      cfg.set(key, value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(flag_name(key) + ": " + e.what());
    }
  }
  return cfg;
}

void require_file(const std::string& path, const std::string& what, const std::string& flag) {
  if (path.empty()) throw UsageError("no " + what + " given (" + flag + ")");
  if (!fs::exists(path)) throw UsageError(what + " not found: " + path);
}

Dataset load_dataset(const RunConfig& cfg) {
  require_file(cfg.data, "dataset", "--data");
  Dataset data = read_dataset(cfg.data);
  if (cfg.lowercase_fold) {
    const Vocabulary& vocab = Vocabulary::standard();
    for (auto& p : data.pairs) {
      p.clean = vocab.fold_case(p.clean);
      p.corrupted = vocab.fold_case(p.corrupted);
    }
  }
  return data;
}

EncodedDataset encode_checked(const Dataset& data) {
  const Vocabulary& vocab = Vocabulary::standard();
  EncodedDataset enc;
  for (std::size_t i = 0; i < data.pairs.size(); ++i) {
    for (const std::string* s : {&data.pairs[i].clean, &data.pairs[i].corrupted}) {
      try {
        (s == &data.pairs[i].clean ? enc.clean : enc.corrupted).push_back(vocab.encode(*s));
      } catch (const EncodingError& e) {
        throw EncodingError("vocabulary mismatch: dataset line " + std::to_string(i + 1) + ": " + e.what(),
                            e.symbol(), e.position());
      }
    }
  }
  return enc;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << text;
  if (!f) throw std::runtime_error("failed writing " + path);
}

nlohmann::json stats_json(const LengthStats& s) {
  return {{"count", s.count}, {"mean", s.mean}, {"std", s.stddev}, {"min", s.min}, {"max", s.max}};
}

std::string fixed(double v, int decimals) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

int cmd_generate(const RunConfig& cfg, std::ostream& out) {
  const std::string path = cfg.out.empty() ? "pairs.tsv" : cfg.out;
  const Dataset data = build_dataset(cfg.pairs, cfg.resolved_corruption());
  write_dataset(data, path);

  std::vector<std::string> clean;
  std::vector<std::string> corrupted;
  for (const auto& p : data.pairs) {
    clean.push_back(p.clean);
    corrupted.push_back(p.corrupted);
  }
  const LengthStats all = corpus_length_stats(data);
  nlohmann::json meta;
  meta["pairs"] = data.pairs.size();
  meta["run_config"] = cfg.to_json();
  meta["length_statistics"] = {{"all", stats_json(all)},
                               {"clean", stats_json(length_stats(clean))},
                               {"corrupted", stats_json(length_stats(corrupted))}};
  write_text(path + ".meta.json", meta.dump(2) + "\n");

  out << "generated " << data.pairs.size() << " pairs -> " << path << "\n"
      << "strings: " << all.count << "  mean length: " << fixed(all.mean, 2)
      << "  std: " << fixed(all.stddev, 2) << "  min: " << all.min << "  max: " << all.max << "\n";
  return kExitOk;
}

void log_epoch(std::ostream& err, std::size_t fold, const EpochRecord& r) {
  err << "fold " << fold << "  epoch " << r.epoch << "  loss " << fixed(r.mean_loss, 4) << "  val R@1 "
      << fixed(r.validation_recall1, 2) << "\n";
  err.flush();
}

void emit_report(const RankingReport& report, const Dataset& data, const RunConfig& cfg,
                 const std::string& json_path, std::ostream& out) {
  out << format_report_table(std::span<const RankingReport>(&report, 1));
  for (const auto& dr : report.directions) {
    out << "\n" << to_string(dr.direction) << " top scores\n" << format_score_table(dr.threshold);
  }
  write_text(json_path, report_to_json(report, cfg.to_json()).dump(2) + "\n");
  out << "\nreport written to " << json_path << "\n";
  if (!cfg.csv.empty()) {
    std::ofstream csv(cfg.csv, std::ios::binary);
    if (!csv) throw std::runtime_error("cannot open " + cfg.csv + " for writing");
    write_rank_csv(csv, report, data);
    out << "per-query ranks written to " << cfg.csv << "\n";
  }
}

int cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const Dataset data = load_dataset(cfg);
  const ModelKind kind = parse_model_kind(cfg.model);
  const TrainConfig train = cfg.resolved_train();

  if (cfg.cv) {
    CrossValidateOptions options;
    options.jobs = cfg.jobs;
    options.on_epoch = [&err](std::size_t fold, const EpochRecord& r) { log_epoch(err, fold, r); };
    const RankingReport report = cross_validate(kind, data, train, options);
    const std::string json_path = cfg.report.empty() ? cfg.model + "_cv_report.json" : cfg.report;
    emit_report(report, data, cfg, json_path, out);
    return kExitOk;
  }

  const EncodedDataset enc = encode_checked(data);
  const FoldSplit split = split_for_fold(data, cfg.fold);
  TrainConfig fold_config = train;
  fold_config.seed = fold_seed(train.seed, cfg.fold);
  TrainHooks hooks;
  hooks.on_epoch = [&err, &cfg](const EpochRecord& r) { log_epoch(err, cfg.fold, r); };
  TrainResult trained = train_fold(kind, enc, split.train, split.validation, fold_config, hooks);

  const std::string model_path = cfg.out.empty() ? cfg.model + ".model" : cfg.out;
  ModelArtifact artifact;
  artifact.params = trained.params;
  artifact.vocabulary = std::string(Vocabulary::standard().symbols());
  artifact.hyperparameters = {{"batch_size", train.batch_size},     {"max_epochs", train.max_epochs},
                              {"patience", train.patience},         {"gamma", train.gamma},
                              {"negatives", train.negatives},       {"learning_rate", train.learning_rate},
                              {"clip_norm", train.clip_norm},       {"init_range", train.init_range},
                              {"forget_bias", train.forget_bias}};
  artifact.run_config = cfg.to_json();
  artifact.training = {train.seed, cfg.fold, trained.epochs_run, trained.best_epoch,
                       trained.best_validation_recall1};
  save_model(artifact, model_path);
  out << "model saved to " << model_path << " (best epoch " << trained.best_epoch << " of "
      << trained.epochs_run << ", validation R@1 " << fixed(trained.best_validation_recall1, 2) << ")\n";

  FoldOutcome outcome;
  outcome.fold = cfg.fold;
  outcome.epochs_run = trained.epochs_run;
  outcome.best_epoch = trained.best_epoch;
  outcome.best_validation_recall1 = trained.best_validation_recall1;
  outcome.curve = trained.curve;
  outcome.evaluations[0] = evaluate_split(trained.params, enc, split.test, Direction::CleanToCorrupted);
  outcome.evaluations[1] = evaluate_split(trained.params, enc, split.test, Direction::CorruptedToClean);
  std::vector<FoldOutcome> folds;
  folds.push_back(std::move(outcome));
  const RankingReport report = aggregate_report(kind, std::move(folds));
  emit_report(report, data, cfg, cfg.report.empty() ? model_path + ".report.json" : cfg.report, out);
  return kExitOk;
}

ModelArtifact load_artifact(const RunConfig& cfg) {
  require_file(cfg.model_path, "model file", "--model-path");
  ModelArtifact a = load_model(cfg.model_path);
  if (a.vocabulary != Vocabulary::standard().symbols()) {
    throw std::runtime_error("vocabulary mismatch: model " + cfg.model_path + " uses symbol table '" +
                             a.vocabulary + "'");
  }
  return a;
}

std::vector<std::size_t> split_indices(const Dataset& data, const RunConfig& cfg) {
  if (cfg.split == "all") {
    std::vector<std::size_t> all(data.pairs.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return all;
  }
  FoldSplit s = split_for_fold(data, cfg.fold);
  if (cfg.split == "train") return s.train;
  if (cfg.split == "validation") return s.validation;
  return s.test;
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
  const ModelArtifact artifact = load_artifact(cfg);
  const Dataset data = load_dataset(cfg);
  const EncodedDataset enc = encode_checked(data);
  const std::vector<std::size_t> split = split_indices(data, cfg);
  if (split.empty()) throw std::runtime_error("split '" + cfg.split + "' is empty");

  std::vector<Direction> directions;
  if (cfg.direction == "both") {
    directions = {Direction::CleanToCorrupted, Direction::CorruptedToClean};
  } else {
    directions = {parse_direction(cfg.direction)};
  }

  nlohmann::json j;
  j["model_path"] = cfg.model_path;
  j["model_kind"] = std::string(to_string(artifact.params.kind()));
  j["split"] = cfg.split;
  j["fold"] = cfg.fold;
  j["run_config"] = cfg.to_json();
  j["directions"] = nlohmann::json::array();

  std::ofstream csv;
  if (!cfg.csv.empty()) {
    csv.open(cfg.csv, std::ios::binary);
    if (!csv) throw std::runtime_error("cannot open " + cfg.csv + " for writing");
    write_rank_csv_header(csv);
  }

  for (Direction d : directions) {
    const SplitEvaluation eval = evaluate_split(artifact.params, enc, split, d);
    const DirectionMetrics m = summarize(eval);
    const ThresholdAnalysis ta = threshold_analysis(eval.top_scores);

    out << (d == Direction::CleanToCorrupted ? "Using clean strings to query corrupted strings"
                                             : "Using corrupted strings to query clean strings")
        << " (" << split.size() << " queries)\n"
        << "R@1 " << fixed(m.recall1, 2) << "  R@3 " << fixed(m.recall3, 2) << "  R@10 " << fixed(m.recall10, 2)
        << "  Med r " << fixed(m.median_rank, 1) << "  Mean r " << fixed(m.mean_rank, 3) << "  Harmonic Mean r "
        << fixed(m.harmonic_mean_rank, 3) << "\n"
        << format_score_table(ta) << "\n";

    nlohmann::json dj = metrics_to_json(m);
    dj["direction"] = std::string(to_string(d));
    dj["threshold_analysis"] = {{"means", ta.means}, {"stddevs", ta.stddevs}, {"threshold", ta.threshold}};
    j["directions"].push_back(std::move(dj));
    if (csv.is_open()) write_rank_csv_rows(csv, eval, data, split, cfg.fold);
  }

  const std::string json_path = cfg.report.empty() ? cfg.model_path + ".eval.json" : cfg.report;
  write_text(json_path, j.dump(2) + "\n");
  out << "report written to " << json_path << "\n";
  return kExitOk;
}

int cmd_query(const RunConfig& cfg, std::ostream& out) {
  const ModelArtifact artifact = load_artifact(cfg);
  if (cfg.query.empty()) throw UsageError("no query given (--query)");
  require_file(cfg.candidates, "candidate file", "--candidates");

  const Vocabulary& vocab = Vocabulary::standard();
  const std::string query_text = cfg.lowercase_fold ? vocab.fold_case(cfg.query) : cfg.query;
  EncodedString query;
  try {
    query = vocab.encode(query_text);
  } catch (const EncodingError& e) {
    throw EncodingError(std::string("query: ") + e.what(), e.symbol(), e.position());
  }

  std::ifstream in(cfg.candidates);
  if (!in) throw std::runtime_error("cannot open " + cfg.candidates);
  std::vector<EncodedString> candidates;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (cfg.lowercase_fold) line = vocab.fold_case(line);
    try {
      candidates.push_back(vocab.encode(line));
    } catch (const EncodingError& e) {
      throw EncodingError(cfg.candidates + ":" + std::to_string(line_no) + ": " + e.what(), e.symbol(),
                          e.position());
    }
  }
  if (candidates.empty()) throw std::runtime_error("candidate file " + cfg.candidates + " is empty");

  const std::vector<double> scores = cosine_scores(artifact.params, query, candidates);
  const std::vector<RankedCandidate> ranked = rank_by_score(scores);
  const std::size_t k = std::min(cfg.top_k, ranked.size());
  bool flagged = false;
  for (std::size_t r = 0; r < k; ++r) {
    const auto& c = ranked[r];
    out << r + 1 << "  " << candidates[c.index].original << "  " << fixed(c.score, 3);
    if (c.score > cfg.threshold) {
      out << "  *";
      flagged = true;
    }
    out << "\n";
  }
  if (flagged) out << "* score above threshold " << fixed(cfg.threshold, 3) << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Neural string conflation: generate data, train encoders, evaluate and query"};
  app.name("conflate");
  app.require_subcommand(1);

  Invocation inv;
  auto* generate = app.add_subcommand("generate", "write a synthetic clean/corrupted name corpus");
  add_common(generate, inv);
  add_key(generate, inv, "out", "output TSV path (default pairs.tsv)");
  add_key(generate, inv, "pairs", "number of pairs (default 10000)");
  add_corruption(generate, inv);

  auto* train = app.add_subcommand("train", "train an encoder on fold 0, or run 10-fold cross-validation");
  add_common(train, inv);
  add_key(train, inv, "model", "boc, lstm or cnn (default cnn)");
  add_key(train, inv, "data", "dataset TSV");
  add_key(train, inv, "out", "model artifact path (default <model>.model)");
  add_key(train, inv, "report", "JSON report path");
  add_key(train, inv, "csv", "per-query rank CSV path");
  add_key(train, inv, "fold", "held-out test fold for single-fold training (default 0)");
  add_switch(train, inv, "cv", "run 10-fold cross-validation instead of saving one model");
  add_key(train, inv, "jobs", "folds trained in parallel (default 1)");
  add_switch(train, inv, "lowercase_fold", "lowercase characters outside the vocabulary before encoding");
  add_training(train, inv);

  auto* evaluate = app.add_subcommand("evaluate", "rank a dataset split with a saved model");
  add_common(evaluate, inv);
  add_key(evaluate, inv, "model_path", "model artifact");
  add_key(evaluate, inv, "data", "dataset TSV");
  add_key(evaluate, inv, "direction", "clean_to_corrupted, corrupted_to_clean or both (default)");
  add_key(evaluate, inv, "split", "test (default), validation, train or all");
  add_key(evaluate, inv, "fold", "fold defining the split (default 0)");
  add_key(evaluate, inv, "report", "JSON report path (default <model-path>.eval.json)");
  add_key(evaluate, inv, "csv", "per-query rank CSV path");
  add_switch(evaluate, inv, "lowercase_fold", "lowercase characters outside the vocabulary before encoding");

  auto* query = app.add_subcommand("query", "rank candidate strings against one query");
  add_common(query, inv);
  add_key(query, inv, "model_path", "model artifact");
  add_key(query, inv, "query", "query string");
  add_key(query, inv, "candidates", "file with one candidate string per line");
  add_key(query, inv, "top_k", "number of results (default 10, clamped to the pool)");
  add_key(query, inv, "threshold", "flag results scoring above this (default 0.62)");
  add_switch(query, inv, "lowercase_fold", "lowercase characters outside the vocabulary before encoding");

  std::vector<const char*> argv{"conflate"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "conflate: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    const RunConfig cfg = resolve(inv);
    if (generate->parsed()) return cmd_generate(cfg, out);
    if (train->parsed()) return cmd_train(cfg, out, err);
    if (evaluate->parsed()) return cmd_evaluate(cfg, out);
    return cmd_query(cfg, out);
  } catch (const UsageError& e) {
    err << "conflate: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "conflate: " << e.what() << "\n";
    return kExitUsage;
  } catch (const TrainingDivergence& e) {
    err << "conflate: training diverged: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "conflate: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace conflate::cli

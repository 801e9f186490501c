// Acceptance suite: one PASS/FAIL line per criterion with pinned tolerances.
// Usage: acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cli.hpp"
#include "conflate/datagen.hpp"
#include "conflate/metrics.hpp"
#include "conflate/optimizer.hpp"
#include "conflate/ranking.hpp"
#include "conflate/report.hpp"
#include "conflate/tensor.hpp"
#include "conflate/trainer.hpp"
#include "oracles.hpp"

using namespace conflate;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 2016;

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void expect(bool ok, const std::string& what) {
    notes.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    pass = pass && ok;
  }
  void note(const std::string& what) { notes.push_back("     " + what); }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::size_t jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

// ---------------------------------------------------------------------------
// 1. End-to-end gradient check in double precision.

Outcome gradient_correctness() {
  Outcome o;
  for (ModelKind kind : {ModelKind::BoC, ModelKind::LSTM, ModelKind::CNN}) {
    const std::string k(to_string(kind));
    const auto small = oracle::end_to_end_grad_check(kind, oracle::small_dims(), kSeed, 0.5);
    o.expect(small.max_relative_error < 1e-4,
             k + " small dims, every coordinate (" + std::to_string(small.coords_checked) +
                 "): max rel err " + fmt("%.2e", small.max_relative_error) + " < 1e-4");
    GradCheckOptions sampled;
    sampled.max_coords_per_tensor = 60;
    const auto full = oracle::end_to_end_grad_check(kind, EncoderDims{}, kSeed + 1, 0.1, sampled);
    o.expect(full.max_relative_error < 1e-4,
             k + " default dims, " + std::to_string(full.coords_checked) + " sampled coordinates: max rel err " +
                 fmt("%.2e", full.max_relative_error) + " < 1e-4");
  }
  return o;
}

// ---------------------------------------------------------------------------
// 2. Layer primitives against brute-force oracles.

Outcome layer_oracles() {
  Outcome o;
  constexpr int kInstances = 200;
  std::mt19937_64 rng(kSeed);
  std::uniform_int_distribution<std::size_t> dim(1, 12);

  double lstm_err = 0.0;
  for (int i = 0; i < kInstances; ++i) {
    const std::size_t H = dim(rng), E = dim(rng);
    Tensor2<double> W(4 * H, E), U(4 * H, H), b(4 * H, 1);
    oracle::fill_random(W, rng);
    oracle::fill_random(U, rng);
    oracle::fill_random(b, rng);
    const auto x = oracle::random_vector<double>(E, rng);
    const auto h = oracle::random_vector<double>(H, rng);
    const auto c = oracle::random_vector<double>(H, rng);
    const auto got = lstm_cell_step<double>({W, U, b}, x, h, c);
    const auto want = oracle::lstm_step(W, U, b, x, h, c);
    for (std::size_t k = 0; k < H; ++k) {
      lstm_err = std::max({lstm_err, std::abs(got.h[k] - want.h[k]), std::abs(got.c[k] - want.c[k])});
    }
  }
  o.expect(lstm_err < 1e-5, "lstm_cell_step vs scalar oracle, " + std::to_string(kInstances) +
                                " instances: max abs err " + fmt("%.2e", lstm_err));

  double conv_err = 0.0;
  for (int i = 0; i < kInstances; ++i) {
    const int window = kCnnWindows[i % 3];
    const std::size_t F = dim(rng), E = dim(rng);
    Tensor2<double> filter(F, E * static_cast<std::size_t>(window)), bias(F, 1);
    oracle::fill_random(filter, rng);
    oracle::fill_random(bias, rng);
    const auto x = oracle::random_vector<double>(filter.cols(), rng);
    const auto got = conv1d_tanh<double>(filter, bias, x, window);
    const auto want = oracle::conv(filter, bias, x);
    for (std::size_t m = 0; m < F; ++m) conv_err = std::max(conv_err, std::abs(got[m] - want[m]));
  }
  o.expect(conv_err < 1e-5, "conv1d_tanh vs scalar oracle, " + std::to_string(kInstances) +
                                " instances: max abs err " + fmt("%.2e", conv_err));

  // Whole-string CNN encoding against explicit window enumeration.
  double cnn_err = 0.0;
  const auto& vocab = Vocabulary::standard();
  std::uniform_int_distribution<std::size_t> len(1, 26), sym(0, vocab.symbols().size() - 1);
  const auto cnn = oracle::random_params<double>(ModelKind::CNN, oracle::small_dims(), kSeed, 0.5);
  for (int i = 0; i < kInstances; ++i) {
    std::string s;
    for (std::size_t k = len(rng); k > 0; --k) s.push_back(vocab.symbols()[sym(rng)]);
    const auto e = vocab.encode(s);
    const auto got = encode_batch<double>(cnn, std::span<const EncodedString>(&e, 1));
    const auto want = oracle::encode_cnn(cnn, e.indices);
    for (std::size_t k = 0; k < want.size(); ++k) {
      cnn_err = std::max(cnn_err, std::abs(got(static_cast<Eigen::Index>(k), 0) - want[k]));
    }
  }
  o.expect(cnn_err < 1e-5, "CNN encoder vs window-enumeration oracle, " + std::to_string(kInstances) +
                               " strings: max abs err " + fmt("%.2e", cnn_err));

  double pool_err = 0.0;
  for (int i = 0; i < kInstances; ++i) {
    std::vector<std::vector<double>> maps;
    const std::size_t T = dim(rng) + 1;
    for (std::size_t t = 0; t < T; ++t) maps.push_back(oracle::random_vector<double>(100, rng));
    const auto got = max_over_time<double>(maps).value;
    const auto want = oracle::max_pool(maps);
    for (std::size_t k = 0; k < got.size(); ++k) pool_err = std::max(pool_err, std::abs(got[k] - want[k]));
  }
  o.expect(pool_err < 1e-5, "max_over_time vs loop oracle, " + std::to_string(kInstances) +
                                " instances: max abs err " + fmt("%.2e", pool_err));

  double post_err = 0.0;
  std::uniform_real_distribution<double> gamma(0.5, 20.0);
  for (int i = 0; i < kInstances; ++i) {
    const auto scores = oracle::random_vector<double>(dim(rng) + 1, rng);
    const std::size_t pos = static_cast<std::size_t>(i) % scores.size();
    const double g = gamma(rng);
    post_err = std::max(post_err, std::abs(posterior(scores, pos, g) - oracle::posterior(scores, pos, g)));
  }
  o.expect(post_err < 1e-5, "posterior vs log-sum-exp oracle, " + std::to_string(kInstances) +
                                " instances: max abs err " + fmt("%.2e", post_err));
  return o;
}

// ---------------------------------------------------------------------------
// 3. Every model memorises 50 pairs.

Outcome overfit_sanity() {
  Outcome o;
  CorruptionConfig cc;
  cc.seed = kSeed;
  const Dataset d = build_dataset(50, cc);
  const EncodedDataset enc = encode_dataset(d);
  std::vector<std::size_t> all(50);
  std::iota(all.begin(), all.end(), std::size_t{0});
  const auto start = std::chrono::steady_clock::now();
  for (ModelKind kind : {ModelKind::BoC, ModelKind::LSTM, ModelKind::CNN}) {
    TrainConfig c;
    c.seed = kSeed;
    c.negatives = 49;  // every other pair; 50 would exceed the pool
    c.max_epochs = 200;
    c.patience = 200;
    std::size_t first_perfect = 0;
    TrainHooks hooks;
    hooks.validation_metric = [&](const EncoderParams<float>& p, std::size_t epoch) {
      const double r1 = recall_at_k(evaluate_split(p, enc, all, Direction::CleanToCorrupted).ranks, 1);
      if (r1 == 100.0 && first_perfect == 0) first_perfect = epoch;
      return r1;
    };
    const auto r = train_fold(kind, enc, all, all, c, hooks);
    o.expect(r.best_validation_recall1 == 100.0,
             std::string(to_string(kind)) + ": training R@1 " + fmt("%.1f", r.best_validation_recall1) +
                 (first_perfect ? " (first reached at epoch " + std::to_string(first_perfect) + ")" : ""));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.expect(secs < 300.0, "runtime " + fmt("%.1f", secs) + " s < 300 s");
  return o;
}

// ---------------------------------------------------------------------------
// 4 and 6 share one 10-fold run per model on 2,000 default-corruption pairs.

std::map<ModelKind, RankingReport>& ordering_reports() {
  static std::map<ModelKind, RankingReport> reports;
  if (!reports.empty()) return reports;
  CorruptionConfig cc;
  cc.seed = kSeed;
  const Dataset d = build_dataset(2000, cc);
  TrainConfig c;
  c.seed = kSeed;
  CrossValidateOptions opt;
  opt.jobs = jobs();
  for (ModelKind kind : {ModelKind::BoC, ModelKind::LSTM, ModelKind::CNN}) {
    const auto start = std::chrono::steady_clock::now();
    reports[kind] = cross_validate(kind, d, c, opt);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cerr << "  [10-fold " << to_string(kind) << " finished in " << fmt("%.0f", secs) << " s]\n";
  }
  return reports;
}

Outcome model_ordering() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  auto& reports = ordering_reports();
  std::vector<RankingReport> rows;
  for (ModelKind kind : {ModelKind::BoC, ModelKind::LSTM, ModelKind::CNN}) rows.push_back(reports[kind]);
  std::istringstream table(format_report_table(rows));
  for (std::string line; std::getline(table, line);) o.note(line);
  for (std::size_t dir = 0; dir < 2; ++dir) {
    const std::string name(to_string(rows[0].directions[dir].direction));
    const double boc = rows[0].directions[dir].mean.recall1;
    const double lstm = rows[1].directions[dir].mean.recall1;
    const double cnn = rows[2].directions[dir].mean.recall1;
    o.expect(lstm - boc >= 2.0, name + ": LSTM R@1 " + fmt("%.2f", lstm) + " - BoC R@1 " + fmt("%.2f", boc) +
                                    " = " + fmt("%.2f", lstm - boc) + " >= 2");
    o.expect(cnn - lstm >= 2.0, name + ": CNN R@1 " + fmt("%.2f", cnn) + " - LSTM R@1 " + fmt("%.2f", lstm) +
                                    " = " + fmt("%.2f", cnn - lstm) + " >= 2");
    const auto& m = rows[2].directions[dir].mean;
    o.expect(m.recall10 >= 95.0, name + ": CNN R@10 " + fmt("%.2f", m.recall10) + " >= 95");
    o.expect(m.median_rank == 1.0, name + ": CNN median rank " + fmt("%.2f", m.median_rank) + " == 1.0");
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.note("runtime " + fmt("%.0f", secs) + " s with " + std::to_string(jobs()) + " job(s)");
  o.expect(secs < 7200.0, "runtime < 2 h");
  return o;
}

// ---------------------------------------------------------------------------
// 5. Token reversal against candidates BoC cannot tell apart.

// Groups of four entities whose tokens are letter anagrams of each other, so
// all members share one character multiset. Corruption is token reversal
// only. Each group sits in a single fold so the ambiguity reaches the test pool.
Dataset reversal_dataset(std::size_t groups, std::uint64_t seed) {
  constexpr std::size_t kGroup = 4;
  Rng rng(seed);
  CorruptionConfig reverse_only{0.0, 1.0, 0.0};
  Dataset d;
  std::set<std::string> seen;
  std::size_t g = 0;
  while (g < groups) {
    const std::string base = generate_name(rng);
    const auto space = base.find(' ');
    std::string a = base.substr(0, space), b = base.substr(space + 1);
    std::vector<std::string> members{base};
    for (int attempt = 0; attempt < 50 && members.size() < kGroup; ++attempt) {
      std::shuffle(a.begin(), a.end(), rng);
      std::shuffle(b.begin(), b.end(), rng);
      const std::string m = a + " " + b;
      if (std::find(members.begin(), members.end(), m) == members.end()) members.push_back(m);
    }
    if (members.size() < kGroup) continue;
    bool fresh = true;
    for (const auto& m : members) fresh = fresh && !seen.count(m);
    if (!fresh) continue;
    for (const auto& m : members) {
      seen.insert(m);
      d.pairs.push_back({d.pairs.size(), m, corrupt(m, reverse_only, rng), g % kFoldCount});
    }
    ++g;
  }
  return d;
}

Outcome reversal_sensitivity() {
  Outcome o;
  const Dataset d = reversal_dataset(500, kSeed);
  o.note("2,000 pairs in 500 anagram groups of 4; corruption = token reversal only");
  TrainConfig c;
  c.seed = kSeed;
  CrossValidateOptions opt;
  opt.jobs = jobs();
  const auto boc = cross_validate(ModelKind::BoC, d, c, opt);
  const auto cnn = cross_validate(ModelKind::CNN, d, c, opt);
  const double chance = 100.0 / 4.0;
  for (std::size_t dir = 0; dir < 2; ++dir) {
    const std::string name(to_string(boc.directions[dir].direction));
    const double b = boc.directions[dir].mean.recall1;
    const double k = cnn.directions[dir].mean.recall1;
    o.expect(b <= chance + 5.0, name + ": BoC R@1 " + fmt("%.2f", b) + " <= chance among the group (" +
                                    fmt("%.0f", chance) + ") + 5");
    o.expect(k >= 90.0, name + ": CNN R@1 " + fmt("%.2f", k) + " >= 90");
  }
  return o;
}

// ---------------------------------------------------------------------------
// 6. Threshold mechanics on the CNN run, plus a fixed fixture.

Outcome threshold_reproduction() {
  Outcome o;
  const auto& cnn = ordering_reports()[ModelKind::CNN];
  for (const auto& dr : cnn.directions) {
    const auto& t = dr.threshold;
    const std::string name(to_string(dr.direction));
    o.note(name + ": top-k means " + fmt("%.3f", t.means[0]) + " " + fmt("%.3f", t.means[1]) + " " +
           fmt("%.3f", t.means[2]) + " " + fmt("%.3f", t.means[3]) + ", threshold " + fmt("%.3f", t.threshold));
    o.expect(t.means[0] > t.means[1], name + ": top-1 mean > top-2 mean");
    o.expect(t.means[1] >= t.means[2] && t.means[2] >= t.means[3], name + ": top-k means weakly decreasing");
    o.expect(t.threshold == (t.means[0] + t.means[1]) / 2, name + ": threshold == (mean1 + mean2) / 2 exactly");
  }
  const double fixture = suggest_threshold(0.792, 0.448);
  o.expect(fixture == 0.62, "fixture means 0.792 / 0.448 -> " + fmt("%.17g", fixture) + " == 0.62");
  return o;
}

// ---------------------------------------------------------------------------
// 7. Metric fixtures and properties.

Outcome metric_units() {
  Outcome o;
  const std::vector<std::size_t> r{1, 2, 3, 11};
  o.expect(recall_at_k(r, 1) == 25.0 && recall_at_k(r, 3) == 75.0 && recall_at_k(r, 10) == 75.0,
           "ranks [1,2,3,11] -> R@1/3/10 = 25/75/75");
  const std::vector<std::size_t> ones(9, 1);
  o.expect(recall_at_k(ones, 1) == 100.0, "all ranks 1 -> R@1 = 100");
  const auto s = rank_statistics(std::vector<std::size_t>{1, 1, 2});
  o.expect(s.median == 1.0 && s.mean == 4.0 / 3.0 && s.harmonic_mean == 3.0 / 2.5,
           "ranks [1,1,2] -> median 1, mean 4/3, harmonic 1.2");
  const auto t = rank_statistics(ones);
  o.expect(t.median == 1.0 && t.mean == 1.0 && t.harmonic_mean == 1.0, "all ranks 1 -> (1, 1, 1)");
  o.expect(posterior(std::vector<double>{0.7}, 0, 10.0) == 1.0, "posterior of a single candidate == 1");
  o.expect(posterior(std::vector<double>{0.2, 0.2}, 0, 10.0) == 0.5, "posterior of two equal scores == 0.5");
  const double want = std::exp(10.0) / (std::exp(10.0) + 1.0);
  o.expect(std::abs(posterior(std::vector<double>{1.0, 0.0}, 0, 10.0) - want) < 1e-15,
           "posterior (1, 0), gamma 10 == e^10 / (e^10 + 1)");

  std::mt19937_64 rng(kSeed);
  std::uniform_int_distribution<std::size_t> len(1, 500), rank(1, 2000);
  bool monotone = true, amhm = true;
  for (int i = 0; i < 1000; ++i) {
    std::vector<std::size_t> v(len(rng));
    for (auto& x : v) x = rank(rng);
    double prev = 0.0;
    for (std::size_t k = 1; k <= 50; ++k) {
      const double rk = recall_at_k(v, k);
      monotone = monotone && rk >= prev;
      prev = rk;
    }
    const auto st = rank_statistics(v);
    amhm = amhm && st.harmonic_mean <= st.mean;
  }
  o.expect(monotone, "recall@k non-decreasing in k on 1,000 random rank vectors");
  o.expect(amhm, "harmonic mean <= arithmetic mean on 1,000 random rank vectors");
  return o;
}

// ---------------------------------------------------------------------------
// 8. Bitwise reproducibility of the CLI training path.

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome reproducibility() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / "conflate_acceptance_repro";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string data = (dir / "pairs.tsv").string();
  const std::string model = (dir / "cnn.model").string();
  const std::string report = (dir / "report.json").string();
  std::ostringstream sink;
  auto cli = [&](std::vector<std::string> args) { return cli::run_cli(args, sink, sink); };

  o.expect(cli({"generate", "--pairs", "1000", "--seed", "7", "--out", data}) == 0, "generate 1,000 pairs");
  std::vector<std::string> runs_model, runs_report;
  for (int run = 0; run < 2; ++run) {
    const int code = cli({"train", "--model", "cnn", "--seed", "7", "--data", data, "--out", model, "--report",
                          report, "--jobs", "1"});
    o.expect(code == 0, "train run " + std::to_string(run + 1) + " exit code 0");
    runs_model.push_back(slurp(model));
    runs_report.push_back(slurp(report));
  }
  o.expect(!runs_model[0].empty() && runs_model[0] == runs_model[1],
           "model artifacts bitwise identical (" + std::to_string(runs_model[0].size()) + " bytes)");
  o.expect(!runs_report[0].empty() && runs_report[0] == runs_report[1],
           "reports bitwise identical (" + std::to_string(runs_report[0].size()) + " bytes)");
  fs::remove_all(dir);
  return o;
}

// ---------------------------------------------------------------------------
// 9. Initialisation contract and clipping instrumentation.

Outcome initialization_contract() {
  Outcome o;
  const auto lstm = init_params<float>(ModelKind::LSTM, EncoderDims{}, InitConfig{0.01, 3.0, kSeed});
  const std::size_t H = lstm.dims().lstm_hidden;
  double ortho = 0.0;
  bool forget = true, other_bias = true;
  for (const char* dir : {"fwd", "bwd"}) {
    const auto& U = lstm.at(std::string("lstm.") + dir + ".U").value;
    for (std::size_t g = 0; g < 4; ++g) {
      Eigen::MatrixXd B(H, H);
      for (std::size_t i = 0; i < H; ++i) {
        for (std::size_t j = 0; j < H; ++j) B(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = U(g * H + i, j);
      }
      const Eigen::MatrixXd R = B.transpose() * B - Eigen::MatrixXd::Identity(B.rows(), B.cols());
      ortho = std::max(ortho, R.cwiseAbs().maxCoeff());
    }
    const auto& b = lstm.at(std::string("lstm.") + dir + ".b").value;
    for (std::size_t r = 0; r < 4 * H; ++r) {
      if (r >= H && r < 2 * H) {
        forget = forget && b(r, 0) == 3.0f;
      } else {
        other_bias = other_bias && b(r, 0) == 0.0f;
      }
    }
  }
  o.expect(ortho < 1e-5, "max |U_g^T U_g - I| over 8 recurrent blocks = " + fmt("%.2e", ortho) + " < 1e-5");
  o.expect(forget, "every forget-gate bias == 3.0 exactly");
  o.expect(other_bias, "input/output/candidate biases == 0.0");

  float worst = 0.0f;
  std::size_t uniform_tensors = 0;
  for (ModelKind kind : {ModelKind::BoC, ModelKind::LSTM, ModelKind::CNN}) {
    const auto p = init_params<float>(kind, EncoderDims{}, InitConfig{0.01, 3.0, kSeed});
    for (std::size_t i = 0; i < p.count(); ++i) {
      const auto& name = p.name(i);
      if (name.find(".U") != std::string::npos || name.find(".b") != std::string::npos) continue;
      ++uniform_tensors;
      for (float v : p.value(i).flat()) worst = std::max(worst, std::abs(v));
    }
  }
  o.expect(worst <= 0.01f, "max |w| over " + std::to_string(uniform_tensors) + " uniform tensors = " +
                               fmt("%.6f", worst) + " <= 0.01");

  CorruptionConfig cc;
  cc.seed = kSeed;
  const Dataset d = build_dataset(2000, cc);
  const EncodedDataset enc = encode_dataset(d);
  const FoldSplit split = split_for_fold(d, 0);
  for (ModelKind kind : {ModelKind::BoC, ModelKind::LSTM, ModelKind::CNN}) {
    TrainConfig c;
    c.seed = kSeed;
    c.max_epochs = 1;
    std::size_t steps = 0, clipped = 0;
    double worst_after = 0.0, largest_before = 0.0;
    TrainHooks hooks;
    hooks.on_step = [&](const StepInfo& s) {
      ++steps;
      largest_before = std::max(largest_before, s.grad_norm);
      if (s.clip_scale < 1.0) {
        ++clipped;
        worst_after = std::max(worst_after, s.clipped_norm);
      }
    };
    (void)train_fold(kind, enc, split.train, split.validation, c, hooks);
    o.expect(worst_after <= 5.0 + 1e-6,
             std::string(to_string(kind)) + ": clipping fired on " + std::to_string(clipped) + "/" +
                 std::to_string(steps) + " steps (largest raw norm " + fmt("%.2f", largest_before) +
                 "), max post-clip norm " + fmt("%.6f", worst_after) + " <= 5 + 1e-6");
  }
  return o;
}

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "gradient correctness", gradient_correctness},
      {2, "layer oracle equivalence", layer_oracles},
      {3, "overfit sanity", overfit_sanity},
      {4, "model ordering", model_ordering},
      {5, "reversal sensitivity", reversal_sensitivity},
      {6, "threshold reproduction", threshold_reproduction},
      {7, "metric unit correctness", metric_units},
      {8, "reproducibility", reproducibility},
      {9, "initialization contract", initialization_contract},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  std::vector<std::string> summary;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "criterion " << c.id << " (" << c.title << ")\n";
    for (const auto& n : o.notes) std::cout << "    " << n << "\n";
    const std::string line = std::string(o.pass ? "PASS" : "FAIL") + "  criterion " + std::to_string(c.id) +
                             ": " + c.title + " [" + fmt("%.1f", secs) + " s]";
    std::cout << line << "\n" << std::endl;
    summary.push_back(line);
    failures += o.pass ? 0 : 1;
  }
  std::cout << "summary\n";
  for (const auto& s : summary) std::cout << "  " << s << "\n";
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criterion/criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}

#include "conflate/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "conflate/batch_encoder.hpp"
#include "conflate/optimizer.hpp"
#include "conflate/ranking.hpp"
#include "conflate/rng.hpp"

namespace conflate {

std::string_view to_string(Direction d) {
  return d == Direction::CleanToCorrupted ? "clean_to_corrupted" : "corrupted_to_clean";
}

Direction parse_direction(std::string_view name) {
  if (name == "clean_to_corrupted" || name == "a2b") return Direction::CleanToCorrupted;
  if (name == "corrupted_to_clean" || name == "b2a") return Direction::CorruptedToClean;
  throw std::invalid_argument("unknown direction '" + std::string(name) + "'");
}

void TrainConfig::validate(std::size_t train_size) const {
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (patience < 1) throw std::invalid_argument("TrainConfig: patience must be >= 1");
  if (max_epochs < 1) throw std::invalid_argument("TrainConfig: max_epochs must be >= 1");
  if (!(gamma > 0.0)) throw std::invalid_argument("TrainConfig: gamma must be > 0");
  if (negatives < 1) throw std::invalid_argument("TrainConfig: need at least one negative");
  if (negatives + 1 > train_size) {
    throw std::invalid_argument("TrainConfig: " + std::to_string(negatives) +
                                " negatives need a training set of at least " +
                                std::to_string(negatives + 1) + " pairs, got " +
                                std::to_string(train_size));
  }
  if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
  if (!(clip_norm > 0.0)) throw std::invalid_argument("TrainConfig: clip_norm must be > 0");
}

EncodedDataset encode_dataset(const Dataset& data, const Vocabulary& vocab) {
  EncodedDataset out;
  out.clean.reserve(data.pairs.size());
  out.corrupted.reserve(data.pairs.size());
  for (const auto& p : data.pairs) {
    out.clean.push_back(vocab.encode(p.clean));
    out.corrupted.push_back(vocab.encode(p.corrupted));
  }
  return out;
}

TrainingDivergence::TrainingDivergence(std::size_t epoch, std::size_t batch, double loss)
    : std::runtime_error("training diverged at epoch " + std::to_string(epoch) + ", batch " +
                         std::to_string(batch) + " (loss " + std::to_string(loss) + ")"),
      epoch_(epoch),
      batch_(batch),
      loss_(loss) {}

std::uint64_t fold_seed(std::uint64_t seed, std::size_t fold) { return mix_seed(seed, 1000 + fold); }

namespace {

// Column assignment for the distinct strings touched by one minibatch.
class BatchColumns {
 public:
  explicit BatchColumns(std::size_t pairs) : clean_(pairs, kNone), corrupted_(pairs, kNone) {}

  std::size_t clean(std::size_t pair, const EncodedDataset& data) {
    return slot(clean_, pair, data.clean[pair]);
  }
  std::size_t corrupted(std::size_t pair, const EncodedDataset& data) {
    return slot(corrupted_, pair, data.corrupted[pair]);
  }
  const std::vector<const Sequence*>& sequences() const { return seqs_; }

  void reset() {
    for (auto p : touched_clean_) clean_[p] = kNone;
    for (auto p : touched_corrupted_) corrupted_[p] = kNone;
    touched_clean_.clear();
    touched_corrupted_.clear();
    seqs_.clear();
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  std::size_t slot(std::vector<std::size_t>& table, std::size_t pair, const EncodedString& s) {
    if (table[pair] == kNone) {
      table[pair] = seqs_.size();
      seqs_.push_back(&s.indices);
      (&table == &clean_ ? touched_clean_ : touched_corrupted_).push_back(pair);
    }
    return table[pair];
  }

  std::vector<std::size_t> clean_;
  std::vector<std::size_t> corrupted_;
  std::vector<std::size_t> touched_clean_;
  std::vector<std::size_t> touched_corrupted_;
  std::vector<const Sequence*> seqs_;
};

}  // namespace

TrainResult train_fold(ModelKind kind, const EncodedDataset& data, std::span<const std::size_t> train,
                       std::span<const std::size_t> validation, const TrainConfig& config,
                       const TrainHooks& hooks) {
  config.validate(train.size());
  if (validation.empty() && !hooks.validation_metric) {
    throw std::invalid_argument("train_fold: empty validation split");
  }
  Rng init_rng(mix_seed(config.seed, 0));
  Rng shuffle_rng(mix_seed(config.seed, 1));
  Rng negative_rng(mix_seed(config.seed, 2));

  InitConfig init{config.init_range, config.forget_bias, config.seed};
  EncoderParams<float> params = init_params<float>(kind, config.dims, init, init_rng);
  auto duals = params.duals();
  AdamState<float> adam(duals, AdamConfig{config.learning_rate});

  TrainResult result;
  result.params = params;
  double best = -1.0;
  std::size_t since_best = 0;

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  BatchColumns columns(data.size());
  std::vector<CandidateRefs> refs;
  EncodeCache<float> cache;
  Mat<float> dY;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      columns.reset();
      refs.clear();
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t pos = order[k];
        const std::size_t pair = train[pos];
        CandidateRefs r;
        r.query = columns.clean(pair, data);
        r.positive = 0;
        r.candidates.push_back(columns.corrupted(pair, data));
        for (std::size_t neg : sample_negatives(train.size(), pos, config.negatives, negative_rng)) {
          r.candidates.push_back(columns.corrupted(train[neg], data));
        }
        refs.push_back(std::move(r));
      }
      const Mat<float> Y = encode_batch<float>(params, columns.sequences(), &cache);
      const float loss = ranking_loss<float>(Y, refs, static_cast<float>(config.gamma), &dY);
      if (!std::isfinite(loss) || !dY.allFinite()) throw TrainingDivergence(epoch, batch_index, loss);
      encode_batch_backward(params, cache, dY);

      StepInfo info;
      info.epoch = epoch;
      info.batch = batch_index;
      info.loss = loss;
      info.grad_norm = global_grad_norm<float>(duals);
      if (!std::isfinite(info.grad_norm)) throw TrainingDivergence(epoch, batch_index, loss);
      info.clip_scale = clip_gradients<float>(duals, config.clip_norm);
      info.clipped_norm = info.clip_scale == 1.0 ? info.grad_norm : global_grad_norm<float>(duals);
      if (hooks.on_step) hooks.on_step(info);
      adam.step(duals);
      epoch_loss += loss;
    }

    EpochRecord record;
    record.epoch = epoch;
    record.mean_loss = epoch_loss / static_cast<double>(train.size());
    if (hooks.validation_metric) {
      record.validation_recall1 = hooks.validation_metric(params, epoch);
    } else {
      const auto eval = evaluate_split(params, data, validation, Direction::CleanToCorrupted);
      record.validation_recall1 = recall_at_k(eval.ranks, 1);
    }
    result.curve.push_back(record);
    result.epochs_run = epoch;
    if (hooks.on_epoch) hooks.on_epoch(record);

    if (record.validation_recall1 > best) {
      best = record.validation_recall1;
      result.params = params;
      result.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  result.best_validation_recall1 = best;
  result.params.zero_grad();
  return result;
}

std::vector<double> cosine_scores(const EncoderParams<float>& params, const EncodedString& query,
                                  std::span<const EncodedString> candidates) {
  if (candidates.empty()) return {};
  const Eigen::VectorXd q = encode_batch<float>(params, std::span<const EncodedString>(&query, 1)).cast<double>();
  const Eigen::MatrixXd D = encode_batch<float>(params, candidates).cast<double>();
  const double qn = q.norm();
  if (qn == 0.0) throw ZeroNormError("cosine_scores: zero-norm query encoding");
  std::vector<double> out(candidates.size());
  for (Eigen::Index j = 0; j < D.cols(); ++j) {
    const double dn = D.col(j).norm();
    if (dn == 0.0) throw ZeroNormError("cosine_scores: zero-norm candidate encoding");
    out[static_cast<std::size_t>(j)] = q.dot(D.col(j)) / (qn * dn);
  }
  return out;
}

SplitEvaluation evaluate_split(const EncoderParams<float>& params, const EncodedDataset& data,
                               std::span<const std::size_t> split, Direction direction) {
  if (split.empty()) throw std::invalid_argument("evaluate_split: empty split");
  const auto& queries = data.queries(direction);
  const auto& targets = data.targets(direction);
  std::vector<const Sequence*> qs;
  std::vector<const Sequence*> ts;
  for (auto i : split) {
    qs.push_back(&queries.at(i).indices);
    ts.push_back(&targets.at(i).indices);
  }
  auto normalized = [&](const std::vector<const Sequence*>& seqs) {
    Eigen::MatrixXd Y = encode_batch<float>(params, seqs).cast<double>();
    for (Eigen::Index j = 0; j < Y.cols(); ++j) {
      const double n = Y.col(j).norm();
      if (n == 0.0) throw ZeroNormError("evaluate_split: zero-norm encoding");
      Y.col(j) /= n;
    }
    return Y;
  };
  const Eigen::MatrixXd Q = normalized(qs);
  const Eigen::MatrixXd D = normalized(ts);
  const Eigen::MatrixXd S = Q.transpose() * D;

  SplitEvaluation out;
  out.direction = direction;
  const std::size_t n = split.size();
  const std::size_t keep = std::min(kTopScores, n);
  std::vector<double> row(n);
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) row[j] = S(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    out.ranks.push_back(rank_of(row, i));
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(keep), idx.end(),
                      [&](std::size_t a, std::size_t b) { return row[a] > row[b] || (row[a] == row[b] && a < b); });
    std::vector<double> scores;
    std::vector<std::size_t> top(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(keep));
    for (auto j : top) scores.push_back(row[j]);
    out.top_scores.push_back(std::move(scores));
    out.top_indices.push_back(std::move(top));
  }
  return out;
}

DirectionMetrics summarize(const SplitEvaluation& eval) {
  DirectionMetrics m;
  m.recall1 = recall_at_k(eval.ranks, 1);
  m.recall3 = recall_at_k(eval.ranks, 3);
  m.recall10 = recall_at_k(eval.ranks, 10);
  const auto stats = rank_statistics(eval.ranks);
  m.median_rank = stats.median;
  m.mean_rank = stats.mean;
  m.harmonic_mean_rank = stats.harmonic_mean;
  for (std::size_t k = 0; k < kTopScores; ++k) {
    std::vector<double> col;
    for (const auto& s : eval.top_scores) {
      if (s.size() > k) col.push_back(s[k]);
    }
    m.top_score_means[k] = mean_of(col);
  }
  return m;
}

namespace {

template <typename F>
DirectionMetrics reduce(const std::vector<DirectionMetrics>& folds, F&& stat) {
  auto field = [&](auto member) {
    std::vector<double> xs;
    for (const auto& f : folds) xs.push_back(f.*member);
    return stat(std::span<const double>(xs));
  };
  DirectionMetrics out;
  out.recall1 = field(&DirectionMetrics::recall1);
  out.recall3 = field(&DirectionMetrics::recall3);
  out.recall10 = field(&DirectionMetrics::recall10);
  out.median_rank = field(&DirectionMetrics::median_rank);
  out.mean_rank = field(&DirectionMetrics::mean_rank);
  out.harmonic_mean_rank = field(&DirectionMetrics::harmonic_mean_rank);
  for (std::size_t k = 0; k < kTopScores; ++k) {
    std::vector<double> xs;
    for (const auto& f : folds) xs.push_back(f.top_score_means[k]);
    out.top_score_means[k] = stat(std::span<const double>(xs));
  }
  return out;
}

}  // namespace

RankingReport aggregate_report(ModelKind kind, std::vector<FoldOutcome> folds) {
  RankingReport report;
  report.kind = kind;
  report.folds = std::move(folds);
  for (std::size_t d = 0; d < 2; ++d) {
    DirectionReport& dr = report.directions[d];
    dr.direction = d == 0 ? Direction::CleanToCorrupted : Direction::CorruptedToClean;
    std::vector<std::vector<double>> pooled;
    for (const auto& f : report.folds) {
      dr.folds.push_back(summarize(f.evaluations[d]));
      for (const auto& s : f.evaluations[d].top_scores) {
        if (s.size() >= kTopScores) pooled.push_back(s);
      }
    }
    dr.mean = reduce(dr.folds, [](std::span<const double> xs) { return mean_of(xs); });
    dr.stddev = reduce(dr.folds, [](std::span<const double> xs) { return sample_stddev(xs); });
    if (!pooled.empty()) dr.threshold = threshold_analysis(pooled);
  }
  return report;
}

RankingReport cross_validate(ModelKind kind, const Dataset& dataset, const TrainConfig& config,
                             const CrossValidateOptions& options) {
  if (options.fold_count < 1 || options.fold_count > kFoldCount) {
    throw std::invalid_argument("cross_validate: fold_count must be in [1, 10]");
  }
  const EncodedDataset data = encode_dataset(dataset);
  std::vector<FoldOutcome> outcomes(options.fold_count);
  std::vector<std::exception_ptr> errors(options.fold_count);
  std::atomic<std::size_t> next{0};
  std::mutex callback_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t fold = next.fetch_add(1);
      if (fold >= options.fold_count) return;
      try {
        const FoldSplit split = split_for_fold(dataset, fold);
        TrainConfig fold_config = config;
        fold_config.seed = fold_seed(config.seed, fold);
        TrainHooks hooks;
        if (options.on_epoch) {
          hooks.on_epoch = [&, fold](const EpochRecord& r) {
            std::lock_guard lock(callback_mutex);
            options.on_epoch(fold, r);
          };
        }
        TrainResult trained = train_fold(kind, data, split.train, split.validation, fold_config, hooks);
        FoldOutcome& out = outcomes[fold];
        out.fold = fold;
        out.epochs_run = trained.epochs_run;
        out.best_epoch = trained.best_epoch;
        out.best_validation_recall1 = trained.best_validation_recall1;
        out.curve = std::move(trained.curve);
        out.evaluations[0] = evaluate_split(trained.params, data, split.test, Direction::CleanToCorrupted);
        out.evaluations[1] = evaluate_split(trained.params, data, split.test, Direction::CorruptedToClean);
      } catch (...) {
        errors[fold] = std::current_exception();
      }
    }
  };

  const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, options.fold_count));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  for (std::size_t fold = 0; fold < options.fold_count; ++fold) {
    if (!errors[fold]) continue;
    try {
      std::rethrow_exception(errors[fold]);
    } catch (const std::exception& e) {
      throw FoldError(fold, e.what());
    }
  }
  return aggregate_report(kind, std::move(outcomes));
}

}  // namespace conflate

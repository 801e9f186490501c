#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "conflate/datagen.hpp"
#include "conflate/encoder_params.hpp"
#include "conflate/metrics.hpp"
#include "conflate/vocabulary.hpp"

namespace conflate {

enum class Direction { CleanToCorrupted, CorruptedToClean };

std::string_view to_string(Direction d);
Direction parse_direction(std::string_view name);

struct TrainConfig {
  std::size_t batch_size = 100;
  std::size_t max_epochs = 30;
  std::size_t patience = 5;
  double gamma = 10.0;
  std::size_t negatives = 50;
  double learning_rate = 2e-4;
  double clip_norm = 5.0;
  std::uint64_t seed = 0;
  EncoderDims dims;
  double init_range = 0.01;
  double forget_bias = 3.0;

  void validate(std::size_t train_size) const;
};

// Both fields of every pair, encoded once.
struct EncodedDataset {
  std::vector<EncodedString> clean;
  std::vector<EncodedString> corrupted;

  std::size_t size() const { return clean.size(); }
  const std::vector<EncodedString>& queries(Direction d) const {
    return d == Direction::CleanToCorrupted ? clean : corrupted;
  }
  const std::vector<EncodedString>& targets(Direction d) const {
    return d == Direction::CleanToCorrupted ? corrupted : clean;
  }
};

EncodedDataset encode_dataset(const Dataset& data, const Vocabulary& vocab = Vocabulary::standard());

class TrainingDivergence : public std::runtime_error {
 public:
  TrainingDivergence(std::size_t epoch, std::size_t batch, double loss);
  std::size_t epoch() const { return epoch_; }
  std::size_t batch() const { return batch_; }
  double loss() const { return loss_; }

 private:
  std::size_t epoch_;
  std::size_t batch_;
  double loss_;
};

class FoldError : public std::runtime_error {
 public:
  FoldError(std::size_t fold, const std::string& what)
      : std::runtime_error("fold " + std::to_string(fold) + ": " + what), fold_(fold) {}
  std::size_t fold() const { return fold_; }

 private:
  std::size_t fold_;
};

struct StepInfo {
  std::size_t epoch = 0;  // 1-based
  std::size_t batch = 0;  // 0-based within the epoch
  double loss = 0.0;      // summed over the batch
  double grad_norm = 0.0;
  double clip_scale = 1.0;
  double clipped_norm = 0.0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double mean_loss = 0.0;  // per query
  double validation_recall1 = 0.0;
};

struct TrainHooks {
  std::function<void(const StepInfo&)> on_step;
  std::function<void(const EpochRecord&)> on_epoch;
  // Replaces the validation Recall@1 used for early stopping.
  std::function<double(const EncoderParams<float>&, std::size_t epoch)> validation_metric;
};

struct TrainResult {
  EncoderParams<float> params;  // best-validation parameters
  std::vector<EpochRecord> curve;
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  double best_validation_recall1 = 0.0;
};

// Index lists refer to pairs of `data`.
TrainResult train_fold(ModelKind kind, const EncodedDataset& data, std::span<const std::size_t> train,
                       std::span<const std::size_t> validation, const TrainConfig& config,
                       const TrainHooks& hooks = {});

struct SplitEvaluation {
  Direction direction = Direction::CleanToCorrupted;
  std::vector<std::size_t> ranks;                     // 1-based, per query
  std::vector<std::vector<double>> top_scores;        // best first, up to 4 per query
  std::vector<std::vector<std::size_t>> top_indices;  // positions within the split
};

// Ranks every target-side string of the split for each query-side string.
SplitEvaluation evaluate_split(const EncoderParams<float>& params, const EncodedDataset& data,
                               std::span<const std::size_t> split, Direction direction);

// Cosine similarity of the query's encoding against each candidate's.
std::vector<double> cosine_scores(const EncoderParams<float>& params, const EncodedString& query,
                                  std::span<const EncodedString> candidates);

struct DirectionMetrics {
  double recall1 = 0.0;
  double recall3 = 0.0;
  double recall10 = 0.0;
  double median_rank = 0.0;
  double mean_rank = 0.0;
  double harmonic_mean_rank = 0.0;
  std::array<double, kTopScores> top_score_means{};
};

DirectionMetrics summarize(const SplitEvaluation& eval);

struct DirectionReport {
  Direction direction = Direction::CleanToCorrupted;
  std::vector<DirectionMetrics> folds;
  DirectionMetrics mean;
  DirectionMetrics stddev;
  ThresholdAnalysis threshold;  // pooled over every fold's queries
};

struct FoldOutcome {
  std::size_t fold = 0;
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  double best_validation_recall1 = 0.0;
  std::vector<EpochRecord> curve;
  std::array<SplitEvaluation, 2> evaluations;  // clean->corrupted, corrupted->clean
};

struct RankingReport {
  ModelKind kind = ModelKind::CNN;
  std::vector<FoldOutcome> folds;
  std::array<DirectionReport, 2> directions;
};

RankingReport aggregate_report(ModelKind kind, std::vector<FoldOutcome> folds);

// Seed used for fold k when the master seed is `seed`.
std::uint64_t fold_seed(std::uint64_t seed, std::size_t fold);

struct CrossValidateOptions {
  std::size_t jobs = 1;
  std::size_t fold_count = kFoldCount;  // folds 0..fold_count-1 are trained
  std::function<void(std::size_t fold, const EpochRecord&)> on_epoch;
};

RankingReport cross_validate(ModelKind kind, const Dataset& dataset, const TrainConfig& config,
                             const CrossValidateOptions& options = {});

}  // namespace conflate

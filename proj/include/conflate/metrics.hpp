#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace conflate {

inline constexpr std::size_t kTopScores = 4;

// Percentage of ranks <= k.
double recall_at_k(std::span<const std::size_t> ranks, std::size_t k);

struct RankStatistics {
  double median = 0.0;
  double mean = 0.0;
  double harmonic_mean = 0.0;
};

RankStatistics rank_statistics(std::span<const std::size_t> ranks);

struct ThresholdAnalysis {
  std::array<double, kTopScores> means{};
  std::array<double, kTopScores> stddevs{};
  double threshold = 0.0;
};

// Midpoint between the mean best score and the mean runner-up score.
double suggest_threshold(double top1_mean, double top2_mean);

// Each entry holds one query's scores in rank order; only the first four are used.
ThresholdAnalysis threshold_analysis(std::span<const std::vector<double>> top_scores);

double mean_of(std::span<const double> xs);
// Sample standard deviation (n - 1); 0 for fewer than two values.
double sample_stddev(std::span<const double> xs);

}  // namespace conflate

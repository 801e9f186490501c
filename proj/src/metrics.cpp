#include "conflate/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace conflate {
namespace {

void check_ranks(std::span<const std::size_t> ranks, const char* who) {
  if (ranks.empty()) throw std::invalid_argument(std::string(who) + ": empty rank list");
  for (auto r : ranks) {
    if (r < 1) throw std::invalid_argument(std::string(who) + ": ranks are 1-based");
  }
}

}  // namespace

double recall_at_k(std::span<const std::size_t> ranks, std::size_t k) {
  check_ranks(ranks, "recall_at_k");
  const auto hits = std::count_if(ranks.begin(), ranks.end(), [k](std::size_t r) { return r <= k; });
  return 100.0 * static_cast<double>(hits) / static_cast<double>(ranks.size());
}

RankStatistics rank_statistics(std::span<const std::size_t> ranks) {
  check_ranks(ranks, "rank_statistics");
  std::vector<std::size_t> sorted(ranks.begin(), ranks.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  RankStatistics s;
  s.median = n % 2 == 1 ? static_cast<double>(sorted[n / 2])
                        : 0.5 * static_cast<double>(sorted[n / 2 - 1] + sorted[n / 2]);
  double sum = 0.0;
  double inv = 0.0;
  for (auto r : sorted) {
    sum += static_cast<double>(r);
    inv += 1.0 / static_cast<double>(r);
  }
  s.mean = sum / static_cast<double>(n);
  s.harmonic_mean = static_cast<double>(n) / inv;
  return s;
}

double suggest_threshold(double top1_mean, double top2_mean) { return (top1_mean + top2_mean) / 2.0; }

double mean_of(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

double sample_stddev(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double sq = 0.0;
  for (double x : xs) sq += (x - m) * (x - m);
  return std::sqrt(sq / static_cast<double>(xs.size() - 1));
}

ThresholdAnalysis threshold_analysis(std::span<const std::vector<double>> top_scores) {
  if (top_scores.empty()) throw std::invalid_argument("threshold_analysis: no score lists");
  std::array<std::vector<double>, kTopScores> columns;
  for (const auto& list : top_scores) {
    if (list.size() < kTopScores) {
      throw std::invalid_argument("threshold_analysis: candidate pool smaller than 4 (got " +
                                  std::to_string(list.size()) + " scores)");
    }
    for (std::size_t k = 0; k < kTopScores; ++k) columns[k].push_back(list[k]);
  }
  ThresholdAnalysis out;
  for (std::size_t k = 0; k < kTopScores; ++k) {
    out.means[k] = mean_of(columns[k]);
    out.stddevs[k] = sample_stddev(columns[k]);
  }
  out.threshold = suggest_threshold(out.means[0], out.means[1]);
  return out;
}

}  // namespace conflate

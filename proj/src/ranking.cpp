#include "conflate/ranking.hpp"

namespace conflate {

double posterior(std::span<const double> scores, std::size_t positive_index, double gamma) {
  if (scores.empty()) throw std::invalid_argument("posterior: empty score list");
  if (positive_index >= scores.size()) throw std::invalid_argument("posterior: positive index out of range");
  double top = gamma * scores[0];
  for (double s : scores) top = std::max(top, gamma * s);
  double sum = 0.0;
  for (double s : scores) sum += std::exp(gamma * s - top);
  return std::exp(gamma * scores[positive_index] - top) / sum;
}

std::vector<std::size_t> sample_negatives(std::size_t pool_size, std::size_t positive_index,
                                          std::size_t count, Rng& rng) {
  if (positive_index >= pool_size) throw std::invalid_argument("sample_negatives: positive index out of range");
  if (pool_size < count + 1) {
    throw std::invalid_argument("sample_negatives: pool of " + std::to_string(pool_size) +
                                " is too small for " + std::to_string(count) + " negatives");
  }
  // Partial Fisher-Yates over the pool with the positive removed.
  std::vector<std::size_t> pool(pool_size - 1);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = positive_index; i < pool.size(); ++i) pool[i] = i + 1;
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(count);
  return pool;
}

std::vector<std::size_t> sample_negatives(std::size_t pool_size, std::size_t positive_index,
                                          std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  return sample_negatives(pool_size, positive_index, count, rng);
}

std::vector<RankedCandidate> rank_by_score(std::span<const double> scores) {
  std::vector<RankedCandidate> out;
  out.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out.push_back({i, scores[i]});
  std::stable_sort(out.begin(), out.end(),
                   [](const RankedCandidate& a, const RankedCandidate& b) { return a.score > b.score; });
  return out;
}

std::size_t rank_of(std::span<const double> scores, std::size_t target) {
  if (target >= scores.size()) throw std::invalid_argument("rank_of: target out of range");
  const double s = scores[target];
  std::size_t rank = 1;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] > s || (scores[i] == s && i < target)) ++rank;
  }
  return rank;
}

}  // namespace conflate

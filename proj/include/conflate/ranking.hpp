#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "conflate/batch_encoder.hpp"
#include "conflate/rng.hpp"

namespace conflate {

class ZeroNormError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct RankingConfig {
  double gamma = 10.0;
  std::size_t num_negatives = 50;

  void validate() const {
    if (!(gamma > 0.0)) throw std::invalid_argument("RankingConfig: gamma must be > 0");
    if (num_negatives < 1) throw std::invalid_argument("RankingConfig: need at least one negative");
  }
};

template <typename T>
T cosine(std::span<const T> a, std::span<const T> b) {
  if (a.size() != b.size()) {
    throw DimensionError("cosine: vector lengths " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()) + " differ");
  }
  T dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == T(0) || nb == T(0)) throw ZeroNormError("cosine: zero-norm vector");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

// Softmax probability of the positive candidate at sharpness gamma.
double posterior(std::span<const double> scores, std::size_t positive_index, double gamma);

// J distinct indices in [0, pool_size) excluding positive_index, drawn uniformly
// without replacement.
std::vector<std::size_t> sample_negatives(std::size_t pool_size, std::size_t positive_index,
                                          std::size_t count, Rng& rng);
std::vector<std::size_t> sample_negatives(std::size_t pool_size, std::size_t positive_index,
                                          std::size_t count, std::uint64_t seed);

struct RankedCandidate {
  std::size_t index;
  double score;
};

// Descending cosine; equal scores keep ascending original index.
std::vector<RankedCandidate> rank_by_score(std::span<const double> scores);

// 1-based rank of `target` under the rank_by_score ordering.
std::size_t rank_of(std::span<const double> scores, std::size_t target);

template <typename T>
std::vector<RankedCandidate> rank_candidates(std::span<const T> query,
                                             std::span<const std::vector<T>> candidates) {
  if (candidates.empty()) throw std::invalid_argument("rank_candidates: empty candidate set");
  std::vector<double> scores;
  scores.reserve(candidates.size());
  for (const auto& c : candidates) scores.push_back(static_cast<double>(cosine<T>(query, c)));
  return rank_by_score(scores);
}

// Query with its candidate list, all referring to columns of an encoding matrix.
struct CandidateRefs {
  std::size_t query;
  std::vector<std::size_t> candidates;
  std::size_t positive;  // position within `candidates`
};

// Sum over queries of -log P(D+ | Q). When dY is given it receives
// d(loss)/dY (same shape as Y, overwritten).
template <typename T>
T ranking_loss(const Mat<T>& Y, std::span<const CandidateRefs> queries, T gamma, Mat<T>* dY) {
  const Eigen::Index n = Y.cols();
  Vec<T> norms = Y.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (norms[j] == T(0)) throw ZeroNormError("ranking_loss: zero-norm encoding in column " + std::to_string(j));
  }
  if (dY) dY->setZero(Y.rows(), n);
  T total = 0;
  std::vector<T> scores;
  std::vector<T> probs;
  for (const CandidateRefs& q : queries) {
    const std::size_t m = q.candidates.size();
    if (m == 0 || q.positive >= m) throw std::invalid_argument("ranking_loss: invalid candidate set");
    const auto qi = static_cast<Eigen::Index>(q.query);
    scores.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
      const auto dj = static_cast<Eigen::Index>(q.candidates[j]);
      scores[j] = Y.col(qi).dot(Y.col(dj)) / (norms[qi] * norms[dj]);
    }
    T top = gamma * scores[0];
    for (std::size_t j = 1; j < m; ++j) top = std::max(top, gamma * scores[j]);
    T sum = 0;
    probs.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
      probs[j] = std::exp(gamma * scores[j] - top);
      sum += probs[j];
    }
    total += -(gamma * scores[q.positive] - top - std::log(sum));
    if (!dY) continue;
    for (std::size_t j = 0; j < m; ++j) {
      const T dR = gamma * (probs[j] / sum - (j == q.positive ? T(1) : T(0)));
      if (dR == T(0)) continue;
      const auto dj = static_cast<Eigen::Index>(q.candidates[j]);
      const T inv = T(1) / (norms[qi] * norms[dj]);
      const T R = scores[j];
      dY->col(qi) += dR * (inv * Y.col(dj) - (R / (norms[qi] * norms[qi])) * Y.col(qi));
      dY->col(dj) += dR * (inv * Y.col(qi) - (R / (norms[dj] * norms[dj])) * Y.col(dj));
    }
  }
  return total;
}

template <typename T>
struct CandidateSet {
  std::vector<T> query;
  std::vector<std::vector<T>> candidates;
  std::size_t positive_index = 0;
};

template <typename T>
struct NllResult {
  T loss = 0;
  std::vector<std::vector<T>> d_query;                    // per set
  std::vector<std::vector<std::vector<T>>> d_candidates;  // per set, per candidate
};

template <typename T>
NllResult<T> nll_loss(std::span<const CandidateSet<T>> batch, T gamma) {
  if (batch.empty()) throw std::invalid_argument("nll_loss: empty batch");
  const std::size_t dim = batch.front().query.size();
  std::size_t columns = 0;
  for (const auto& set : batch) {
    if (set.positive_index >= set.candidates.size()) {
      throw std::invalid_argument("nll_loss: positive index out of range");
    }
    columns += 1 + set.candidates.size();
  }
  Mat<T> Y(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(columns));
  std::vector<CandidateRefs> refs;
  Eigen::Index col = 0;
  auto put = [&](const std::vector<T>& v) {
    if (v.size() != dim) throw DimensionError("nll_loss: inconsistent vector dimensions");
    Y.col(col) = Eigen::Map<const Vec<T>>(v.data(), static_cast<Eigen::Index>(dim));
    return static_cast<std::size_t>(col++);
  };
  for (const auto& set : batch) {
    CandidateRefs r{put(set.query), {}, set.positive_index};
    for (const auto& c : set.candidates) r.candidates.push_back(put(c));
    refs.push_back(std::move(r));
  }
  Mat<T> dY;
  NllResult<T> out;
  out.loss = ranking_loss<T>(Y, refs, gamma, &dY);
  auto take = [&](std::size_t c) {
    std::vector<T> v(dim);
    Eigen::Map<Vec<T>>(v.data(), static_cast<Eigen::Index>(dim)) = dY.col(static_cast<Eigen::Index>(c));
    return v;
  };
  for (const auto& r : refs) {
    out.d_query.push_back(take(r.query));
    std::vector<std::vector<T>> dc;
    for (auto c : r.candidates) dc.push_back(take(c));
    out.d_candidates.push_back(std::move(dc));
  }
  return out;
}

}  // namespace conflate

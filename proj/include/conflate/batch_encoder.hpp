#pragma once

// Batched forward/backward passes for the three encoders.
//
// Every character enters a layer through x_t = W_e q_t, so the product of the
// first affine map with W_e is folded into a per-batch lookup table
// (W W_e for LSTM gates, W_c,k W_e for each CNN window offset k). Table
// gradients are pushed back to W and W_e at the end of the backward pass.

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "conflate/encoder_params.hpp"
#include "conflate/encoders.hpp"
#include "conflate/tensor.hpp"
#include "conflate/vocabulary.hpp"

namespace conflate {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

using Sequence = std::vector<std::uint8_t>;

namespace detail {

template <typename T>
auto column_of(const Tensor2<T>& b) {
  return Eigen::Map<const Vec<T>>(b.data(), static_cast<Eigen::Index>(b.rows()));
}

template <typename T>
auto column_of(Tensor2<T>& b) {
  return Eigen::Map<Vec<T>>(b.data(), static_cast<Eigen::Index>(b.rows()));
}

template <typename Derived>
auto logistic(const Eigen::ArrayBase<Derived>& x) {
  using T = typename Derived::Scalar;
  return T(1) / (T(1) + (-x).exp());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Dense tanh layer: Y = tanh(W X + b), one column per example.

template <typename T>
Mat<T> dense_tanh_forward(const Tensor2<T>& W, const Tensor2<T>& b, const Mat<T>& X) {
  if (W.cols() != static_cast<std::size_t>(X.rows()) || b.rows() != W.rows()) {
    throw DimensionError("dense_tanh_forward: W" + W.shape() + " b" + b.shape() + " input rows " +
                         std::to_string(X.rows()));
  }
  Mat<T> A = W.map() * X;
  A.colwise() += detail::column_of(b);
  return A.array().tanh().matrix();
}

// Accumulates into W.grad and b.grad; returns dX when requested.
template <typename T>
Mat<T> dense_tanh_backward(Dual<T>& W, Dual<T>& b, const Mat<T>& X, const Mat<T>& Y,
                           const Mat<T>& dY, bool want_input_grad) {
  const Mat<T> dA = (dY.array() * (T(1) - Y.array().square())).matrix();
  W.grad.map().noalias() += dA * X.transpose();
  detail::column_of(b.grad) += dA.rowwise().sum();
  if (!want_input_grad) return {};
  return W.value.map().transpose() * dA;
}

// ---------------------------------------------------------------------------
// One LSTM direction over a batch of sequences; returns the final hidden
// state of every sequence (H x n, input order).

template <typename T>
struct LstmDirectionCache {
  std::vector<std::size_t> order;      // sorted slot -> input column
  std::vector<std::size_t> lengths;    // per sorted slot, descending
  std::vector<const Sequence*> seqs;   // per sorted slot
  bool reversed = false;
  std::vector<Mat<T>> gates;    // per step: activated i,f,o,g for active slots
  std::vector<Mat<T>> cells;    // per step: c_t
  std::vector<Mat<T>> hiddens;  // per step: h_t

  std::uint8_t symbol(std::size_t slot, std::size_t t) const {
    const Sequence& s = *seqs[slot];
    return reversed ? s[lengths[slot] - 1 - t] : s[t];
  }
};

template <typename T>
Mat<T> lstm_direction_forward(const Tensor2<T>& We, const Tensor2<T>& W, const Tensor2<T>& U,
                              const Tensor2<T>& b, std::span<const Sequence* const> seqs,
                              bool reversed, LstmDirectionCache<T>* cache) {
  const auto H = static_cast<Eigen::Index>(U.cols());
  if (U.rows() != 4 * U.cols() || W.rows() != U.rows() || W.cols() != We.rows() ||
      b.rows() != U.rows()) {
    throw DimensionError("lstm_direction_forward: W_e" + We.shape() + " W" + W.shape() + " U" +
                         U.shape() + " b" + b.shape());
  }
  const std::size_t n = seqs.size();
  LstmDirectionCache<T> local;
  LstmDirectionCache<T>& c = cache ? *cache : local;
  c = LstmDirectionCache<T>{};
  c.reversed = reversed;
  c.order.resize(n);
  std::iota(c.order.begin(), c.order.end(), std::size_t{0});
  std::stable_sort(c.order.begin(), c.order.end(),
                   [&](std::size_t a, std::size_t b2) { return seqs[a]->size() > seqs[b2]->size(); });
  for (std::size_t j = 0; j < n; ++j) {
    if (seqs[c.order[j]]->empty()) throw std::invalid_argument("lstm_direction_forward: empty sequence");
    c.seqs.push_back(seqs[c.order[j]]);
    c.lengths.push_back(seqs[c.order[j]]->size());
  }

  Mat<T> out(H, static_cast<Eigen::Index>(n));
  if (n == 0) return out;

  const Mat<T> table = W.map() * We.map();  // 4H x V
  const auto bias = detail::column_of(b);
  Mat<T> Hs = Mat<T>::Zero(H, static_cast<Eigen::Index>(n));
  Mat<T> Cs = Mat<T>::Zero(H, static_cast<Eigen::Index>(n));
  Mat<T> G(4 * H, static_cast<Eigen::Index>(n));
  const std::size_t t_max = c.lengths.front();
  std::size_t active = n;
  for (std::size_t t = 0; t < t_max; ++t) {
    while (active > 0 && c.lengths[active - 1] <= t) --active;
    const auto nt = static_cast<Eigen::Index>(active);
    auto Gt = G.leftCols(nt);
    if (t == 0) {
      Gt.setZero();
    } else {
      Gt.noalias() = U.map() * Hs.leftCols(nt);
    }
    for (Eigen::Index j = 0; j < nt; ++j) {
      Gt.col(j) += table.col(c.symbol(static_cast<std::size_t>(j), t)) + bias;
    }
    Gt.topRows(3 * H).array() = detail::logistic(Gt.topRows(3 * H).array());
    Gt.bottomRows(H).array() = Gt.bottomRows(H).array().tanh();
    Cs.leftCols(nt).array() = Gt.middleRows(H, H).array() * Cs.leftCols(nt).array() +
                              Gt.topRows(H).array() * Gt.bottomRows(H).array();
    Hs.leftCols(nt).array() = Gt.middleRows(2 * H, H).array() * Cs.leftCols(nt).array().tanh();
    for (Eigen::Index j = 0; j < nt; ++j) {
      if (c.lengths[static_cast<std::size_t>(j)] == t + 1) {
        out.col(static_cast<Eigen::Index>(c.order[static_cast<std::size_t>(j)])) = Hs.col(j);
      }
    }
    if (cache) {
      c.gates.emplace_back(Gt);
      c.cells.emplace_back(Cs.leftCols(nt));
      c.hiddens.emplace_back(Hs.leftCols(nt));
    }
  }
  return out;
}

template <typename T>
void lstm_direction_backward(Dual<T>& We, Dual<T>& W, Dual<T>& U, Dual<T>& b,
                             const LstmDirectionCache<T>& c, const Mat<T>& dY) {
  const auto H = static_cast<Eigen::Index>(U.value.cols());
  const std::size_t n = c.order.size();
  if (n == 0) return;
  if (c.gates.empty()) throw std::logic_error("lstm_direction_backward: forward cache missing");
  Mat<T> dTable = Mat<T>::Zero(4 * H, static_cast<Eigen::Index>(Vocabulary::kSize));
  Mat<T> dU = Mat<T>::Zero(4 * H, H);
  Vec<T> db = Vec<T>::Zero(4 * H);
  Mat<T> dH = Mat<T>::Zero(H, static_cast<Eigen::Index>(n));
  Mat<T> dC = Mat<T>::Zero(H, static_cast<Eigen::Index>(n));
  Mat<T> dA(4 * H, static_cast<Eigen::Index>(n));

  for (std::size_t t = c.gates.size(); t-- > 0;) {
    const Mat<T>& Gt = c.gates[t];
    const Eigen::Index nt = Gt.cols();
    for (Eigen::Index j = 0; j < nt; ++j) {
      if (c.lengths[static_cast<std::size_t>(j)] == t + 1) {
        dH.col(j) += dY.col(static_cast<Eigen::Index>(c.order[static_cast<std::size_t>(j)]));
      }
    }
    const auto i = Gt.topRows(H).array();
    const auto f = Gt.middleRows(H, H).array();
    const auto o = Gt.middleRows(2 * H, H).array();
    const auto g = Gt.bottomRows(H).array();
    const auto tc = c.cells[t].array().tanh().eval();
    auto dh = dH.leftCols(nt).array();
    auto dc = dC.leftCols(nt).array();
    dc += dh * o * (T(1) - tc.square());
    auto dAt = dA.leftCols(nt);
    dAt.topRows(H).array() = dc * g * i * (T(1) - i);
    if (t > 0) {
      dAt.middleRows(H, H).array() = dc * c.cells[t - 1].leftCols(nt).array() * f * (T(1) - f);
    } else {
      dAt.middleRows(H, H).setZero();
    }
    dAt.middleRows(2 * H, H).array() = dh * tc * o * (T(1) - o);
    dAt.bottomRows(H).array() = dc * i * (T(1) - g.square());

    db += dAt.rowwise().sum();
    for (Eigen::Index j = 0; j < nt; ++j) {
      dTable.col(c.symbol(static_cast<std::size_t>(j), t)) += dAt.col(j);
    }
    dc *= f;
    if (t > 0) {
      dU.noalias() += dAt * c.hiddens[t - 1].leftCols(nt).transpose();
      dH.leftCols(nt).noalias() = U.value.map().transpose() * dAt;
    }
  }
  U.grad.map() += dU;
  detail::column_of(b.grad) += db;
  W.grad.map().noalias() += dTable * We.value.map().transpose();
  We.grad.map().noalias() += W.value.map().transpose() * dTable;
}

// ---------------------------------------------------------------------------
// One CNN window width: tanh convolution followed by max-over-time pooling.

template <typename T>
struct ConvPoolCache {
  int window = 0;
  std::vector<Sequence> seqs;          // padded
  Mat<T> output;                       // F x n pooled values
  std::vector<std::uint32_t> argmax;   // F x n, column-major, winning position
};

template <typename T>
Mat<T> conv_pool_forward(const Tensor2<T>& We, const Tensor2<T>& Wc, const Tensor2<T>& bc,
                         int window, std::span<const Sequence* const> seqs,
                         ConvPoolCache<T>* cache) {
  if (!is_cnn_window(window)) {
    throw std::invalid_argument("conv_pool_forward: window " + std::to_string(window) +
                                " is not one of {2,3,4}");
  }
  const auto w = static_cast<Eigen::Index>(window);
  const auto E = static_cast<Eigen::Index>(We.rows());
  const auto F = static_cast<Eigen::Index>(Wc.rows());
  const auto V = static_cast<Eigen::Index>(Vocabulary::kSize);
  if (static_cast<Eigen::Index>(Wc.cols()) != w * E || bc.rows() != Wc.rows()) {
    throw DimensionError("conv_pool_forward: W_c" + Wc.shape() + " b_c" + bc.shape() +
                         " for window " + std::to_string(window) + " and embedding " +
                         std::to_string(E));
  }
  const std::size_t n = seqs.size();
  Mat<T> tables(F, w * V);
  for (Eigen::Index k = 0; k < w; ++k) {
    tables.middleCols(k * V, V).noalias() = Wc.map().middleCols(k * E, E) * We.map();
  }
  const auto bias = detail::column_of(bc);
  Mat<T> out(F, static_cast<Eigen::Index>(n));
  std::vector<std::uint32_t> argmax(static_cast<std::size_t>(F) * n, 0);
  Vec<T> pre(F);
  std::vector<Sequence> padded;
  padded.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    padded.push_back(pad_for_cnn(*seqs[s]));
    const Sequence& seq = padded.back();
    auto best = out.col(static_cast<Eigen::Index>(s));
    std::uint32_t* best_pos = argmax.data() + s * static_cast<std::size_t>(F);
    const std::size_t positions = seq.size() - static_cast<std::size_t>(w) + 1;
    for (std::size_t t = 0; t < positions; ++t) {
      pre = bias;
      for (Eigen::Index k = 0; k < w; ++k) pre += tables.col(k * V + seq[t + static_cast<std::size_t>(k)]);
      pre = pre.array().tanh().matrix();
      if (t == 0) {
        best = pre;
        continue;
      }
      for (Eigen::Index m = 0; m < F; ++m) {
        if (pre[m] > best[m]) {
          best[m] = pre[m];
          best_pos[m] = static_cast<std::uint32_t>(t);
        }
      }
    }
  }
  if (cache) {
    cache->window = window;
    cache->seqs = std::move(padded);
    cache->output = out;
    cache->argmax = std::move(argmax);
  }
  return out;
}

template <typename T>
void conv_pool_backward(Dual<T>& We, Dual<T>& Wc, Dual<T>& bc, const ConvPoolCache<T>& c,
                        const Mat<T>& dY) {
  const auto w = static_cast<Eigen::Index>(c.window);
  const auto E = static_cast<Eigen::Index>(We.value.rows());
  const auto F = static_cast<Eigen::Index>(Wc.value.rows());
  const auto V = static_cast<Eigen::Index>(Vocabulary::kSize);
  const Mat<T> dPre = (dY.array() * (T(1) - c.output.array().square())).matrix();
  detail::column_of(bc.grad) += dPre.rowwise().sum();
  Mat<T> dTables = Mat<T>::Zero(F, w * V);
  for (std::size_t s = 0; s < c.seqs.size(); ++s) {
    const Sequence& seq = c.seqs[s];
    const std::uint32_t* pos = c.argmax.data() + s * static_cast<std::size_t>(F);
    for (Eigen::Index m = 0; m < F; ++m) {
      const T g = dPre(m, static_cast<Eigen::Index>(s));
      for (Eigen::Index k = 0; k < w; ++k) {
        dTables(m, k * V + seq[pos[m] + static_cast<std::size_t>(k)]) += g;
      }
    }
  }
  for (Eigen::Index k = 0; k < w; ++k) {
    const auto dTk = dTables.middleCols(k * V, V);
    Wc.grad.map().middleCols(k * E, E).noalias() += dTk * We.value.map().transpose();
    We.grad.map().noalias() += Wc.value.map().middleCols(k * E, E).transpose() * dTk;
  }
}

// ---------------------------------------------------------------------------
// Whole-encoder batch API.

template <typename T>
struct EncodeCache {
  ModelKind kind = ModelKind::CNN;
  Mat<T> counts;
  Mat<T> hidden;
  Mat<T> output;
  LstmDirectionCache<T> forward_dir;
  LstmDirectionCache<T> backward_dir;
  std::array<ConvPoolCache<T>, 3> conv;
};

template <typename T>
Mat<T> boc_count_matrix(std::span<const Sequence* const> seqs) {
  Mat<T> counts = Mat<T>::Zero(static_cast<Eigen::Index>(Vocabulary::kSize),
                               static_cast<Eigen::Index>(seqs.size()));
  for (std::size_t s = 0; s < seqs.size(); ++s) {
    for (auto q : *seqs[s]) counts(q, static_cast<Eigen::Index>(s)) += T(1);
  }
  return counts;
}

// Returns the (output_dim x n) encodings. With a cache, enough state is kept
// for encode_batch_backward; the sequences must outlive the cache.
template <typename T>
Mat<T> encode_batch(const EncoderParams<T>& p, std::span<const Sequence* const> seqs,
                    EncodeCache<T>* cache = nullptr) {
  for (const Sequence* s : seqs) {
    if (s->empty()) throw std::invalid_argument("encode_batch: empty string");
  }
  switch (p.kind()) {
    case ModelKind::BoC: {
      Mat<T> counts = boc_count_matrix<T>(seqs);
      Mat<T> h1 = dense_tanh_forward(p.value(slot::kBocW1), p.value(slot::kBocB1), counts);
      Mat<T> y = dense_tanh_forward(p.value(slot::kBocW2), p.value(slot::kBocB2), h1);
      if (cache) {
        cache->kind = ModelKind::BoC;
        cache->counts = std::move(counts);
        cache->hidden = std::move(h1);
        cache->output = y;
      }
      return y;
    }
    case ModelKind::LSTM: {
      const auto H = static_cast<Eigen::Index>(p.dims().lstm_hidden);
      Mat<T> y(2 * H, static_cast<Eigen::Index>(seqs.size()));
      const Tensor2<T>& We = p.value(slot::kLstmEmbed);
      y.topRows(H) = lstm_direction_forward(We, p.value(slot::kLstmFwdW), p.value(slot::kLstmFwdU),
                                            p.value(slot::kLstmFwdB), seqs, false,
                                            cache ? &cache->forward_dir : nullptr);
      y.bottomRows(H) = lstm_direction_forward(We, p.value(slot::kLstmBwdW), p.value(slot::kLstmBwdU),
                                               p.value(slot::kLstmBwdB), seqs, true,
                                               cache ? &cache->backward_dir : nullptr);
      if (cache) cache->kind = ModelKind::LSTM;
      return y;
    }
    case ModelKind::CNN: {
      const auto F = static_cast<Eigen::Index>(p.dims().feature_maps);
      Mat<T> y(3 * F, static_cast<Eigen::Index>(seqs.size()));
      for (std::size_t k = 0; k < 3; ++k) {
        const std::size_t ws = slot::kCnnW2 + 2 * k;
        y.middleRows(static_cast<Eigen::Index>(k) * F, F) =
            conv_pool_forward(p.value(slot::kCnnEmbed), p.value(ws), p.value(ws + 1), kCnnWindows[k],
                              seqs, cache ? &cache->conv[k] : nullptr);
      }
      if (cache) cache->kind = ModelKind::CNN;
      return y;
    }
  }
  throw std::logic_error("encode_batch: unknown model kind");
}

template <typename T>
Mat<T> encode_batch(const EncoderParams<T>& p, std::span<const EncodedString> strings) {
  std::vector<const Sequence*> seqs;
  seqs.reserve(strings.size());
  for (const auto& s : strings) seqs.push_back(&s.indices);
  return encode_batch<T>(p, seqs, nullptr);
}

// Adds d(loss)/d(params) into the params' gradient slots given d(loss)/dY.
template <typename T>
void encode_batch_backward(EncoderParams<T>& p, const EncodeCache<T>& cache, const Mat<T>& dY) {
  if (cache.kind != p.kind()) throw std::logic_error("encode_batch_backward: cache kind mismatch");
  switch (p.kind()) {
    case ModelKind::BoC: {
      const Mat<T> dH = dense_tanh_backward(p[slot::kBocW2], p[slot::kBocB2], cache.hidden,
                                            cache.output, dY, true);
      dense_tanh_backward(p[slot::kBocW1], p[slot::kBocB1], cache.counts, cache.hidden, dH, false);
      return;
    }
    case ModelKind::LSTM: {
      const auto H = static_cast<Eigen::Index>(p.dims().lstm_hidden);
      lstm_direction_backward(p[slot::kLstmEmbed], p[slot::kLstmFwdW], p[slot::kLstmFwdU],
                              p[slot::kLstmFwdB], cache.forward_dir, Mat<T>(dY.topRows(H)));
      lstm_direction_backward(p[slot::kLstmEmbed], p[slot::kLstmBwdW], p[slot::kLstmBwdU],
                              p[slot::kLstmBwdB], cache.backward_dir, Mat<T>(dY.bottomRows(H)));
      return;
    }
    case ModelKind::CNN: {
      const auto F = static_cast<Eigen::Index>(p.dims().feature_maps);
      for (std::size_t k = 0; k < 3; ++k) {
        const std::size_t ws = slot::kCnnW2 + 2 * k;
        conv_pool_backward(p[slot::kCnnEmbed], p[ws], p[ws + 1], cache.conv[k],
                           Mat<T>(dY.middleRows(static_cast<Eigen::Index>(k) * F, F)));
      }
      return;
    }
  }
}

}  // namespace conflate

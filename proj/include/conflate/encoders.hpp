#pragma once

// Per-string encoders composed from the tensor_core primitives. These are the
// readable reference path; training and bulk evaluation go through
// batch_encoder.hpp, which is tested against these.

#include <algorithm>
#include <span>
#include <stdexcept>
#include <vector>

#include "conflate/encoder_params.hpp"
#include "conflate/tensor.hpp"
#include "conflate/vocabulary.hpp"

namespace conflate {

inline constexpr std::size_t kCnnMinLength = 4;

// Right-pads with spaces so the widest CNN window fits.
inline std::vector<std::uint8_t> pad_for_cnn(const std::vector<std::uint8_t>& indices) {
  std::vector<std::uint8_t> out = indices;
  while (out.size() < kCnnMinLength) out.push_back(Vocabulary::kSpace);
  return out;
}

template <typename T>
std::vector<T> boc_counts(const EncodedString& s) {
  std::vector<T> counts(Vocabulary::kSize, T(0));
  for (auto i : s.indices) counts[i] += T(1);
  return counts;
}

// x_t = W_e q_t, i.e. column q_t of the embedding matrix.
template <typename T>
std::vector<std::vector<T>> embed_chars(const EncoderParams<T>& params, const EncodedString& s) {
  if (params.kind() == ModelKind::BoC) {
    throw std::invalid_argument("embed_chars: BoC models have no character embedding");
  }
  const Tensor2<T>& We = params.value(0);  // slot 0 is the embedding for LSTM and CNN
  std::vector<std::vector<T>> out;
  out.reserve(s.length());
  for (auto q : s.indices) {
    std::vector<T> x(We.rows());
    for (std::size_t r = 0; r < We.rows(); ++r) x[r] = We(r, q);
    out.push_back(std::move(x));
  }
  return out;
}

template <typename T>
std::vector<T> encode_boc(const EncoderParams<T>& params, const EncodedString& s) {
  if (params.kind() != ModelKind::BoC) throw std::invalid_argument("encode_boc: wrong model kind");
  const auto counts = boc_counts<T>(s);
  auto layer = [](const Tensor2<T>& W, const Tensor2<T>& b, const std::vector<T>& x) {
    Tensor2<T> pre = matmul(W, Tensor2<T>::column(x));
    for (std::size_t r = 0; r < pre.rows(); ++r) pre[r] += b[r];
    const Tensor2<T> act = tanh_map(pre);
    return std::vector<T>(act.flat().begin(), act.flat().end());
  };
  const auto h1 = layer(params.value(slot::kBocW1), params.value(slot::kBocB1), counts);
  return layer(params.value(slot::kBocW2), params.value(slot::kBocB2), h1);
}

template <typename T>
std::vector<T> lstm_final_state(const LstmCellView<T>& cell, const std::vector<std::vector<T>>& xs) {
  std::vector<T> h(cell.hidden(), T(0));
  std::vector<T> c(cell.hidden(), T(0));
  for (const auto& x : xs) {
    auto step = lstm_cell_step<T>(cell, x, h, c);
    h = std::move(step.h);
    c = std::move(step.c);
  }
  return h;
}

// Forward final state concatenated with the final state of the reversed pass.
template <typename T>
std::vector<T> encode_lstm(const EncoderParams<T>& params, const EncodedString& s) {
  if (params.kind() != ModelKind::LSTM) throw std::invalid_argument("encode_lstm: wrong model kind");
  auto xs = embed_chars(params, s);
  const LstmCellView<T> fwd{params.value(slot::kLstmFwdW), params.value(slot::kLstmFwdU),
                            params.value(slot::kLstmFwdB)};
  const LstmCellView<T> bwd{params.value(slot::kLstmBwdW), params.value(slot::kLstmBwdU),
                            params.value(slot::kLstmBwdB)};
  std::vector<T> out = lstm_final_state(fwd, xs);
  std::reverse(xs.begin(), xs.end());
  const std::vector<T> back = lstm_final_state(bwd, xs);
  out.insert(out.end(), back.begin(), back.end());
  return out;
}

template <typename T>
std::vector<T> encode_cnn(const EncoderParams<T>& params, const EncodedString& s) {
  if (params.kind() != ModelKind::CNN) throw std::invalid_argument("encode_cnn: wrong model kind");
  EncodedString padded{pad_for_cnn(s.indices), s.original};
  const auto xs = embed_chars(params, padded);
  const std::size_t T_len = xs.size();
  std::vector<T> out;
  out.reserve(params.output_dim());
  for (int c : kCnnWindows) {
    const std::size_t w = static_cast<std::size_t>(c);
    const std::size_t filter_slot = slot::kCnnW2 + 2 * (w - 2);
    const Tensor2<T>& W = params.value(filter_slot);
    const Tensor2<T>& b = params.value(filter_slot + 1);
    std::vector<std::vector<T>> fmap;
    for (std::size_t t = 0; t + w <= T_len; ++t) {
      std::vector<T> window;
      for (std::size_t k = 0; k < w; ++k) window.insert(window.end(), xs[t + k].begin(), xs[t + k].end());
      fmap.push_back(conv1d_tanh<T>(W, b, window, c));
    }
    const auto pooled = max_over_time<T>(fmap);
    out.insert(out.end(), pooled.value.begin(), pooled.value.end());
  }
  return out;
}

template <typename T>
std::vector<T> encode(const EncoderParams<T>& params, const EncodedString& s) {
  switch (params.kind()) {
    case ModelKind::BoC: return encode_boc(params, s);
    case ModelKind::LSTM: return encode_lstm(params, s);
    case ModelKind::CNN: return encode_cnn(params, s);
  }
  throw std::logic_error("encode: unknown model kind");
}

}  // namespace conflate

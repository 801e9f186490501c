#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <Eigen/QR>

#include "conflate/encoder_params.hpp"
#include "conflate/rng.hpp"
#include "conflate/tensor.hpp"

namespace conflate {

struct InitConfig {
  double uniform_range = 0.01;
  double forget_bias = 3.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(uniform_range > 0.0)) throw std::invalid_argument("InitConfig: uniform_range must be > 0");
  }
};

// Square orthogonal matrix: Q of a QR decomposition of a standard-normal
// matrix, with column signs chosen so that R has a positive diagonal.
inline Eigen::MatrixXd random_orthogonal(std::size_t n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd A(n, n);
  for (Eigen::Index c = 0; c < A.cols(); ++c) {
    for (Eigen::Index r = 0; r < A.rows(); ++r) A(r, c) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  Eigen::MatrixXd Q = qr.householderQ();
  const Eigen::MatrixXd R = qr.matrixQR().template triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < Q.cols(); ++k) {
    if (R(k, k) < 0.0) Q.col(k) *= -1.0;
  }
  return Q;
}

template <typename T>
void fill_uniform(Tensor2<T>& t, double range, Rng& rng) {
  std::uniform_real_distribution<double> dist(-range, range);
  for (auto& v : t.flat()) v = static_cast<T>(dist(rng));
}

template <typename T>
EncoderParams<T> init_params(ModelKind kind, const EncoderDims& dims, const InitConfig& config,
                             Rng& rng) {
  config.validate();
  EncoderParams<T> p(kind, dims);
  const double r = config.uniform_range;
  switch (kind) {
    case ModelKind::BoC:
      fill_uniform(p[slot::kBocW1].value, r, rng);
      fill_uniform(p[slot::kBocW2].value, r, rng);
      break;
    case ModelKind::LSTM: {
      const std::size_t H = dims.lstm_hidden;
      fill_uniform(p[slot::kLstmEmbed].value, r, rng);
      for (std::size_t base : {std::size_t{slot::kLstmFwdW}, std::size_t{slot::kLstmBwdW}}) {
        fill_uniform(p[base].value, r, rng);
        Tensor2<T>& U = p[base + 1].value;
        for (std::size_t gate = 0; gate < 4; ++gate) {
          const Eigen::MatrixXd Q = random_orthogonal(H, rng);
          for (std::size_t i = 0; i < H; ++i) {
            for (std::size_t j = 0; j < H; ++j) {
              U(gate * H + i, j) = static_cast<T>(Q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            }
          }
        }
        Tensor2<T>& b = p[base + 2].value;
        for (std::size_t i = 0; i < H; ++i) b(H + i, 0) = static_cast<T>(config.forget_bias);
      }
      break;
    }
    case ModelKind::CNN:
      fill_uniform(p[slot::kCnnEmbed].value, r, rng);
      fill_uniform(p[slot::kCnnW2].value, r, rng);
      fill_uniform(p[slot::kCnnW3].value, r, rng);
      fill_uniform(p[slot::kCnnW4].value, r, rng);
      break;
  }
  return p;
}

template <typename T>
EncoderParams<T> init_params(ModelKind kind, const EncoderDims& dims, const InitConfig& config) {
  Rng rng(config.seed);
  return init_params<T>(kind, dims, config, rng);
}

template <typename T>
double global_grad_norm(std::span<Dual<T>* const> params) {
  double sq = 0.0;
  for (const Dual<T>* p : params) {
    for (T g : p->grad.flat()) sq += static_cast<double>(g) * static_cast<double>(g);
  }
  return std::sqrt(sq);
}

// Rescales all gradients jointly when their global L2 norm exceeds max_norm.
// Returns the applied scale (1 when no clipping happened).
template <typename T>
double clip_gradients(std::span<Dual<T>* const> params, double max_norm) {
  if (!(max_norm > 0.0)) throw std::invalid_argument("clip_gradients: max_norm must be > 0");
  const double norm = global_grad_norm<T>(params);
  if (!std::isfinite(norm)) throw std::runtime_error("clip_gradients: non-finite gradient");
  if (norm <= max_norm) return 1.0;
  const double scale = max_norm / norm;
  for (Dual<T>* p : params) {
    for (T& g : p->grad.flat()) g = static_cast<T>(static_cast<double>(g) * scale);
  }
  return scale;
}

struct AdamConfig {
  double learning_rate = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename T>
class AdamState {
 public:
  AdamState() = default;
  AdamState(std::span<Dual<T>* const> params, AdamConfig config) : config_(config) {
    for (const Dual<T>* p : params) {
      m_.emplace_back(p->value.rows(), p->value.cols());
      v_.emplace_back(p->value.rows(), p->value.cols());
    }
  }

  const AdamConfig& config() const { return config_; }
  std::uint64_t step_count() const { return t_; }
  const std::vector<Tensor2<T>>& first_moment() const { return m_; }
  const std::vector<Tensor2<T>>& second_moment() const { return v_; }

  // Adam with bias correction; gradients are zeroed afterwards.
  void step(std::span<Dual<T>* const> params) {
    if (params.size() != m_.size()) throw DimensionError("adam_step: parameter count changed");
    ++t_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    const T b1 = static_cast<T>(config_.beta1);
    const T b2 = static_cast<T>(config_.beta2);
    const T lr = static_cast<T>(config_.learning_rate);
    const T eps = static_cast<T>(config_.epsilon);
    const T inv_c1 = static_cast<T>(1.0 / c1);
    const T inv_c2 = static_cast<T>(1.0 / c2);
    for (std::size_t k = 0; k < params.size(); ++k) {
      Dual<T>& p = *params[k];
      if (!p.value.same_shape(m_[k])) {
        throw DimensionError("adam_step: shape mismatch for parameter " + std::to_string(k));
      }
      auto theta = p.value.flat();
      auto grad = p.grad.flat();
      auto m = m_[k].flat();
      auto v = v_[k].flat();
      for (std::size_t i = 0; i < theta.size(); ++i) {
        const T g = grad[i];
        m[i] = b1 * m[i] + (T(1) - b1) * g;
        v[i] = b2 * v[i] + (T(1) - b2) * g * g;
        const T m_hat = m[i] * inv_c1;
        const T v_hat = v[i] * inv_c2;
        theta[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
        grad[i] = T(0);
      }
    }
  }

 private:
  AdamConfig config_;
  std::vector<Tensor2<T>> m_;
  std::vector<Tensor2<T>> v_;
  std::uint64_t t_ = 0;
};

template <typename T>
void adam_step(std::span<Dual<T>* const> params, AdamState<T>& state) {
  state.step(params);
}

}  // namespace conflate

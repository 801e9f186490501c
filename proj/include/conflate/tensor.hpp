#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace conflate {

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Dense row-major matrix. Column vectors are (n x 1).
// Storage is over-aligned so Eigen's vectorised kernels take the same code
// path on every run, which keeps training bit-reproducible.
template <typename T>
using AlignedVector = std::vector<T, Eigen::aligned_allocator<T>>;

template <typename T>
class Tensor2 {
 public:
  using value_type = T;
  using RowMajorMap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
  using ConstRowMajorMap =
      Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

  Tensor2() = default;
  Tensor2(std::size_t rows, std::size_t cols, T fill = T(0))
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Tensor2(std::size_t rows, std::size_t cols, const std::vector<T>& data)
      : rows_(rows), cols_(cols), data_(data.begin(), data.end()) {
    if (data_.size() != rows_ * cols_) {
      throw DimensionError("Tensor2: data length " + std::to_string(data_.size()) +
                           " does not match shape " + shape_string(rows_, cols_));
    }
  }
  Tensor2(std::initializer_list<std::initializer_list<T>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw DimensionError("Tensor2: ragged initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Tensor2 column(std::span<const T> v) {
    return Tensor2(v.size(), 1, std::vector<T>(v.begin(), v.end()));
  }
  static Tensor2 identity(std::size_t n) {
    Tensor2 out(n, n);
    for (std::size_t i = 0; i < n; ++i) out(i, i) = T(1);
    return out;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool same_shape(const Tensor2& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
  std::string shape() const { return shape_string(rows_, cols_); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> flat() { return data_; }
  std::span<const T> flat() const { return data_; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  RowMajorMap map() { return RowMajorMap(data_.data(), rows_, cols_); }
  ConstRowMajorMap map() const { return ConstRowMajorMap(data_.data(), rows_, cols_); }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  template <typename U>
  Tensor2<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return Tensor2<U>(rows_, cols_, std::move(out));
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
  }

  friend bool operator==(const Tensor2& a, const Tensor2& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

  static std::string shape_string(std::size_t r, std::size_t c) {
    return "(" + std::to_string(r) + "x" + std::to_string(c) + ")";
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  AlignedVector<T> data_;
};

// A parameter with its gradient accumulator.
template <typename T>
struct Dual {
  Tensor2<T> value;
  Tensor2<T> grad;

  Dual() = default;
  explicit Dual(Tensor2<T> v) : value(std::move(v)), grad(value.rows(), value.cols()) {}
  Dual(std::size_t rows, std::size_t cols) : value(rows, cols), grad(rows, cols) {}

  void zero_grad() { grad.fill(T(0)); }
};

template <typename T>
Tensor2<T> matmul(const Tensor2<T>& a, const Tensor2<T>& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: incompatible shapes " + a.shape() + " and " + b.shape());
  }
  Tensor2<T> out(a.rows(), b.cols());
  if (a.rows() && b.cols()) out.map().noalias() = a.map() * b.map();
  return out;
}

template <typename T>
T sigmoid(T x) {
  // Split on sign so exp never overflows.
  if (x >= T(0)) {
    const T z = std::exp(-x);
    return T(1) / (T(1) + z);
  }
  const T z = std::exp(x);
  return z / (T(1) + z);
}

template <typename T>
Tensor2<T> sigmoid(const Tensor2<T>& x) {
  Tensor2<T> out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = sigmoid(x[i]);
  return out;
}

template <typename T>
Tensor2<T> tanh_map(const Tensor2<T>& x) {
  Tensor2<T> out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::tanh(x[i]);
  return out;
}

// Parameters of one LSTM cell, gates stacked in row blocks ordered i, f, o, c:
//   W: (4H x E), U: (4H x H), b: (4H x 1).
template <typename T>
struct LstmCellView {
  const Tensor2<T>& W;
  const Tensor2<T>& U;
  const Tensor2<T>& b;

  std::size_t hidden() const { return U.cols(); }
  std::size_t input() const { return W.cols(); }
};

template <typename T>
struct LstmStep {
  std::vector<T> h;
  std::vector<T> c;
};

template <typename T>
LstmStep<T> lstm_cell_step(const LstmCellView<T>& cell, std::span<const T> x_t,
                           std::span<const T> h_prev, std::span<const T> c_prev) {
  const std::size_t H = cell.hidden();
  if (cell.U.rows() != 4 * H || cell.W.rows() != 4 * H || cell.b.rows() != 4 * H ||
      cell.b.cols() != 1) {
    throw DimensionError("lstm_cell_step: inconsistent cell parameters W" + cell.W.shape() +
                         " U" + cell.U.shape() + " b" + cell.b.shape());
  }
  if (x_t.size() != cell.input() || h_prev.size() != H || c_prev.size() != H) {
    throw DimensionError("lstm_cell_step: input sizes (" + std::to_string(x_t.size()) + ", " +
                         std::to_string(h_prev.size()) + ", " + std::to_string(c_prev.size()) +
                         ") do not match cell (E=" + std::to_string(cell.input()) +
                         ", H=" + std::to_string(H) + ")");
  }
  using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  Eigen::Map<const Vec> x(x_t.data(), x_t.size());
  Eigen::Map<const Vec> hp(h_prev.data(), H);
  Eigen::Map<const Vec> cp(c_prev.data(), H);
  Eigen::Map<const Vec> bias(cell.b.data(), 4 * H);
  const Vec pre = cell.W.map() * x + cell.U.map() * hp + bias;

  LstmStep<T> out{std::vector<T>(H), std::vector<T>(H)};
  for (std::size_t k = 0; k < H; ++k) {
    const T i = sigmoid(pre[k]);
    const T f = sigmoid(pre[H + k]);
    const T o = sigmoid(pre[2 * H + k]);
    const T g = std::tanh(pre[3 * H + k]);
    out.c[k] = f * cp[k] + i * g;
    out.h[k] = o * std::tanh(out.c[k]);
  }
  return out;
}

inline constexpr int kCnnWindows[] = {2, 3, 4};

inline bool is_cnn_window(int c) {
  return std::find(std::begin(kCnnWindows), std::end(kCnnWindows), c) != std::end(kCnnWindows);
}

// tanh(W_c x_window + b_c) for one window of c concatenated embeddings.
template <typename T>
std::vector<T> conv1d_tanh(const Tensor2<T>& filter, const Tensor2<T>& bias,
                           std::span<const T> x_window, int window) {
  if (!is_cnn_window(window)) {
    throw std::invalid_argument("conv1d_tanh: window " + std::to_string(window) +
                                " is not one of {2,3,4}");
  }
  if (filter.cols() % static_cast<std::size_t>(window) != 0 ||
      x_window.size() != filter.cols() || bias.rows() != filter.rows() || bias.cols() != 1) {
    throw DimensionError("conv1d_tanh: filter " + filter.shape() + ", bias " + bias.shape() +
                         ", window input of length " + std::to_string(x_window.size()));
  }
  using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  Eigen::Map<const Vec> x(x_window.data(), x_window.size());
  Eigen::Map<const Vec> b(bias.data(), bias.rows());
  const Vec pre = filter.map() * x + b;
  std::vector<T> out(pre.size());
  for (Eigen::Index k = 0; k < pre.size(); ++k) out[k] = std::tanh(pre[k]);
  return out;
}

template <typename T>
struct PooledMax {
  std::vector<T> value;
  std::vector<std::size_t> argmax;  // first position attaining the max
};

template <typename T>
PooledMax<T> max_over_time(std::span<const std::vector<T>> feature_maps) {
  if (feature_maps.empty()) throw std::invalid_argument("max_over_time: empty sequence");
  const std::size_t dim = feature_maps.front().size();
  PooledMax<T> out{feature_maps.front(), std::vector<std::size_t>(dim, 0)};
  for (std::size_t t = 1; t < feature_maps.size(); ++t) {
    if (feature_maps[t].size() != dim) {
      throw DimensionError("max_over_time: position " + std::to_string(t) + " has length " +
                           std::to_string(feature_maps[t].size()) + ", expected " +
                           std::to_string(dim));
    }
    for (std::size_t k = 0; k < dim; ++k) {
      if (feature_maps[t][k] > out.value[k]) {
        out.value[k] = feature_maps[t][k];
        out.argmax[k] = t;
      }
    }
  }
  return out;
}

// Loss evaluation callback for grad_check. When `with_grad` is true the callee
// must overwrite every checked Dual's grad with d(loss)/d(value).
using GradCheckLoss = std::function<double(bool with_grad)>;

struct GradCheckOptions {
  double epsilon = 1e-5;
  // 0 checks every coordinate; otherwise a deterministic stride subset per tensor.
  std::size_t max_coords_per_tensor = 0;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t coords_checked = 0;
  std::string worst;  // "tensor#index" of the worst coordinate
};

GradCheckResult grad_check(const GradCheckLoss& loss, std::span<Dual<double>* const> params,
                           const GradCheckOptions& options = {});

}  // namespace conflate

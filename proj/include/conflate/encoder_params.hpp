#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "conflate/tensor.hpp"
#include "conflate/vocabulary.hpp"

namespace conflate {

enum class ModelKind { BoC, LSTM, CNN };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

struct EncoderDims {
  std::size_t embedding = 128;     // LSTM / CNN character embedding
  std::size_t lstm_hidden = 128;   // per direction
  std::size_t feature_maps = 100;  // per CNN window
  std::size_t boc_hidden = 300;    // both BoC layers

  std::size_t output_dim(ModelKind kind) const;
  friend bool operator==(const EncoderDims&, const EncoderDims&) = default;
};

// Tensor slots per model kind. LSTM gate blocks are stacked i, f, o, c.
namespace slot {
enum BoC : std::size_t { kBocW1, kBocB1, kBocW2, kBocB2, kBocCount };
enum Lstm : std::size_t {
  kLstmEmbed,
  kLstmFwdW,
  kLstmFwdU,
  kLstmFwdB,
  kLstmBwdW,
  kLstmBwdU,
  kLstmBwdB,
  kLstmCount
};
enum Cnn : std::size_t { kCnnEmbed, kCnnW2, kCnnB2, kCnnW3, kCnnB3, kCnnW4, kCnnB4, kCnnCount };
}  // namespace slot

struct TensorSpec {
  std::string name;
  std::size_t rows;
  std::size_t cols;
};

std::vector<TensorSpec> tensor_layout(ModelKind kind, const EncoderDims& dims);

template <typename T>
class EncoderParams {
 public:
  EncoderParams() = default;
  EncoderParams(ModelKind kind, EncoderDims dims) : kind_(kind), dims_(dims) {
    for (auto& spec : tensor_layout(kind, dims)) {
      names_.push_back(spec.name);
      tensors_.emplace_back(spec.rows, spec.cols);
    }
  }

  ModelKind kind() const { return kind_; }
  const EncoderDims& dims() const { return dims_; }
  std::size_t output_dim() const { return dims_.output_dim(kind_); }

  std::size_t count() const { return tensors_.size(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  const std::vector<std::string>& names() const { return names_; }

  Dual<T>& operator[](std::size_t i) { return tensors_[i]; }
  const Dual<T>& operator[](std::size_t i) const { return tensors_[i]; }
  const Tensor2<T>& value(std::size_t i) const { return tensors_[i].value; }

  Dual<T>& at(std::string_view name) {
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (names_[i] == name) return tensors_[i];
    }
    throw std::out_of_range("EncoderParams: no tensor named " + std::string(name));
  }
  const Dual<T>& at(std::string_view name) const {
    return const_cast<EncoderParams*>(this)->at(name);
  }

  std::vector<Dual<T>*> duals() {
    std::vector<Dual<T>*> out;
    for (auto& d : tensors_) out.push_back(&d);
    return out;
  }

  void zero_grad() {
    for (auto& d : tensors_) d.zero_grad();
  }

  bool all_finite() const {
    for (const auto& d : tensors_) {
      if (!d.value.all_finite()) return false;
    }
    return true;
  }

  // Values only; gradients start at zero.
  template <typename U>
  EncoderParams<U> cast() const {
    EncoderParams<U> out(kind_, dims_);
    for (std::size_t i = 0; i < tensors_.size(); ++i) out[i].value = tensors_[i].value.template cast<U>();
    return out;
  }

  bool same_values(const EncoderParams& o) const {
    if (kind_ != o.kind_ || !(dims_ == o.dims_) || tensors_.size() != o.tensors_.size()) return false;
    for (std::size_t i = 0; i < tensors_.size(); ++i) {
      if (!(tensors_[i].value == o.tensors_[i].value)) return false;
    }
    return true;
  }

 private:
  ModelKind kind_ = ModelKind::CNN;
  EncoderDims dims_;
  std::vector<std::string> names_;
  std::vector<Dual<T>> tensors_;
};

}  // namespace conflate

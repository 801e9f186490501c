#include "conflate/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace conflate {

GradCheckResult grad_check(const GradCheckLoss& loss, std::span<Dual<double>* const> params,
                           const GradCheckOptions& options) {
  if (!(options.epsilon > 0.0)) throw std::invalid_argument("grad_check: epsilon must be > 0");

  const double base = loss(true);
  if (!std::isfinite(base)) throw std::runtime_error("grad_check: non-finite loss");

  std::vector<Tensor2<double>> analytic;
  analytic.reserve(params.size());
  for (const Dual<double>* p : params) analytic.push_back(p->grad);

  GradCheckResult result;
  const double eps = options.epsilon;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor2<double>& value = params[pi]->value;
    const std::size_t n = value.size();
    std::size_t stride = 1;
    if (options.max_coords_per_tensor != 0 && n > options.max_coords_per_tensor) {
      stride = (n + options.max_coords_per_tensor - 1) / options.max_coords_per_tensor;
    }
    for (std::size_t i = 0; i < n; i += stride) {
      const double saved = value[i];
      value[i] = saved + eps;
      const double up = loss(false);
      value[i] = saved - eps;
      const double down = loss(false);
      value[i] = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw std::runtime_error("grad_check: non-finite loss at tensor " + std::to_string(pi) +
                                 " index " + std::to_string(i));
      }
      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic[pi][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double rel = std::abs(a - numeric) / denom;
      ++result.coords_checked;
      if (rel > result.max_relative_error) {
        result.max_relative_error = rel;
        result.worst = std::to_string(pi) + "#" + std::to_string(i);
      }
    }
  }
  return result;
}

}  // namespace conflate

#include <doctest.h>

#include <cmath>
#include <vector>

#include "conflate/optimizer.hpp"

using namespace conflate;

namespace {

double max_orthogonality_residual(const Tensor2<float>& U, std::size_t H) {
  double worst = 0.0;
  for (std::size_t g = 0; g < 4; ++g) {
    Eigen::MatrixXd B(H, H);
    for (std::size_t i = 0; i < H; ++i) {
      for (std::size_t j = 0; j < H; ++j) B(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = U(g * H + i, j);
    }
    const Eigen::MatrixXd R = B.transpose() * B - Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(H), static_cast<Eigen::Index>(H));
    worst = std::max(worst, R.cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace

TEST_SUITE("optimizer") {
  TEST_CASE("recurrent matrices are orthogonal per gate") {
    const auto p = init_params<float>(ModelKind::LSTM, EncoderDims{}, InitConfig{0.01, 3.0, 1});
    CHECK(max_orthogonality_residual(p.at("lstm.fwd.U").value, 128) < 1e-5);
    CHECK(max_orthogonality_residual(p.at("lstm.bwd.U").value, 128) < 1e-5);
  }

  TEST_CASE("forget gate biases are 3, other biases 0") {
    const auto p = init_params<float>(ModelKind::LSTM, EncoderDims{}, InitConfig{0.01, 3.0, 2});
    for (const char* name : {"lstm.fwd.b", "lstm.bwd.b"}) {
      const auto& b = p.at(name).value;
      for (std::size_t r = 0; r < b.rows(); ++r) CHECK(b(r, 0) == (r >= 128 && r < 256 ? 3.0f : 0.0f));
    }
  }

  TEST_CASE("uniform tensors stay within the range and use it") {
    for (ModelKind kind : {ModelKind::BoC, ModelKind::LSTM, ModelKind::CNN}) {
      const auto p = init_params<float>(kind, EncoderDims{}, InitConfig{0.01, 3.0, 3});
      for (std::size_t i = 0; i < p.count(); ++i) {
        const auto& name = p.name(i);
        const bool is_bias = name.find(".b") != std::string::npos;
        if (name.find(".U") != std::string::npos || is_bias) continue;
        float lo = 0, hi = 0;
        for (float v : p.value(i).flat()) {
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
        CHECK(lo >= -0.01f);
        CHECK(hi <= 0.01f);
        CHECK(hi - lo > 0.015f);
      }
    }
  }

  TEST_CASE("initialisation is deterministic per seed") {
    const auto a = init_params<float>(ModelKind::CNN, EncoderDims{}, InitConfig{0.01, 3.0, 7});
    const auto b = init_params<float>(ModelKind::CNN, EncoderDims{}, InitConfig{0.01, 3.0, 7});
    const auto c = init_params<float>(ModelKind::CNN, EncoderDims{}, InitConfig{0.01, 3.0, 8});
    CHECK(a.same_values(b));
    CHECK_FALSE(a.same_values(c));
  }

  TEST_CASE("clipping examples") {
    Dual<double> g(1, 2);
    std::vector<Dual<double>*> ps{&g};
    g.grad(0, 0) = 6.0;
    g.grad(0, 1) = 8.0;
    CHECK(clip_gradients<double>(ps, 5.0) == doctest::Approx(0.5));
    CHECK(global_grad_norm<double>(ps) == doctest::Approx(5.0));

    g.grad(0, 0) = 4.9;
    g.grad(0, 1) = 0.0;
    CHECK(clip_gradients<double>(ps, 5.0) == 1.0);
    CHECK(g.grad(0, 0) == 4.9);

    g.zero_grad();
    CHECK(clip_gradients<double>(ps, 5.0) == 1.0);

    g.grad(0, 0) = std::nan("");
    CHECK_THROWS(clip_gradients<double>(ps, 5.0));
  }

  TEST_CASE("clipping spans every tensor jointly") {
    Dual<double> a(1, 1), b(1, 1);
    a.grad(0, 0) = 3.0;
    b.grad(0, 0) = 4.0;
    std::vector<Dual<double>*> ps{&a, &b};
    CHECK(clip_gradients<double>(ps, 1.0) == doctest::Approx(0.2));
    CHECK(a.grad(0, 0) == doctest::Approx(0.6));
    CHECK(b.grad(0, 0) == doctest::Approx(0.8));
  }

  TEST_CASE("first Adam step moves each coordinate by the learning rate against the gradient sign") {
    Dual<double> p(Tensor2<double>{{1.0, -2.0, 0.5}});
    std::vector<Dual<double>*> ps{&p};
    AdamState<double> adam(ps, AdamConfig{0.01});
    p.grad(0, 0) = 3.0;
    p.grad(0, 1) = -0.2;
    p.grad(0, 2) = 1e-3;
    adam_step<double>(ps, adam);
    CHECK(p.value(0, 0) == doctest::Approx(1.0 - 0.01).epsilon(1e-9));
    CHECK(p.value(0, 1) == doctest::Approx(-2.0 + 0.01).epsilon(1e-9));
    CHECK(p.value(0, 2) == doctest::Approx(0.5 - 0.01).epsilon(1e-6));
    CHECK(adam.step_count() == 1);
    for (double gv : p.grad.flat()) CHECK(gv == 0.0);
  }

  TEST_CASE("zero gradient is a fixed point") {
    Dual<double> p(Tensor2<double>{{0.25, -0.75}});
    std::vector<Dual<double>*> ps{&p};
    AdamState<double> adam(ps, AdamConfig{});
    for (int i = 0; i < 50; ++i) adam_step<double>(ps, adam);
    CHECK(p.value(0, 0) == 0.25);
    CHECK(p.value(0, 1) == -0.75);
  }

  TEST_CASE("Adam descends on a scalar quadratic") {
    Dual<double> p(Tensor2<double>{{1.0}});
    std::vector<Dual<double>*> ps{&p};
    AdamState<double> adam(ps, AdamConfig{0.1});
    std::vector<double> path{1.0};
    for (int i = 0; i < 100; ++i) {
      p.grad(0, 0) = 2.0 * p.value(0, 0);
      adam_step<double>(ps, adam);
      path.push_back(std::abs(p.value(0, 0)));
    }
    // Strictly decreasing until it first drops below 0.5, and it stays there.
    std::size_t k = 1;
    for (; k < path.size() && path[k - 1] >= 0.5; ++k) CHECK(path[k] < path[k - 1]);
    CHECK(k < 10);
    for (; k < path.size(); ++k) CHECK(path[k] < 0.5);
  }
}

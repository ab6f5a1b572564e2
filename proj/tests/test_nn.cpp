#include <cmath>

#include "doctest.h"
#include "fesf/nn.hpp"
#include "grad_check.hpp"
#include "test_support.hpp"

using namespace fesf;
using fesf::testing::check_gradient;
using fesf::testing::random_image;

namespace {

Image naive_conv(const Image& x, std::span<const double> w, std::span<const double> b, std::size_t out_c) {
  const std::size_t H = x.height(), W = x.width(), C = x.channels();
  Image y(Shape{out_c, H, W});
  for (std::size_t o = 0; o < out_c; ++o) {
    for (std::size_t h = 0; h < H; ++h) {
      for (std::size_t q = 0; q < W; ++q) {
        double acc = b[o];
        for (std::size_t c = 0; c < C; ++c) {
          for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
              const long r = static_cast<long>(h) + dy, s = static_cast<long>(q) + dx;
              if (r < 0 || s < 0 || r >= static_cast<long>(H) || s >= static_cast<long>(W)) continue;
              acc += w[((o * C + c) * 3 + (dy + 1)) * 3 + (dx + 1)] * x.at(c, r, s);
            }
          }
        }
        y.at(o, h, q) = acc;
      }
    }
  }
  return y;
}

}  // namespace

TEST_CASE("conv3x3 matches a naive same-padded convolution") {
  nn::Rng rng(31);
  for (auto [h, w] : {std::pair<std::size_t, std::size_t>{1, 1}, {2, 5}, {7, 4}, {9, 9}}) {
    const Image x = random_image(Shape{3, h, w}, rng, -1, 1);
    std::vector<double> wts(2 * 3 * 9), bias(2);
    for (auto& v : wts) v = rng.uniform(-1, 1);
    for (auto& v : bias) v = rng.uniform(-1, 1);
    CHECK(max_abs_diff(nn::conv3x3_forward(x, wts, bias, 2), naive_conv(x, wts, bias, 2)) < 1e-13);
  }
}

TEST_CASE("conv net gradients match finite differences") {
  nn::Rng rng(32);
  const nn::ConvNet net({2, 3, 2, 3});
  const auto params = net.init_params(rng, false);
  const Image x = random_image(Shape{2, 5, 6}, rng, -1, 1);
  const Image target = random_image(Shape{2, 5, 6}, rng, -1, 1);

  auto loss = [&](const std::vector<double>& p) {
    const Image y = net.forward(x, p);
    double s = 0;
    for (std::size_t i = 0; i < y.size(); ++i) s += 0.5 * (y.data()[i] - target.data()[i]) * (y.data()[i] - target.data()[i]);
    return s;
  };
  nn::ConvTrace trace;
  const Image y = net.forward(x, params, &trace);
  Image dy(y.shape());
  for (std::size_t i = 0; i < y.size(); ++i) dy.data()[i] = y.data()[i] - target.data()[i];
  std::vector<double> grad(params.size(), 0.0);
  const Image dx = net.backward(trace, dy, params, grad);
  CHECK(check_gradient(params, grad, loss).passed());

  // Input gradient, one coordinate at a time.
  for (std::size_t i = 0; i < x.size(); i += 7) {
    Image xp = x, xm = x;
    xp.data()[i] += 1e-6;
    xm.data()[i] -= 1e-6;
    auto l = [&](const Image& in) {
      const Image out = net.forward(in, params);
      double s = 0;
      for (std::size_t k = 0; k < out.size(); ++k) s += 0.5 * (out.data()[k] - target.data()[k]) * (out.data()[k] - target.data()[k]);
      return s;
    };
    CHECK(dx.data()[i] == doctest::Approx((l(xp) - l(xm)) / 2e-6).epsilon(1e-5));
  }
}

TEST_CASE("param counts and zero-initialised last layer") {
  const nn::ConvNet g({3, 4, 3, 3});
  CHECK(g.param_count() == 371);
  nn::Rng rng(33);
  const auto p = g.init_params(rng, true);
  nn::Rng rng2(34);
  const Image x = random_image(Shape{3, 4, 4}, rng2);
  const Image y = g.forward(x, p);
  for (double v : y.data()) CHECK(v == 0.0);
}

TEST_CASE("softmax classifier gradient and prediction") {
  const nn::SoftmaxClassifier clf(5, 3);
  nn::Rng rng(35);
  std::vector<double> params(clf.param_count());
  for (auto& v : params) v = rng.uniform(-1, 1);
  std::vector<double> feat(5);
  for (auto& v : feat) v = rng.uniform(-2, 2);
  std::vector<double> grad(params.size(), 0.0);
  clf.loss_and_grad(feat, 2, params, grad, 1.0);
  std::vector<double> scratch(params.size());
  auto loss = [&](const std::vector<double>& p) { return clf.loss_and_grad(feat, 2, p, scratch, 0.0); };
  CHECK(check_gradient(params, grad, loss, {}, 1e-6).passed());

  const auto prob = clf.probabilities(feat, params);
  double total = 0;
  for (double q : prob) total += q;
  CHECK(total == doctest::Approx(1.0));
  const auto best = std::max_element(prob.begin(), prob.end()) - prob.begin();
  CHECK(clf.predict(feat, params) == static_cast<std::size_t>(best));
}

TEST_CASE("rng is deterministic per seed") {
  nn::Rng a(5), b(5), c(6);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    CHECK(x == b.uniform());
    differs = differs || x != c.uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
  CHECK(differs);
}

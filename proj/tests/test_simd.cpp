#include <cmath>
#include <complex>
#include <cstring>
#include <string>
#include <vector>

#include "doctest.h"
#include "fesf/simd.hpp"
#include "test_support.hpp"

using namespace fesf;

namespace {

std::vector<double> random_vec(std::size_t n, nn::Rng& rng, double lo = -2.0, double hi = 2.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("scalar kernels match naive loops") {
  const auto& k = simd::scalar_kernels();
  nn::Rng rng(1);
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 17u, 64u}) {
    const auto a = random_vec(n, rng);
    const auto b = random_vec(n, rng);
    double dot = 0, sum = 0, ssd = 0;
    for (std::size_t i = 0; i < n; ++i) {
      dot += a[i] * b[i];
      sum += a[i];
      ssd += (a[i] - b[i]) * (a[i] - b[i]);
    }
    CHECK(k.dot(a.data(), b.data(), n) == doctest::Approx(dot).epsilon(1e-12));
    CHECK(k.sum(a.data(), n) == doctest::Approx(sum).epsilon(1e-12));
    CHECK(k.sum_sq_diff(a.data(), b.data(), n) == doctest::Approx(ssd).epsilon(1e-12));

    auto y = b;
    k.axpy(0.5, a.data(), y.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y[i] == b[i] + 0.5 * a[i]);

    auto c = a;
    k.clamp01(c.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(c[i] == std::clamp(a[i], 0.0, 1.0));
  }
}

TEST_CASE("magnitude of 3+4i is exactly 5") {
  const std::complex<double> z[1] = {{3.0, 4.0}};
  double out = 0.0;
  simd::scalar_kernels().magnitude(reinterpret_cast<const double*>(z), &out, 1);
  CHECK(out == 5.0);
}

TEST_CASE("dispatch honours the available ISA") {
  const auto& active = simd::active();
  if (simd::avx2_kernels() == nullptr) {
    CHECK(active.isa == simd::Isa::scalar);
  } else {
    MESSAGE("active kernels: " << std::string(active.name));
  }
}

// Each vector kernel must reproduce the scalar reference bit for bit, on
// lengths that exercise the four-wide body and every tail length.
TEST_CASE("avx2 kernels are bit-identical to the scalar reference") {
  const simd::Kernels* v = simd::avx2_kernels();
  if (v == nullptr) {
    MESSAGE("AVX2 not available; equivalence test skipped");
    return;
  }
  const auto& s = simd::scalar_kernels();
  nn::Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = rng.below(70);
    const auto a = random_vec(n, rng);
    const auto b = random_vec(n, rng);
    const double alpha = rng.uniform(-3, 3);

    CHECK(bit_equal(s.dot(a.data(), b.data(), n), v->dot(a.data(), b.data(), n)));
    CHECK(bit_equal(s.sum(a.data(), n), v->sum(a.data(), n)));
    CHECK(bit_equal(s.sum_sq_diff(a.data(), b.data(), n), v->sum_sq_diff(a.data(), b.data(), n)));

    auto ys = b, yv = b;
    s.axpy(alpha, a.data(), ys.data(), n);
    v->axpy(alpha, a.data(), yv.data(), n);
    CHECK(bit_equal(ys, yv));

    auto cs = a, cv = a;
    if (n > 0) cs[0] = cv[0] = -0.0;
    s.clamp01(cs.data(), n);
    v->clamp01(cv.data(), n);
    CHECK(bit_equal(cs, cv));

    std::vector<std::uint8_t> mask(n);
    for (auto& m : mask) m = rng.uniform() < 0.5 ? 1 : 0;
    const double beta = rng.uniform();
    std::vector<double> bs(n), bv(n);
    s.blend_masked(a.data(), b.data(), mask.data(), beta, bs.data(), n);
    v->blend_masked(a.data(), b.data(), mask.data(), beta, bv.data(), n);
    CHECK(bit_equal(bs, bv));

    const auto z = random_vec(2 * n, rng);
    std::vector<double> ms(n), mv(n);
    s.magnitude(z.data(), ms.data(), n);
    v->magnitude(z.data(), mv.data(), n);
    CHECK(bit_equal(ms, mv));

    const auto mx = random_vec(n, rng, 0, 1), my = random_vec(n, rng, 0, 1);
    const auto vx = random_vec(n, rng, 0, 0.1), vy = random_vec(n, rng, 0, 0.1), cxy = random_vec(n, rng, -0.05, 0.05);
    std::vector<double> ss(n), sv(n);
    s.ssim_map(mx.data(), my.data(), vx.data(), vy.data(), cxy.data(), 1e-4, 9e-4, ss.data(), n);
    v->ssim_map(mx.data(), my.data(), vx.data(), vy.data(), cxy.data(), 1e-4, 9e-4, sv.data(), n);
    CHECK(bit_equal(ss, sv));
  }
}

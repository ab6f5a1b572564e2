#include <cmath>

#include "fesf/simd.hpp"

namespace fesf::simd {
namespace {

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + a * x[i];
}

// Four partial sums in the same lane order as the vector variant.
template <class Term>
double striped_sum(std::size_t n, Term term) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 = s0 + term(i);
    s1 = s1 + term(i + 1);
    s2 = s2 + term(i + 2);
    s3 = s3 + term(i + 3);
  }
  double total = (s0 + s2) + (s1 + s3);
  for (; i < n; ++i) total = total + term(i);
  return total;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  return striped_sum(n, [&](std::size_t i) { return a[i] * b[i]; });
}

double sum_scalar(const double* a, std::size_t n) {
  return striped_sum(n, [&](std::size_t i) { return a[i]; });
}

double sum_sq_diff_scalar(const double* a, const double* b, std::size_t n) {
  return striped_sum(n, [&](std::size_t i) {
    const double d = a[i] - b[i];
    return d * d;
  });
}

void blend_masked_scalar(const double* host, const double* plain, const std::uint8_t* mask, double beta, double* out,
                         std::size_t n) {
  const double keep = 1.0 - beta;
  for (std::size_t i = 0; i < n; ++i) out[i] = mask[i] ? keep * host[i] + beta * plain[i] : host[i];
}

void magnitude_scalar(const double* z, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double re = z[2 * i];
    const double im = z[2 * i + 1];
    out[i] = std::sqrt(re * re + im * im);
  }
}

void clamp01_scalar(double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double v = x[i] < 0.0 ? 0.0 : x[i];
    x[i] = 1.0 < v ? 1.0 : v;
  }
}

void ssim_map_scalar(const double* mx, const double* my, const double* vx, const double* vy, const double* cxy,
                     double c1, double c2, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double num = ((2.0 * mx[i]) * my[i] + c1) * (2.0 * cxy[i] + c2);
    const double den = (mx[i] * mx[i] + my[i] * my[i] + c1) * (vx[i] + vy[i] + c2);
    out[i] = num / den;
  }
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels table{Isa::scalar,        "scalar",       axpy_scalar,      dot_scalar,      sum_scalar,
                             sum_sq_diff_scalar, blend_masked_scalar, magnitude_scalar, clamp01_scalar, ssim_map_scalar};
  return table;
}

}  // namespace fesf::simd

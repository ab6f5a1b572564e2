#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

// Data-parallel inner loops shared by the spectral, blending, metric and
// training code. Every kernel has a scalar reference and, on x86-64, an AVX2
// variant selected once at startup. Both variants produce bit-identical
// results: reductions use four interleaved partial sums combined as
// (s0 + s2) + (s1 + s3), followed by the sequential tail, and no kernel
// fuses multiply-add.

namespace fesf::simd {

enum class Isa { scalar, avx2 };

struct Kernels {
  Isa isa;
  const char* name;

  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum)(const double* a, std::size_t n);
  // sum of (a[i] - b[i])^2
  double (*sum_sq_diff)(const double* a, const double* b, std::size_t n);
  // out[i] = mask[i] ? (1 - beta) * host[i] + beta * plain[i] : host[i]
  void (*blend_masked)(const double* host, const double* plain, const std::uint8_t* mask, double beta, double* out,
                       std::size_t n);
  // out[i] = |z[i]| for interleaved (re, im) pairs
  void (*magnitude)(const double* interleaved, double* out, std::size_t n);
  void (*clamp01)(double* x, std::size_t n);
  // Per-pixel SSIM from local moments.
  void (*ssim_map)(const double* mean_x, const double* mean_y, const double* var_x, const double* var_y,
                   const double* cov_xy, double c1, double c2, double* out, std::size_t n);
};

const Kernels& scalar_kernels();

/// AVX2 table, or nullptr when it was not compiled in or the CPU lacks AVX2.
const Kernels* avx2_kernels();

/// Kernel table used by the library. AVX2 when available unless the
/// FESF_SIMD environment variable is set to "scalar" at first use.
const Kernels& active();

// Span conveniences over active(). Sizes are the caller's contract.
inline void axpy(double a, std::span<const double> x, std::span<double> y) { active().axpy(a, x.data(), y.data(), x.size()); }
inline double dot(std::span<const double> a, std::span<const double> b) { return active().dot(a.data(), b.data(), a.size()); }
inline double sum(std::span<const double> a) { return active().sum(a.data(), a.size()); }
inline double sum_sq_diff(std::span<const double> a, std::span<const double> b) {
  return active().sum_sq_diff(a.data(), b.data(), a.size());
}
inline void clamp01(std::span<double> x) { active().clamp01(x.data(), x.size()); }

}  // namespace fesf::simd

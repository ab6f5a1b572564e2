// Compiled with -mavx2 only; the dispatcher guarantees the CPU supports it
// before any of these functions runs.
#include <immintrin.h>

#include <cmath>
#include <cstring>

#include "fesf/simd.hpp"

namespace fesf::simd {
namespace {

double reduce(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);  // s0 s1
  const __m128d hi = _mm256_extractf128_pd(v, 1);  // s2 s3
  const __m128d pair = _mm_add_pd(lo, hi);        // s0+s2 s1+s3
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] = y[i] + a * x[i];
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  double total = reduce(acc);
  for (; i < n; ++i) total = total + a[i] * b[i];
  return total;
}

double sum_avx2(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  double total = reduce(acc);
  for (; i < n; ++i) total = total + a[i];
  return total;
}

double sum_sq_diff_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double total = reduce(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    total = total + d * d;
  }
  return total;
}

void blend_masked_avx2(const double* host, const double* plain, const std::uint8_t* mask, double beta, double* out,
                       std::size_t n) {
  const double keep_s = 1.0 - beta;
  const __m256d keep = _mm256_set1_pd(keep_s);
  const __m256d vbeta = _mm256_set1_pd(beta);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    std::int32_t bytes;
    std::memcpy(&bytes, mask + i, sizeof bytes);
    const __m256i wide = _mm256_cvtepu8_epi64(_mm_cvtsi32_si128(bytes));
    const __m256d inside = _mm256_castsi256_pd(
        _mm256_xor_si256(_mm256_cmpeq_epi64(wide, _mm256_setzero_si256()), _mm256_set1_epi64x(-1)));
    const __m256d h = _mm256_loadu_pd(host + i);
    const __m256d mixed = _mm256_add_pd(_mm256_mul_pd(keep, h), _mm256_mul_pd(vbeta, _mm256_loadu_pd(plain + i)));
    _mm256_storeu_pd(out + i, _mm256_blendv_pd(h, mixed, inside));
  }
  for (; i < n; ++i) out[i] = mask[i] ? keep_s * host[i] + beta * plain[i] : host[i];
}

void magnitude_avx2(const double* z, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(z + 2 * i);      // r0 i0 r1 i1
    const __m256d b = _mm256_loadu_pd(z + 2 * i + 4);  // r2 i2 r3 i3
    const __m256d re = _mm256_permute4x64_pd(_mm256_unpacklo_pd(a, b), 0xD8);
    const __m256d im = _mm256_permute4x64_pd(_mm256_unpackhi_pd(a, b), 0xD8);
    const __m256d sq = _mm256_add_pd(_mm256_mul_pd(re, re), _mm256_mul_pd(im, im));
    _mm256_storeu_pd(out + i, _mm256_sqrt_pd(sq));
  }
  for (; i < n; ++i) {
    const double re = z[2 * i];
    const double im = z[2 * i + 1];
    out[i] = std::sqrt(re * re + im * im);
  }
}

void clamp01_avx2(double* x, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  // max(zero, x) keeps x when equal, min(one, v) keeps v when equal: matches the scalar ternaries.
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_max_pd(zero, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(x + i, _mm256_min_pd(one, v));
  }
  for (; i < n; ++i) {
    double v = x[i] < 0.0 ? 0.0 : x[i];
    x[i] = 1.0 < v ? 1.0 : v;
  }
}

void ssim_map_avx2(const double* mx, const double* my, const double* vx, const double* vy, const double* cxy,
                   double c1, double c2, double* out, std::size_t n) {
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d k1 = _mm256_set1_pd(c1);
  const __m256d k2 = _mm256_set1_pd(c2);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(mx + i);
    const __m256d b = _mm256_loadu_pd(my + i);
    const __m256d lum_num = _mm256_add_pd(_mm256_mul_pd(_mm256_mul_pd(two, a), b), k1);
    const __m256d con_num = _mm256_add_pd(_mm256_mul_pd(two, _mm256_loadu_pd(cxy + i)), k2);
    const __m256d lum_den = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(a, a), _mm256_mul_pd(b, b)), k1);
    const __m256d con_den = _mm256_add_pd(_mm256_add_pd(_mm256_loadu_pd(vx + i), _mm256_loadu_pd(vy + i)), k2);
    _mm256_storeu_pd(out + i,
                     _mm256_div_pd(_mm256_mul_pd(lum_num, con_num), _mm256_mul_pd(lum_den, con_den)));
  }
  for (; i < n; ++i) {
    const double num = ((2.0 * mx[i]) * my[i] + c1) * (2.0 * cxy[i] + c2);
    const double den = (mx[i] * mx[i] + my[i] * my[i] + c1) * (vx[i] + vy[i] + c2);
    out[i] = num / den;
  }
}

}  // namespace

const Kernels& avx2_table() {
  static const Kernels table{Isa::avx2,       "avx2",          axpy_avx2,      dot_avx2,      sum_avx2,
                             sum_sq_diff_avx2, blend_masked_avx2, magnitude_avx2, clamp01_avx2, ssim_map_avx2};
  return table;
}

}  // namespace fesf::simd

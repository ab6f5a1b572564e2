#include "fesf/fft.hpp"

#include <cmath>
#include <numbers>

#include "fesf/error.hpp"

namespace fesf {
namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

FftPlan::Radix2::Radix2(std::size_t len) : n(len) {
  if (n < 2) return;
  bit_reverse.resize(n);
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < n) ++bits;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (std::size_t b = 0; b < bits; ++b) r |= ((i >> b) & 1u) << (bits - 1 - b);
    bit_reverse[i] = r;
  }
  twiddle.resize(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    twiddle[k] = {std::cos(angle), std::sin(angle)};
  }
}

void FftPlan::Radix2::transform(std::span<std::complex<double>> data, bool inverse) const {
  if (n < 2) return;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = bit_reverse[i];
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        std::complex<double> w = twiddle[k * stride];
        if (inverse) w = std::conj(w);
        const std::complex<double> t = w * data[start + k + half];
        data[start + k + half] = data[start + k] - t;
        data[start + k] += t;
      }
    }
  }
}

FftPlan::FftPlan(std::size_t n) : n_(n), power_of_two_(is_power_of_two(n)) {
  if (n == 0) throw ValidationError("FFT length must be positive");
  if (power_of_two_) {
    radix2_ = Radix2(n);
    return;
  }
  const std::size_t m = next_power_of_two(2 * n - 1);
  radix2_ = Radix2(m);
  chirp_.resize(n);
  // j^2 mod 2n keeps the angle argument small and exact.
  const std::size_t period = 2 * n;
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t sq = (j * j) % period;
    const double angle = std::numbers::pi * static_cast<double>(sq) / static_cast<double>(n);
    chirp_[j] = {std::cos(angle), std::sin(angle)};
  }
  chirp_spectrum_.assign(m, {0.0, 0.0});
  chirp_spectrum_[0] = chirp_[0];
  for (std::size_t j = 1; j < n; ++j) {
    chirp_spectrum_[j] = chirp_[j];
    chirp_spectrum_[m - j] = chirp_[j];
  }
  radix2_.transform(chirp_spectrum_, false);
}

void FftPlan::bluestein(std::span<std::complex<double>> data) const {
  const std::size_t m = radix2_.n;
  std::vector<std::complex<double>> work(m, {0.0, 0.0});
  for (std::size_t j = 0; j < n_; ++j) work[j] = data[j] * std::conj(chirp_[j]);
  radix2_.transform(work, false);
  for (std::size_t k = 0; k < m; ++k) work[k] *= chirp_spectrum_[k];
  radix2_.transform(work, true);
  const double scale = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < n_; ++k) data[k] = work[k] * scale * std::conj(chirp_[k]);
}

void FftPlan::forward(std::span<std::complex<double>> data) const {
  if (data.size() != n_) throw ValidationError("FFT buffer length does not match plan");
  if (power_of_two_) {
    radix2_.transform(data, false);
  } else {
    bluestein(data);
  }
}

void FftPlan::inverse(std::span<std::complex<double>> data) const {
  if (data.size() != n_) throw ValidationError("FFT buffer length does not match plan");
  if (power_of_two_) {
    radix2_.transform(data, true);
    return;
  }
  for (auto& v : data) v = std::conj(v);
  bluestein(data);
  for (auto& v : data) v = std::conj(v);
}

}  // namespace fesf

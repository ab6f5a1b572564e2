#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace fesf {

/// One-dimensional complex DFT of a fixed length. Power-of-two lengths use an
/// iterative radix-2 transform; every other length goes through Bluestein's
/// chirp-z algorithm on a padded power-of-two convolution. A plan is
/// immutable after construction and may be shared between threads.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);

  std::size_t size() const { return n_; }

  /// In place, unnormalized: X[k] = sum_j x[j] exp(-2 pi i j k / n).
  void forward(std::span<std::complex<double>> data) const;
  /// In place, unnormalized: x[j] = sum_k X[k] exp(+2 pi i j k / n).
  void inverse(std::span<std::complex<double>> data) const;

 private:
  struct Radix2 {
    std::size_t n = 0;
    std::vector<std::size_t> bit_reverse;
    std::vector<std::complex<double>> twiddle;  // exp(-2 pi i k / n), k < n/2

    explicit Radix2(std::size_t len = 0);
    void transform(std::span<std::complex<double>> data, bool inverse) const;
  };

  void bluestein(std::span<std::complex<double>> data) const;

  std::size_t n_;
  bool power_of_two_;
  Radix2 radix2_;
  std::vector<std::complex<double>> chirp_;           // exp(+i pi j^2 / n)
  std::vector<std::complex<double>> chirp_spectrum_;  // radix-2 transform of the padded chirp
};

}  // namespace fesf

#include "fesf/ihm.hpp"

#include <cmath>
#include <string>

#include "fesf/error.hpp"
#include "fesf/simd.hpp"
#include "fesf/spectral.hpp"

namespace fesf::ihm {

FrequencyMask::FrequencyMask(std::size_t height, std::size_t width, std::vector<std::uint8_t> cells)
    : height_(height), width_(width), cells_(std::move(cells)) {
  if (cells_.size() != height_ * width_) throw ValidationError("mask cell count does not match its shape");
}

bool FrequencyMask::at_frequency(long m, long n) const {
  const long row = m + static_cast<long>(height_ / 2);
  const long col = n + static_cast<long>(width_ / 2);
  if (row < 0 || col < 0 || row >= static_cast<long>(height_) || col >= static_cast<long>(width_)) return false;
  return at(static_cast<std::size_t>(row), static_cast<std::size_t>(col));
}

std::size_t FrequencyMask::count() const {
  std::size_t n = 0;
  for (auto v : cells_) n += v;
  return n;
}

void HidingParams::validate(const char* label) const {
  if (!(alpha >= 0.0 && alpha <= 0.5)) {
    throw ValidationError(std::string(label) + ": alpha=" + std::to_string(alpha) +
                          " is outside the valid range [0, 0.5]");
  }
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw ValidationError(std::string(label) + ": beta=" + std::to_string(beta) + " is outside the valid range [0, 1]");
  }
}

FrequencyMask build_mask(std::size_t height, std::size_t width, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 0.5)) {
    throw ValidationError("alpha=" + std::to_string(alpha) + " is outside the valid range [0, 0.5]");
  }
  if (height == 0 || width == 0) throw ValidationError("mask dimensions must be positive");
  // Integer m satisfies |m| <= alpha*H exactly when |m| <= floor(alpha*H).
  const long reach_m = static_cast<long>(std::floor(alpha * static_cast<double>(height)));
  const long reach_n = static_cast<long>(std::floor(alpha * static_cast<double>(width)));
  const long centre_m = static_cast<long>(height / 2);
  const long centre_n = static_cast<long>(width / 2);
  std::vector<std::uint8_t> cells(height * width, 0);
  for (std::size_t row = 0; row < height; ++row) {
    const long m = static_cast<long>(row) - centre_m;
    if (std::labs(m) > reach_m) continue;
    for (std::size_t col = 0; col < width; ++col) {
      const long n = static_cast<long>(col) - centre_n;
      cells[row * width + col] = std::labs(n) <= reach_n ? 1 : 0;
    }
  }
  return FrequencyMask(height, width, std::move(cells));
}

std::vector<double> blend_amplitude(const Shape& shape, std::span<const double> host_amplitude,
                                    std::span<const double> plain_amplitude, const FrequencyMask& mask,
                                    double beta) {
  if (host_amplitude.size() != shape.size() || plain_amplitude.size() != shape.size()) {
    throw ValidationError("blend_amplitude: amplitude arrays do not match shape " + to_string(shape));
  }
  if (mask.height() != shape.height || mask.width() != shape.width) {
    throw ValidationError("blend_amplitude: mask shape does not match amplitude shape " + to_string(shape));
  }
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw ValidationError("beta=" + std::to_string(beta) + " is outside the valid range [0, 1]");
  }
  std::vector<double> out(shape.size());
  const std::size_t plane = shape.plane();
  const auto& k = simd::active();
  for (std::size_t c = 0; c < shape.channels; ++c) {
    const std::size_t off = c * plane;
    k.blend_masked(host_amplitude.data() + off, plain_amplitude.data() + off, mask.cells().data(), beta,
                   out.data() + off, plane);
  }
  return out;
}

HideResult hide_detailed(const Image& plaintext, const Image& host, const HidingParams& params) {
  params.validate();
  require_same_shape(plaintext.shape(), host.shape(), "hide");
  const auto host_ap = spectral::decompose(spectral::fft2(host));
  const auto plain_ap = spectral::decompose(spectral::fft2(plaintext));
  const auto mask = build_mask(host.height(), host.width(), params.alpha);

  AmplitudePhase synthetic{host.shape(),
                           blend_amplitude(host.shape(), host_ap.amplitude, plain_ap.amplitude, mask, params.beta),
                           host_ap.phase};
  auto inverse = spectral::ifft2(spectral::recompose(synthetic));
  HideResult result{inverse.image, std::move(inverse.image), inverse.max_imaginary};
  simd::clamp01(result.image.data());
  return result;
}

Image hide(const Image& plaintext, const Image& host, const HidingParams& params) {
  return std::move(hide_detailed(plaintext, host, params).image);
}

Image refine(const Image& surrogate, const Image& plaintext, const HidingParams& params_prime) {
  return hide(plaintext, surrogate, params_prime);
}

}  // namespace fesf::ihm

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fesf/image.hpp"

// Image hiding: mask-gated blending of low-frequency amplitude spectra.
//
// The plaintext's amplitude is mixed into the host's amplitude inside a
// centered rectangle of the spectrum, the host's phase is kept, and the
// result is transformed back and clamped to [0,1]. The refinement pass is the
// same operation with the enhanced surrogate as carrier.

namespace fesf::ihm {

/// Binary H x W mask over centered frequency coordinates.
class FrequencyMask {
 public:
  FrequencyMask(std::size_t height, std::size_t width, std::vector<std::uint8_t> cells);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  bool at(std::size_t row, std::size_t col) const { return cells_[row * width_ + col] != 0; }
  /// Lookup by signed centered frequency.
  bool at_frequency(long m, long n) const;
  std::span<const std::uint8_t> cells() const { return cells_; }
  std::size_t count() const;

 private:
  std::size_t height_;
  std::size_t width_;
  std::vector<std::uint8_t> cells_;
};

struct HidingParams {
  double alpha = 0.5;  // mask half-extent as a fraction of H and W, in [0, 0.5]
  double beta = 0.5;   // plaintext share of the blended amplitude, in [0, 1]

  /// Throws ValidationError naming the offending field and its valid range.
  void validate(const char* label = "alpha/beta") const;
  friend bool operator==(const HidingParams&, const HidingParams&) = default;
};

/// Defaults for the first hiding pass and for refinement.
inline constexpr HidingParams kDefaultHiding{0.5, 0.5};
inline constexpr HidingParams kDefaultRefine{0.5, 0.1};

/// M(m, n) = 1 iff |m| <= alpha*H and |n| <= alpha*W on centered integer coordinates.
FrequencyMask build_mask(std::size_t height, std::size_t width, double alpha);

/// [(1-beta) A_host + beta A_plain] * M + A_host * (1 - M), with the mask
/// broadcast over channels. Arrays use the Spectrum layout for `shape`.
std::vector<double> blend_amplitude(const Shape& shape, std::span<const double> host_amplitude,
                                    std::span<const double> plain_amplitude, const FrequencyMask& mask,
                                    double beta);

struct HideResult {
  Image image;           // clamped to [0,1]
  Image unclamped;       // real part of the inverse transform
  double max_imaginary;  // discarded imaginary residue
};

/// Full hiding pass with diagnostics.
HideResult hide_detailed(const Image& plaintext, const Image& host, const HidingParams& params);

/// Plaintext amplitude hidden in the host; output in [0,1]. Shapes must match.
Image hide(const Image& plaintext, const Image& host, const HidingParams& params);

/// Low-intensity second pass: the surrogate carries, the plaintext amplitude
/// is re-embedded at params_prime.beta.
Image refine(const Image& surrogate, const Image& plaintext, const HidingParams& params_prime = kDefaultRefine);

}  // namespace fesf::ihm

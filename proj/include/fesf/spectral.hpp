#pragma once

#include "fesf/image.hpp"

// Per-channel 2D DFT with centered (DC-in-the-middle) storage, plus the
// amplitude/phase split and its Euler recomposition. All functions are pure.

namespace fesf::spectral {

/// Unnormalized forward 2D DFT of every channel, shifted so DC lands at
/// (floor(H/2), floor(W/2)). Rejects non-finite input.
Spectrum fft2(const Image& image);

struct InverseResult {
  Image image;
  /// Largest |imaginary part| discarded when taking the real output.
  double max_imaginary = 0.0;
};

/// Unshift, inverse 2D DFT with 1/(H*W), keep the real part. No clamping.
InverseResult ifft2(const Spectrum& spectrum);

/// Modulus and argument per bin; zero bins get phase 0.
AmplitudePhase decompose(const Spectrum& spectrum);

/// amplitude * (cos(phase) + i sin(phase)). Rejects negative amplitude.
Spectrum recompose(const AmplitudePhase& ap);

}  // namespace fesf::spectral

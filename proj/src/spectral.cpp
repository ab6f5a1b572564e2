#include "fesf/spectral.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fesf/error.hpp"
#include "fesf/fft.hpp"
#include "fesf/simd.hpp"

namespace fesf::spectral {
namespace {

using cd = std::complex<double>;

// Transforms one H x W plane (row-major) in place along both axes.
void transform_plane(std::span<cd> plane, std::size_t height, std::size_t width, const FftPlan& rows,
                     const FftPlan& cols, bool inverse) {
  for (std::size_t h = 0; h < height; ++h) {
    auto row = plane.subspan(h * width, width);
    inverse ? rows.inverse(row) : rows.forward(row);
  }
  std::vector<cd> column(height);
  for (std::size_t w = 0; w < width; ++w) {
    for (std::size_t h = 0; h < height; ++h) column[h] = plane[h * width + w];
    inverse ? cols.inverse(column) : cols.forward(column);
    for (std::size_t h = 0; h < height; ++h) plane[h * width + w] = column[h];
  }
}

}  // namespace

Spectrum fft2(const Image& image) {
  image.validate();
  const Shape shape = image.shape();
  const std::size_t height = shape.height;
  const std::size_t width = shape.width;
  const FftPlan rows(width);
  const FftPlan cols(height);

  Spectrum out(shape);
  std::vector<cd> plane(shape.plane());
  for (std::size_t c = 0; c < shape.channels; ++c) {
    const auto src = image.channel(c);
    for (std::size_t i = 0; i < plane.size(); ++i) plane[i] = {src[i], 0.0};
    transform_plane(plane, height, width, rows, cols, false);
    for (std::size_t k = 0; k < height; ++k) {
      const std::size_t row = (k + height / 2) % height;
      for (std::size_t l = 0; l < width; ++l) {
        out.at(c, row, (l + width / 2) % width) = plane[k * width + l];
      }
    }
  }
  return out;
}

InverseResult ifft2(const Spectrum& spectrum) {
  const Shape shape = spectrum.shape();
  const std::size_t height = shape.height;
  const std::size_t width = shape.width;
  if (shape.size() == 0) throw ValidationError("spectrum is empty");
  const FftPlan rows(width);
  const FftPlan cols(height);
  const double scale = 1.0 / static_cast<double>(height * width);

  InverseResult result{Image(shape), 0.0};
  std::vector<cd> plane(shape.plane());
  for (std::size_t c = 0; c < shape.channels; ++c) {
    for (std::size_t k = 0; k < height; ++k) {
      const std::size_t row = (k + height / 2) % height;
      for (std::size_t l = 0; l < width; ++l) {
        plane[k * width + l] = spectrum.at(c, row, (l + width / 2) % width);
      }
    }
    transform_plane(plane, height, width, rows, cols, true);
    auto dst = result.image.channel(c);
    for (std::size_t i = 0; i < plane.size(); ++i) {
      dst[i] = plane[i].real() * scale;
      result.max_imaginary = std::max(result.max_imaginary, std::abs(plane[i].imag() * scale));
    }
  }
  return result;
}

AmplitudePhase decompose(const Spectrum& spectrum) {
  const std::size_t n = spectrum.size();
  AmplitudePhase ap{spectrum.shape(), std::vector<double>(n), std::vector<double>(n)};
  const auto data = spectrum.data();
  simd::active().magnitude(reinterpret_cast<const double*>(data.data()), ap.amplitude.data(), n);
  for (std::size_t i = 0; i < n; ++i) {
    // atan2(+-0, +-0) can return +-pi; pin zero bins to phase 0.
    double phase = (data[i].real() == 0.0 && data[i].imag() == 0.0) ? 0.0 : std::arg(data[i]);
    if (phase == -std::numbers::pi) phase = std::numbers::pi;  // keep the range half-open at -pi
    ap.phase[i] = phase;
  }
  return ap;
}

Spectrum recompose(const AmplitudePhase& ap) {
  const std::size_t n = ap.shape.size();
  if (ap.amplitude.size() != n || ap.phase.size() != n) {
    throw ValidationError("amplitude/phase arrays do not match shape " + to_string(ap.shape));
  }
  Spectrum out(ap.shape);
  auto data = out.data();
  for (std::size_t i = 0; i < n; ++i) {
    const double a = ap.amplitude[i];
    if (!(a >= 0.0) || !std::isfinite(a)) {
      throw ValidationError("amplitude must be finite and nonnegative (flat index " + std::to_string(i) + ")");
    }
    data[i] = {a * std::cos(ap.phase[i]), a * std::sin(ap.phase[i])};
  }
  return out;
}

}  // namespace fesf::spectral

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fesf {

/// Shape of a channel-major C x H x W raster.
struct Shape {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t plane() const { return height * width; }
  std::size_t size() const { return channels * height * width; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& s);

/// Real-valued C x H x W raster, nominally in [0,1]. Values are stored
/// channel-major: index = (c * H + h) * W + w.
class Image {
 public:
  Image() = default;
  Image(Shape shape, double fill = 0.0);
  Image(Shape shape, std::vector<double> data);

  const Shape& shape() const { return shape_; }
  std::size_t channels() const { return shape_.channels; }
  std::size_t height() const { return shape_.height; }
  std::size_t width() const { return shape_.width; }
  std::size_t size() const { return data_.size(); }

  double& at(std::size_t c, std::size_t h, std::size_t w) {
    return data_[(c * shape_.height + h) * shape_.width + w];
  }
  double at(std::size_t c, std::size_t h, std::size_t w) const {
    return data_[(c * shape_.height + h) * shape_.width + w];
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::span<double> channel(std::size_t c) { return std::span(data_).subspan(c * shape_.plane(), shape_.plane()); }
  std::span<const double> channel(std::size_t c) const {
    return std::span(data_).subspan(c * shape_.plane(), shape_.plane());
  }

  /// Throws ValidationError unless every value is finite and the shape is non-empty.
  void validate() const;

  friend bool operator==(const Image&, const Image&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// Complex C x H x W frequency data in centered coordinates: the DC term of
/// each channel sits at row floor(H/2), column floor(W/2).
class Spectrum {
 public:
  Spectrum() = default;
  explicit Spectrum(Shape shape);
  Spectrum(Shape shape, std::vector<std::complex<double>> data);

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }

  std::complex<double>& at(std::size_t c, std::size_t row, std::size_t col) {
    return data_[(c * shape_.height + row) * shape_.width + col];
  }
  std::complex<double> at(std::size_t c, std::size_t row, std::size_t col) const {
    return data_[(c * shape_.height + row) * shape_.width + col];
  }

  /// Value at signed centered frequency (m, n), m in [-floor(H/2), ceil(H/2)-1].
  std::complex<double> at_frequency(std::size_t c, long m, long n) const;

  std::span<std::complex<double>> data() { return data_; }
  std::span<const std::complex<double>> data() const { return data_; }

 private:
  Shape shape_;
  std::vector<std::complex<double>> data_;
};

/// Element-wise polar form of a Spectrum. Same layout as Spectrum.
struct AmplitudePhase {
  Shape shape;
  std::vector<double> amplitude;
  std::vector<double> phase;
};

/// Throws ValidationError naming `what` when the shapes differ.
void require_same_shape(const Shape& a, const Shape& b, const char* what);

/// Largest absolute element-wise difference; shapes must match.
double max_abs_diff(const Image& a, const Image& b);

}  // namespace fesf

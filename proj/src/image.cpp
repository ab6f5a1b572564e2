#include "fesf/image.hpp"

#include <cmath>
#include <string>

#include "fesf/error.hpp"

namespace fesf {

std::string to_string(const Shape& s) {
  return std::to_string(s.channels) + "x" + std::to_string(s.height) + "x" + std::to_string(s.width);
}

Image::Image(Shape shape, double fill) : shape_(shape), data_(shape.size(), fill) {}

Image::Image(Shape shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.size()) {
    throw ValidationError("image data length " + std::to_string(data_.size()) + " does not match shape " +
                          to_string(shape_));
  }
}

void Image::validate() const {
  if (shape_.size() == 0) throw ValidationError("image is empty");
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw ValidationError("image contains a non-finite value at flat index " + std::to_string(i));
    }
  }
}

Spectrum::Spectrum(Shape shape) : shape_(shape), data_(shape.size()) {}

Spectrum::Spectrum(Shape shape, std::vector<std::complex<double>> data) : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.size()) {
    throw ValidationError("spectrum data length does not match shape " + to_string(shape_));
  }
}

std::complex<double> Spectrum::at_frequency(std::size_t c, long m, long n) const {
  const long rows = static_cast<long>(shape_.height);
  const long cols = static_cast<long>(shape_.width);
  const long row = m + rows / 2;
  const long col = n + cols / 2;
  if (row < 0 || row >= rows || col < 0 || col >= cols) {
    throw ValidationError("centered frequency index out of range");
  }
  return at(c, static_cast<std::size_t>(row), static_cast<std::size_t>(col));
}

void require_same_shape(const Shape& a, const Shape& b, const char* what) {
  if (!(a == b)) {
    throw ValidationError(std::string(what) + ": shape mismatch (" + to_string(a) + " vs " + to_string(b) + ")");
  }
}

double max_abs_diff(const Image& a, const Image& b) {
  require_same_shape(a.shape(), b.shape(), "max_abs_diff");
  double worst = 0.0;
  const auto x = a.data();
  const auto y = b.data();
  for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(x[i] - y[i]));
  return worst;
}

}  // namespace fesf

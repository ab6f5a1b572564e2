#include "fesf/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <vector>

#include "fesf/error.hpp"

namespace fesf::io {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

// 1D resampling weights: output o reads sum_k weight[k] * in[first + k].
struct Taps {
  std::size_t first;
  std::vector<double> weight;
};

std::vector<Taps> resample_taps(std::size_t in, std::size_t out) {
  std::vector<Taps> taps(out);
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  for (std::size_t o = 0; o < out; ++o) {
    if (out <= in) {
      const double lo = static_cast<double>(o) * scale;
      const double hi = static_cast<double>(o + 1) * scale;
      const auto first = static_cast<std::size_t>(std::floor(lo));
      const auto last = std::min(in, static_cast<std::size_t>(std::ceil(hi)));
      taps[o].first = first;
      for (std::size_t s = first; s < last; ++s) {
        const double overlap = std::min(hi, static_cast<double>(s + 1)) - std::max(lo, static_cast<double>(s));
        taps[o].weight.push_back(overlap / scale);
      }
    } else {
      double src = (static_cast<double>(o) + 0.5) * scale - 0.5;
      src = std::clamp(src, 0.0, static_cast<double>(in - 1));
      const auto first = std::min(static_cast<std::size_t>(std::floor(src)), in - 1);
      const double frac = src - static_cast<double>(first);
      taps[o].first = first;
      if (first + 1 < in && frac > 0.0) {
        taps[o].weight = {1.0 - frac, frac};
      } else {
        taps[o].weight = {1.0};
      }
    }
  }
  return taps;
}

}  // namespace

Image read_png(const std::filesystem::path& path) {
  File file(std::fopen(path.c_str(), "rb"));
  if (!file) throw IoError("cannot open image " + path.string());
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw IoError("not a PNG file: " + path.string());
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng initialisation failed");
  }
  std::vector<png_byte> pixels;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("corrupt PNG: " + path.string());
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  png_set_expand(png);
  png_set_strip_alpha(png);
  if (png_get_bit_depth(png, info) == 16) png_set_swap(png);  // native little-endian 16-bit samples
  png_read_update_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  const std::size_t channels = (color & PNG_COLOR_MASK_COLOR) ? 3 : 1;
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  pixels.resize(rowbytes * height);
  rows.resize(height);
  for (png_uint_32 r = 0; r < height; ++r) rows[r] = pixels.data() + r * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Image image(Shape{channels, height, width});
  const double scale = depth == 16 ? 1.0 / 65535.0 : 1.0 / 255.0;
  for (std::size_t r = 0; r < height; ++r) {
    const png_byte* row = rows[r];
    for (std::size_t col = 0; col < width; ++col) {
      for (std::size_t c = 0; c < channels; ++c) {
        const std::size_t idx = col * channels + c;
        double v;
        if (depth == 16) {
          std::uint16_t s;
          std::memcpy(&s, row + 2 * idx, 2);
          v = s;
        } else {
          v = row[idx];
        }
        image.at(c, r, col) = v * scale;
      }
    }
  }
  return image;
}

void write_png(const std::filesystem::path& path, const Image& image) {
  const std::size_t channels = image.channels();
  if (channels != 1 && channels != 3) throw ValidationError("write_png supports 1 or 3 channels, got " + std::to_string(channels));
  if (image.size() == 0) throw ValidationError("write_png: empty image");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());

  const std::size_t height = image.height();
  const std::size_t width = image.width();
  std::vector<png_byte> pixels(height * width * channels * 2);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t col = 0; col < width; ++col) {
      for (std::size_t c = 0; c < channels; ++c) {
        const double v = std::clamp(image.at(c, r, col), 0.0, 1.0);
        const auto s = static_cast<std::uint16_t>(std::lround(v * 65535.0));
        const std::size_t idx = ((r * width + col) * channels + c) * 2;
        pixels[idx] = static_cast<png_byte>(s >> 8);  // PNG stores big-endian
        pixels[idx + 1] = static_cast<png_byte>(s & 0xff);
      }
    }
  }
  std::vector<png_bytep> rows(height);
  for (std::size_t r = 0; r < height; ++r) rows[r] = pixels.data() + r * width * channels * 2;

  File file(std::fopen(path.c_str(), "wb"));
  if (!file) throw IoError("cannot write image " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("failed encoding PNG " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 16,
               channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Image convert_channels(const Image& image, std::size_t channels) {
  if (image.channels() == channels) return image;
  if (channels == 0) throw ValidationError("cannot convert to zero channels");
  const Shape shape{channels, image.height(), image.width()};
  Image out(shape);
  if (image.channels() == 1) {
    for (std::size_t c = 0; c < channels; ++c) {
      std::copy(image.channel(0).begin(), image.channel(0).end(), out.channel(c).begin());
    }
    return out;
  }
  if (channels == 1) {
    auto dst = out.channel(0);
    for (std::size_t c = 0; c < image.channels(); ++c) {
      const auto src = image.channel(c);
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
    for (auto& v : dst) v /= static_cast<double>(image.channels());
    return out;
  }
  throw ValidationError("cannot convert " + std::to_string(image.channels()) + " channels to " +
                        std::to_string(channels));
}

Image resize(const Image& image, std::size_t height, std::size_t width) {
  if (height == 0 || width == 0) throw ValidationError("resize target must be non-empty");
  if (image.height() == height && image.width() == width) return image;
  const auto row_taps = resample_taps(image.height(), height);
  const auto col_taps = resample_taps(image.width(), width);
  Image out(Shape{image.channels(), height, width});
  std::vector<double> tmp(image.height() * width);
  for (std::size_t c = 0; c < image.channels(); ++c) {
    const auto src = image.channel(c);
    for (std::size_t r = 0; r < image.height(); ++r) {
      for (std::size_t o = 0; o < width; ++o) {
        double acc = 0.0;
        const auto& t = col_taps[o];
        for (std::size_t k = 0; k < t.weight.size(); ++k) acc += t.weight[k] * src[r * image.width() + t.first + k];
        tmp[r * width + o] = acc;
      }
    }
    auto dst = out.channel(c);
    for (std::size_t o = 0; o < height; ++o) {
      const auto& t = row_taps[o];
      for (std::size_t col = 0; col < width; ++col) {
        double acc = 0.0;
        for (std::size_t k = 0; k < t.weight.size(); ++k) acc += t.weight[k] * tmp[(t.first + k) * width + col];
        dst[o * width + col] = acc;
      }
    }
  }
  return out;
}

Image read_png_as(const std::filesystem::path& path, const Shape& shape) {
  Image img = convert_channels(read_png(path), shape.channels);
  return resize(img, shape.height, shape.width);
}

}  // namespace fesf::io

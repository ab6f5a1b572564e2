#pragma once

#include <filesystem>

#include "fesf/image.hpp"

namespace fesf::io {

/// Decodes a PNG (gray, gray+alpha, RGB, RGBA or palette; 1-16 bit) into
/// values in [0,1]. Alpha is dropped. Gray gives 1 channel, colour 3.
Image read_png(const std::filesystem::path& path);

/// Writes a 16-bit gray (C=1) or RGB (C=3) PNG. Values are clamped to [0,1]
/// and rounded to the nearest 1/65535. No timestamp chunk is emitted.
void write_png(const std::filesystem::path& path, const Image& image);

/// Replicates gray to `channels` or averages colour down to one channel.
Image convert_channels(const Image& image, std::size_t channels);

/// Area averaging when shrinking, bilinear (half-pixel centres) when growing;
/// each axis handled independently.
Image resize(const Image& image, std::size_t height, std::size_t width);

/// read_png, then convert_channels and resize to `shape` as needed.
Image read_png_as(const std::filesystem::path& path, const Shape& shape);

}  // namespace fesf::io

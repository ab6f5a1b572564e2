#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "fesf/image.hpp"

// Procedural stand-ins for real data, so demos and acceptance runs need no
// downloads. Every generator is a pure function of its arguments.

namespace fesf::toy {

/// Smooth multi-scale texture with a few soft blobs, values in [0.2, 0.8].
Image host_image(const Shape& shape, std::uint64_t seed);

/// Two-class "specimen" image. The class lives in low-frequency amplitude:
/// label 1 is brighter on average (DC) and carries 1.6x the energy in the
/// |m|,|n| <= 3 band, with random phases. Pixel noise and small blobs are
/// class-independent.
Image low_frequency_class_image(const Shape& shape, int label, std::uint64_t seed);

/// Colour-cast domain pair for the enhancer: every synthetic is the host plus
/// a fixed per-channel offset plus small independent noise.
struct ColorCastTask {
  Image host;
  std::vector<Image> train;
  std::vector<Image> held_out;
  std::array<double, 3> cast;
};
ColorCastTask color_cast_task(std::size_t size, std::size_t train_count, std::size_t held_out_count,
                              std::uint64_t seed);

/// Writes root/class_0/img_NNN.png and root/class_1/img_NNN.png, `per_class` each.
void write_class_dataset(const std::filesystem::path& root, const Shape& shape, std::size_t per_class,
                         std::uint64_t seed);

}  // namespace fesf::toy

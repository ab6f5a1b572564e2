#include "fesf/toy_data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "fesf/image_io.hpp"
#include "fesf/nn.hpp"

namespace fesf::toy {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void add_blob(Image& img, double cy, double cx, double radius, std::span<const double> strength) {
  for (std::size_t c = 0; c < img.channels(); ++c) {
    for (std::size_t h = 0; h < img.height(); ++h) {
      for (std::size_t w = 0; w < img.width(); ++w) {
        const double dy = static_cast<double>(h) - cy;
        const double dx = static_cast<double>(w) - cx;
        img.at(c, h, w) += strength[c] * std::exp(-(dy * dy + dx * dx) / (2.0 * radius * radius));
      }
    }
  }
}

void normalise_into(Image& img, double lo, double hi) {
  const auto d = img.data();
  const auto [mn, mx] = std::minmax_element(d.begin(), d.end());
  const double span = *mx - *mn;
  const double base = *mn;
  for (auto& v : d) v = span > 0.0 ? lo + (hi - lo) * (v - base) / span : (lo + hi) / 2.0;
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

Image host_image(const Shape& shape, std::uint64_t seed) {
  nn::Rng rng(mix(seed, 1));
  Image img(shape);
  const double H = static_cast<double>(shape.height);
  const double W = static_cast<double>(shape.width);
  for (int k = 0; k < 6; ++k) {
    const double fy = rng.uniform(0.5, 4.0);
    const double fx = rng.uniform(0.5, 4.0);
    const double phase = rng.uniform(0.0, kTwoPi);
    const double amp = rng.uniform(0.5, 1.0) / (1.0 + 0.3 * k);
    std::vector<double> tint(shape.channels);
    for (auto& t : tint) t = rng.uniform(0.6, 1.0);
    for (std::size_t c = 0; c < shape.channels; ++c) {
      for (std::size_t h = 0; h < shape.height; ++h) {
        for (std::size_t w = 0; w < shape.width; ++w) {
          img.at(c, h, w) += amp * tint[c] * std::cos(kTwoPi * (fy * static_cast<double>(h) / H + fx * static_cast<double>(w) / W) + phase);
        }
      }
    }
  }
  for (int b = 0; b < 4; ++b) {
    std::vector<double> strength(shape.channels);
    for (auto& s : strength) s = rng.uniform(0.5, 1.2);
    add_blob(img, rng.uniform(0.0, H), rng.uniform(0.0, W), rng.uniform(0.06, 0.15) * std::min(H, W), strength);
  }
  normalise_into(img, 0.2, 0.8);
  return img;
}

Image low_frequency_class_image(const Shape& shape, int label, std::uint64_t seed) {
  nn::Rng rng(mix(seed, 2));
  Image img(shape);
  const double H = static_cast<double>(shape.height);
  const double W = static_cast<double>(shape.width);
  const double gain = label == 1 ? 1.6 : 1.0;
  std::vector<double> tint(shape.channels);
  for (std::size_t c = 0; c < shape.channels; ++c) tint[c] = 0.85 + 0.1 * static_cast<double>(c % 3);

  const double level = 0.42 + (label == 1 ? 0.05 : 0.0) + rng.uniform(-0.03, 0.03);
  for (auto& v : img.data()) v = level;
  // Half-plane of the |m|,|n| <= 3 band; the conjugate bins follow from using cos().
  for (int m = -3; m <= 3; ++m) {
    for (int n = 0; n <= 3; ++n) {
      if (n == 0 && m <= 0) continue;
      const double amp = 0.05 * gain * rng.uniform(0.7, 1.3) / (1.0 + 0.5 * (std::abs(m) + n));
      const double phase = rng.uniform(0.0, kTwoPi);
      const double fm = m;
      const double fn = n;
      for (std::size_t c = 0; c < shape.channels; ++c) {
        for (std::size_t h = 0; h < shape.height; ++h) {
          for (std::size_t w = 0; w < shape.width; ++w) {
            img.at(c, h, w) += tint[c] * amp * std::cos(kTwoPi * (fm * static_cast<double>(h) / H + fn * static_cast<double>(w) / W) + phase);
          }
        }
      }
    }
  }
  const int blobs = 3 + static_cast<int>(rng.below(3));
  for (int b = 0; b < blobs; ++b) {
    std::vector<double> strength(shape.channels);
    const double s = rng.uniform(-0.15, 0.15);
    for (std::size_t c = 0; c < shape.channels; ++c) strength[c] = s * tint[c];
    add_blob(img, rng.uniform(0.0, H), rng.uniform(0.0, W), rng.uniform(0.03, 0.08) * std::min(H, W), strength);
  }
  for (auto& v : img.data()) v = std::clamp(v + 0.03 * rng.normal(), 0.0, 1.0);
  return img;
}

ColorCastTask color_cast_task(std::size_t size, std::size_t train_count, std::size_t held_out_count,
                              std::uint64_t seed) {
  ColorCastTask task;
  task.host = host_image(Shape{3, size, size}, seed);
  task.cast = {0.12, -0.06, -0.10};
  nn::Rng rng(mix(seed, 3));
  auto make = [&]() {
    Image x = task.host;
    for (std::size_t c = 0; c < 3; ++c) {
      for (auto& v : x.channel(c)) v = std::clamp(v + task.cast[c] + 0.02 * rng.normal(), 0.0, 1.0);
    }
    return x;
  };
  for (std::size_t i = 0; i < train_count; ++i) task.train.push_back(make());
  for (std::size_t i = 0; i < held_out_count; ++i) task.held_out.push_back(make());
  return task;
}

void write_class_dataset(const std::filesystem::path& root, const Shape& shape, std::size_t per_class,
                         std::uint64_t seed) {
  for (int label = 0; label < 2; ++label) {
    const auto dir = root / ("class_" + std::to_string(label));
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < per_class; ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "img_%03zu.png", i);
      const std::uint64_t image_seed = mix(seed, 1000 + 2 * i + static_cast<std::uint64_t>(label));
      io::write_png(dir / name, low_frequency_class_image(shape, label, image_seed));
    }
  }
}

}  // namespace fesf::toy

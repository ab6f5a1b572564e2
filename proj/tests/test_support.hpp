#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>

#include "fesf/image.hpp"
#include "fesf/nn.hpp"

namespace fesf::testing {

/// Uniform random image in [lo, hi).
inline Image random_image(const Shape& shape, nn::Rng& rng, double lo = 0.0, double hi = 1.0) {
  Image img(shape);
  for (auto& v : img.data()) v = rng.uniform(lo, hi);
  return img;
}

/// Fresh scratch directory under FESF_TEST_TMP (or the system temp dir).
inline std::filesystem::path scratch_dir(const std::string& name) {
  const char* base = std::getenv("FESF_TEST_TMP");
  const std::filesystem::path root = base ? std::filesystem::path(base) : std::filesystem::temp_directory_path() / "fesf_tests";
  const auto dir = root / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fesf::testing

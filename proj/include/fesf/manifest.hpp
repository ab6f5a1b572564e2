#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fesf/ihm.hpp"
#include "fesf/image.hpp"

namespace fesf {

inline constexpr int kManifestSchemaVersion = 1;
inline constexpr const char* kPipelineVersion = "fesf-0.1.0";

enum class Split { train, test };
const char* to_string(Split s);
Split split_from_string(const std::string& s);

/// One plaintext image and the three artifacts derived from it. Paths are
/// stored relative to the manifest's directory.
struct ManifestEntry {
  std::string plaintext_id;
  std::string plaintext_path;
  std::string host_id;
  std::string synthetic_path;
  std::string surrogate_path;
  std::string refined_path;
  ihm::HidingParams params;
  ihm::HidingParams params_prime;
  std::string label;
  Split split = Split::train;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct SurrogateManifest {
  int schema_version = kManifestSchemaVersion;
  std::string pipeline_version = kPipelineVersion;
  std::string dataset_label;
  std::uint64_t seed = 0;
  std::string host_path;
  /// Shape every artifact and the resized plaintext share.
  Shape shape;
  /// "trained-per-run", "loaded:<path>" or "none".
  std::string enhancer;
  std::vector<ManifestEntry> entries;
  /// Directory the relative paths resolve against.
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::string& relative) const { return base_dir / relative; }
  std::vector<std::string> labels() const;
};

/// Line-delimited JSON: one header record, then one record per entry.
void write_manifest(const SurrogateManifest& manifest, const std::filesystem::path& path);
SurrogateManifest read_manifest(const std::filesystem::path& path);

}  // namespace fesf

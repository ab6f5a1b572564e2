#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fesf/ihm.hpp"
#include "fesf/image.hpp"
#include "fesf/iqem.hpp"
#include "fesf/manifest.hpp"
#include "fesf/metrics.hpp"

namespace fesf::pipeline {

enum class SplitMode {
  /// Train iff hash(id, seed) < train fraction. An image's assignment never
  /// depends on the other images; split sizes match the ratio only on average.
  hashed,
  /// Rank by hash(id, seed) and cut at round(N * train fraction). Exact
  /// sizes; adding images can move the cut.
  exact,
};

struct DatasetSpec {
  std::filesystem::path root;
  /// CSV "path,label" with paths relative to root. Absent: one subdirectory per class.
  std::optional<std::filesystem::path> label_table;
  std::size_t height = 512;
  std::size_t width = 512;
  std::size_t channels = 3;
  double train_ratio = 6.0;
  double test_ratio = 4.0;
  std::uint64_t split_seed = 0;
  SplitMode split_mode = SplitMode::hashed;

  void validate() const;
  double train_fraction() const { return train_ratio / (train_ratio + test_ratio); }
};

struct DatasetItem {
  std::string id;  // path relative to the dataset root, '/' separated
  std::filesystem::path path;
  std::string label;
  Split split = Split::train;
  Image image;  // converted and resized to the dataset shape
};

struct Dataset {
  Shape shape;
  std::vector<DatasetItem> items;  // sorted by id
  std::vector<std::string> skipped;  // "<id>: <reason>" for unreadable files
};

/// Uniform value in [0,1) from the image id and seed.
double split_hash(const std::string& id, std::uint64_t seed);
Split assign_split(const std::string& id, std::uint64_t seed, double train_fraction);

/// Decode, convert, resize and split. Unreadable files are skipped and listed;
/// a class with fewer than two readable images is an error.
Dataset ingest(const DatasetSpec& spec);

struct GenerateOptions {
  ihm::HidingParams params = ihm::kDefaultHiding;
  ihm::HidingParams params_prime = ihm::kDefaultRefine;
  std::filesystem::path output_dir;
  std::string dataset_label = "dataset";
  std::uint64_t seed = 0;
  const iqem::EnhancerModel* model = nullptr;
  std::string enhancer_note = "none";
};

struct GenerateResult {
  SurrogateManifest manifest;
  std::vector<metrics::EntryError> failures;
  std::filesystem::path manifest_path;
};

/// Host is resized to the dataset shape and written as output_dir/host.png.
/// Per image: synthetic = hide, surrogate = enhance (or the synthetic when no
/// model), refined = refine; all three are written under output_dir and the
/// manifest goes to output_dir/manifest.jsonl.
GenerateResult generate(const Dataset& dataset, const Image& host, const GenerateOptions& options);

enum class Source { plaintext, surrogate, refined };
const char* to_string(Source s);
Source source_from_string(const std::string& s);

struct ClassificationScores {
  double accuracy = 0.0;
  double precision = 0.0;  // macro
  double recall = 0.0;     // macro
  double f1 = 0.0;         // macro over per-class harmonic means
  std::size_t count = 0;
};

struct UtilityResult {
  std::string classifier;
  Source trained_on = Source::surrogate;
  std::vector<std::string> classes;
  ClassificationScores train;
  ClassificationScores test;
  bool shuffled_labels = false;
};

struct UtilityOptions {
  Source source = Source::surrogate;
  bool shuffle_labels = false;
  std::uint64_t seed = 0;
  std::size_t feature_size = 8;  // images are area-downsampled to feature_size^2 per channel
  std::size_t iterations = 300;
  double learning_rate = 0.5;
  double l2 = 1e-3;
};

/// Scores from predicted/true label indices.
ClassificationScores score_predictions(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& predicted,
                                       std::size_t classes);

/// Trains a softmax classifier on downsampled pixels of the chosen source for
/// the train split and scores it on the same source for the test split.
UtilityResult utility_check(const SurrogateManifest& manifest, const UtilityOptions& options);

/// Loader used for manifests: decodes and conforms to the manifest's image shape.
metrics::ImageLoader manifest_loader(const Shape& shape);
Shape manifest_shape(const SurrogateManifest& manifest);

void write_utility_table(const std::vector<UtilityResult>& results, std::ostream& out);
/// CSV rows: source,shuffled,split,metric,value,count
void write_utility_records(const std::vector<UtilityResult>& results, std::ostream& out);

}  // namespace fesf::pipeline

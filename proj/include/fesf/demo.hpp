#pragma once

#include <filesystem>
#include <vector>

#include "fesf/pipeline.hpp"

namespace fesf::demo {

struct DemoOptions {
  std::filesystem::path output_dir = "fesf_demo";
  std::uint64_t seed = 0;
  std::size_t image_size = 64;
  std::size_t per_class = 12;
  ihm::HidingParams params = ihm::kDefaultHiding;
  ihm::HidingParams params_prime = ihm::kDefaultRefine;
  iqem::TrainConfig enhancer{.epochs = 40};
};

struct DemoResult {
  pipeline::GenerateResult generation;
  metrics::QualityReport report;
  std::vector<pipeline::UtilityResult> utility;
};

/// End to end on generated data:
///   output_dir/dataset/class_{0,1}/   procedural plaintexts
///   output_dir/host_source.png        procedural host
///   output_dir/enhancer.bin           enhancer trained on train-split synthetics
///   output_dir/manifest.jsonl + synthetic/ surrogate/ refined/
///   output_dir/report.{txt,csv}       quality tables
///   output_dir/utility.{txt,csv}      classifier utility per source
DemoResult run_demo(const DemoOptions& options);

}  // namespace fesf::demo

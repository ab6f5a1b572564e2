#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "fesf/ihm.hpp"
#include "fesf/iqem.hpp"
#include "fesf/pipeline.hpp"

namespace fesf {

/// Environment variable that overrides the output root of every subcommand.
inline constexpr const char* kOutputRootEnv = "FESF_OUTPUT_ROOT";

/// Everything a run needs. Loaded from JSON (schema in README), then
/// overridden by the environment and by command-line flags.
struct RunConfig {
  pipeline::DatasetSpec dataset;
  std::string dataset_label = "dataset";
  std::optional<std::filesystem::path> host;
  ihm::HidingParams hiding = ihm::kDefaultHiding;
  ihm::HidingParams refine = ihm::kDefaultRefine;
  bool train_enhancer = true;
  std::optional<std::filesystem::path> model;
  iqem::TrainConfig iqem;
  std::filesystem::path output_root = "fesf_out";
  std::uint64_t seed = 0;

  void validate() const;
};

/// Parses a config file onto the defaults. Unknown keys are rejected; relative
/// paths resolve against the file's directory.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir);

/// Applies kOutputRootEnv when set and non-empty.
void apply_environment(RunConfig& config);

}  // namespace fesf

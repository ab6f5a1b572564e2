#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "fesf/image.hpp"
#include "fesf/nn.hpp"

// Image quality enhancement: a residual conv generator G trained against a
// patch discriminator D so that G(synthetic) looks like the host domain.
//
// Discriminator loss: -mean log D(host) - mean log(1 - D(G(x)))
// Generator loss:     -mean log D(G(x)) + content_weight * mean |G(x) - x|
//
// D outputs one probability per spatial position; means run over every
// position of every image in the batch.

namespace fesf::iqem {

/// Scores are clamped to [kScoreEpsilon, 1 - kScoreEpsilon] before logs.
inline constexpr double kScoreEpsilon = 1e-7;

struct GanLosses {
  double generator = 0.0;
  double discriminator = 0.0;
};

GanLosses gan_losses(std::span<const double> d_real, std::span<const double> d_fake);

struct TrainConfig {
  std::size_t epochs = 200;
  std::size_t batch_size = 4;
  double learning_rate = 0.05;
  double content_weight = 0.5;
  std::uint64_t seed = 0;
  std::size_t patch_size = 32;
  std::uint32_t generator_hidden = 8;
  std::uint32_t discriminator_hidden = 8;

  void validate() const;
};

struct TrainingMeta {
  std::uint64_t seed = 0;
  std::uint64_t epochs = 0;
  std::uint64_t batch_size = 0;
  std::uint64_t patch_size = 0;
  double learning_rate = 0.0;
  double content_weight = 0.0;
  double final_generator_loss = 0.0;
  double final_discriminator_loss = 0.0;

  friend bool operator==(const TrainingMeta&, const TrainingMeta&) = default;
};

/// Generator: conv stack with in == out channels whose output is added to its
/// input. Discriminator: conv stack with one output channel, then sigmoid.
struct EnhancerModel {
  nn::ConvNetDescriptor generator;
  std::vector<double> generator_params;
  nn::ConvNetDescriptor discriminator;
  std::vector<double> discriminator_params;
  TrainingMeta meta;

  std::size_t channels() const { return generator.in_channels; }
  /// Throws ValidationError when parameter lengths disagree with the descriptors.
  void validate() const;
  friend bool operator==(const EnhancerModel&, const EnhancerModel&) = default;
};

/// Identity generator (last layer zero) and a randomly initialised discriminator.
EnhancerModel initial_model(std::size_t channels, const TrainConfig& config);

/// G(x) = x + net(x), not clamped.
Image generator_output(const EnhancerModel& model, const Image& x);

/// Per-position discriminator probabilities for one image.
std::vector<double> discriminator_scores(const EnhancerModel& model, const Image& x);
double mean_discriminator_score(const EnhancerModel& model, const Image& x);

/// Images for one optimisation step.
struct Batch {
  std::vector<Image> real;       // host patches
  std::vector<Image> synthetic;  // synthetic patches fed through G
};

/// Discriminator loss for the batch; when `grad` is non-empty, adds
/// dL/d(discriminator params) into it.
double discriminator_objective(const EnhancerModel& model, const Batch& batch, std::span<double> grad = {});

/// Generator loss (adversarial + content term); when `grad` is non-empty,
/// adds dL/d(generator params) into it.
double generator_objective(const EnhancerModel& model, const Batch& batch, double content_weight,
                           std::span<double> grad = {});

struct EpochStats {
  std::size_t epoch;
  double generator_loss;
  double discriminator_loss;
};
using EpochCallback = std::function<void(const EpochStats&)>;

/// Alternating SGD: one discriminator step then one generator step per batch
/// of random patches. Deterministic for a given seed. Throws TrainingError on
/// a non-finite loss or parameter.
EnhancerModel train_enhancer(std::span<const Image> synthetics, const Image& host, const TrainConfig& config,
                             const EpochCallback& on_epoch = {});

/// clamp01(G(synthetic)).
Image enhance(const EnhancerModel& model, const Image& synthetic);

/// Binary container, little-endian; layout in docs/model_format.md.
void save_model(const EnhancerModel& model, const std::filesystem::path& path);
EnhancerModel load_model(const std::filesystem::path& path);
std::vector<std::uint8_t> serialize_model(const EnhancerModel& model);
EnhancerModel deserialize_model(std::span<const std::uint8_t> bytes);

}  // namespace fesf::iqem

#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fesf/image.hpp"
#include "fesf/manifest.hpp"

namespace fesf::metrics {

struct SsimOptions {
  std::size_t window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

/// Mean SSIM over all positions where the Gaussian window fits entirely
/// inside the image, averaged over channels. Identical inputs give exactly 1.
double ssim(const Image& a, const Image& b, const SsimOptions& options = {});

/// Returned by psnr() for identical images; also the upper cap.
inline constexpr double kPsnrIdentical = 100.0;

/// 10 log10(1 / MSE) with peak 1.0, capped at kPsnrIdentical.
double psnr(const Image& a, const Image& b);

/// Optional perceptual-distance slot (e.g. LPIPS). Absent by default.
using PerceptualMetric = std::function<double(const Image&, const Image&)>;

enum class PairKind { host_vs_refined, host_vs_synthetic, plaintext_vs_refined, plaintext_vs_synthetic };
inline constexpr PairKind kAllPairKinds[] = {PairKind::host_vs_refined, PairKind::host_vs_synthetic,
                                             PairKind::plaintext_vs_refined, PairKind::plaintext_vs_synthetic};
const char* to_string(PairKind kind);

struct PairAggregate {
  PairKind kind = PairKind::host_vs_refined;
  double ssim_mean = 0.0;
  double psnr_mean = 0.0;
  std::optional<double> perceptual_mean;
  std::size_t count = 0;
};

struct EntryError {
  std::string plaintext_id;
  std::string message;
};

struct QualityReport {
  std::string dataset_label;
  std::string population;  // which entries were evaluated, stated explicitly
  std::vector<PairAggregate> pairs;  // in kAllPairKinds order
  std::vector<EntryError> errors;

  const PairAggregate& get(PairKind kind) const;
};

struct EvaluateOptions {
  std::string dataset_label = "dataset";
  /// Restrict to one split; nullopt evaluates every entry.
  std::optional<Split> split;
  PerceptualMetric perceptual;
};

using ImageLoader = std::function<Image(const std::filesystem::path&)>;

/// SSIM and PSNR for every pair kind over the manifest. Entries whose images
/// fail to load or disagree in shape are recorded in `errors` and skipped.
QualityReport evaluate_pairs(const SurrogateManifest& manifest, const ImageLoader& load,
                             const EvaluateOptions& options = {});

/// Two tables (host-referenced, plaintext-referenced) with the expected
/// orderings annotated.
void write_report_table(const QualityReport& report, std::ostream& out);

/// CSV rows: dataset,pair_kind,metric,mean,count
void write_report_records(const QualityReport& report, std::ostream& out);

}  // namespace fesf::metrics

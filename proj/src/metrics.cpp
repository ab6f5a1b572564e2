#include "fesf/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "fesf/error.hpp"
#include "fesf/simd.hpp"

namespace fesf::metrics {
namespace {

std::vector<double> gaussian_window(std::size_t size, double sigma) {
  std::vector<double> g(size);
  const double centre = static_cast<double>(size - 1) / 2.0;
  double total = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    const double d = static_cast<double>(i) - centre;
    g[i] = std::exp(-(d * d) / (2.0 * sigma * sigma));
    total += g[i];
  }
  for (auto& v : g) v /= total;
  return g;
}

// "Valid" separable filtering of one plane: output is (H-k+1) x (W-k+1).
std::vector<double> filter_valid(std::span<const double> plane, std::size_t height, std::size_t width,
                                 const std::vector<double>& g) {
  const std::size_t k = g.size();
  const std::size_t out_w = width - k + 1;
  const std::size_t out_h = height - k + 1;
  std::vector<double> horizontal(height * out_w, 0.0);
  for (std::size_t r = 0; r < height; ++r) {
    std::span<double> dst(horizontal.data() + r * out_w, out_w);
    for (std::size_t t = 0; t < k; ++t) simd::axpy(g[t], plane.subspan(r * width + t, out_w), dst);
  }
  std::vector<double> out(out_h * out_w, 0.0);
  for (std::size_t r = 0; r < out_h; ++r) {
    std::span<double> dst(out.data() + r * out_w, out_w);
    for (std::size_t t = 0; t < k; ++t) {
      simd::axpy(g[t], std::span<const double>(horizontal.data() + (r + t) * out_w, out_w), dst);
    }
  }
  return out;
}

double channel_ssim(std::span<const double> x, std::span<const double> y, std::size_t height, std::size_t width,
                    const std::vector<double>& g, double c1, double c2) {
  const std::size_t n = x.size();
  std::vector<double> xx(n), yy(n), xy(n);
  for (std::size_t i = 0; i < n; ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto mx = filter_valid(x, height, width, g);
  const auto my = filter_valid(y, height, width, g);
  auto vx = filter_valid(xx, height, width, g);
  auto vy = filter_valid(yy, height, width, g);
  auto cxy = filter_valid(xy, height, width, g);
  for (std::size_t i = 0; i < mx.size(); ++i) {
    vx[i] -= mx[i] * mx[i];
    vy[i] -= my[i] * my[i];
    cxy[i] -= mx[i] * my[i];
  }
  std::vector<double> map(mx.size());
  simd::active().ssim_map(mx.data(), my.data(), vx.data(), vy.data(), cxy.data(), c1, c2, map.data(), map.size());
  return simd::sum(map) / static_cast<double>(map.size());
}

}  // namespace

double ssim(const Image& a, const Image& b, const SsimOptions& options) {
  require_same_shape(a.shape(), b.shape(), "ssim");
  if (options.window == 0 || options.window % 2 == 0) throw ValidationError("ssim window must be odd and positive");
  if (a.height() < options.window || a.width() < options.window) {
    throw ValidationError("ssim: image " + to_string(a.shape()) + " is smaller than the " +
                          std::to_string(options.window) + "x" + std::to_string(options.window) + " window");
  }
  if (a.channels() == 0) throw ValidationError("ssim: image has no channels");
  const auto g = gaussian_window(options.window, options.sigma);
  const double c1 = (options.k1 * options.dynamic_range) * (options.k1 * options.dynamic_range);
  const double c2 = (options.k2 * options.dynamic_range) * (options.k2 * options.dynamic_range);
  double total = 0.0;
  for (std::size_t c = 0; c < a.channels(); ++c) {
    total += channel_ssim(a.channel(c), b.channel(c), a.height(), a.width(), g, c1, c2);
  }
  return total / static_cast<double>(a.channels());
}

double psnr(const Image& a, const Image& b) {
  require_same_shape(a.shape(), b.shape(), "psnr");
  if (a.size() == 0) throw ValidationError("psnr: empty image");
  const double mse = simd::sum_sq_diff(a.data(), b.data()) / static_cast<double>(a.size());
  if (mse == 0.0) return kPsnrIdentical;
  return std::min(kPsnrIdentical, 10.0 * std::log10(1.0 / mse));
}

const char* to_string(PairKind kind) {
  switch (kind) {
    case PairKind::host_vs_refined: return "host-vs-refined";
    case PairKind::host_vs_synthetic: return "host-vs-synthetic";
    case PairKind::plaintext_vs_refined: return "plaintext-vs-refined";
    case PairKind::plaintext_vs_synthetic: return "plaintext-vs-synthetic";
  }
  return "?";
}

const PairAggregate& QualityReport::get(PairKind kind) const {
  for (const auto& p : pairs) {
    if (p.kind == kind) return p;
  }
  throw ValidationError(std::string("report has no pair kind ") + to_string(kind));
}

QualityReport evaluate_pairs(const SurrogateManifest& manifest, const ImageLoader& load,
                             const EvaluateOptions& options) {
  if (manifest.entries.empty()) throw ValidationError("evaluate: manifest has no entries");

  QualityReport report;
  report.dataset_label = options.dataset_label;
  report.population = options.split ? std::string(to_string(*options.split)) + " split" : "all entries";
  for (auto kind : kAllPairKinds) {
    PairAggregate agg;
    agg.kind = kind;
    report.pairs.push_back(agg);
  }
  std::vector<double> ssim_sum(4, 0.0), psnr_sum(4, 0.0), perc_sum(4, 0.0);

  std::optional<Image> host;
  try {
    host = load(manifest.resolve(manifest.host_path));
  } catch (const std::exception& ex) {
    throw IoError("evaluate: cannot load host image: " + std::string(ex.what()));
  }

  for (const auto& entry : manifest.entries) {
    if (options.split && entry.split != *options.split) continue;
    try {
      const Image plain = load(manifest.resolve(entry.plaintext_path));
      const Image synthetic = load(manifest.resolve(entry.synthetic_path));
      const Image refined = load(manifest.resolve(entry.refined_path));
      const std::pair<const Image*, const Image*> pairs[] = {
          {&*host, &refined}, {&*host, &synthetic}, {&plain, &refined}, {&plain, &synthetic}};
      double s[4], p[4], q[4] = {0, 0, 0, 0};
      for (int k = 0; k < 4; ++k) {
        s[k] = ssim(*pairs[k].first, *pairs[k].second);
        p[k] = psnr(*pairs[k].first, *pairs[k].second);
        if (options.perceptual) q[k] = options.perceptual(*pairs[k].first, *pairs[k].second);
      }
      for (int k = 0; k < 4; ++k) {
        ssim_sum[k] += s[k];
        psnr_sum[k] += p[k];
        perc_sum[k] += q[k];
        ++report.pairs[k].count;
      }
    } catch (const std::exception& ex) {
      report.errors.push_back({entry.plaintext_id, ex.what()});
    }
  }
  for (std::size_t k = 0; k < 4; ++k) {
    auto& agg = report.pairs[k];
    if (agg.count == 0) continue;
    const double n = static_cast<double>(agg.count);
    agg.ssim_mean = ssim_sum[k] / n;
    agg.psnr_mean = psnr_sum[k] / n;
    if (options.perceptual) agg.perceptual_mean = perc_sum[k] / n;
  }
  if (report.pairs[0].count == 0) throw ValidationError("evaluate: no entry could be evaluated");
  return report;
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void write_table(const QualityReport& r, std::ostream& out, const char* title, PairKind refined, PairKind synthetic,
                 const char* ref_name) {
  const auto& a = r.get(refined);
  const auto& b = r.get(synthetic);
  auto perc = [](const PairAggregate& p) { return p.perceptual_mean ? fixed(*p.perceptual_mean, 4) : std::string("n/a"); };
  char line[256];
  out << title << '\n';
  std::snprintf(line, sizeof line, "%-16s | %-10s %-10s | %-10s %-10s | %-10s %-10s\n", "", "SSIM", "", "PSNR (dB)",
                "", "LPIPS", "");
  out << line;
  const std::string col_a = std::string("(") + ref_name + ",ref)";
  const std::string col_b = std::string("(") + ref_name + ",syn)";
  std::snprintf(line, sizeof line, "%-16s | %-10s %-10s | %-10s %-10s | %-10s %-10s\n", "dataset", col_a.c_str(),
                col_b.c_str(), col_a.c_str(), col_b.c_str(), col_a.c_str(), col_b.c_str());
  out << line;
  std::snprintf(line, sizeof line, "%-16s | %-10s %-10s | %-10s %-10s | %-10s %-10s\n", r.dataset_label.c_str(),
                fixed(a.ssim_mean, 4).c_str(), fixed(b.ssim_mean, 4).c_str(), fixed(a.psnr_mean, 4).c_str(),
                fixed(b.psnr_mean, 4).c_str(), perc(a).c_str(), perc(b).c_str());
  out << line;
  out << col_a << " = " << to_string(refined) << ", " << col_b << " = " << to_string(synthetic) << '\n';
}

}  // namespace

void write_report_table(const QualityReport& r, std::ostream& out) {
  out << "population: " << r.population << " (" << r.get(PairKind::host_vs_refined).count << " pairs per kind)\n\n";
  write_table(r, out, "Image quality: host vs refined surrogate (ref) and synthetic (syn)", PairKind::host_vs_refined,
              PairKind::host_vs_synthetic, "ho");
  out << '\n';
  write_table(r, out, "Image quality: plaintext vs refined surrogate (ref) and synthetic (syn)",
              PairKind::plaintext_vs_refined, PairKind::plaintext_vs_synthetic, "pl");
  out << '\n';
  const double hr = r.get(PairKind::host_vs_refined).ssim_mean;
  const double hs = r.get(PairKind::host_vs_synthetic).ssim_mean;
  const double pr = r.get(PairKind::plaintext_vs_refined).ssim_mean;
  out << "expected: SSIM(ho,ref) > SSIM(ho,syn)  [" << (hr > hs ? "holds" : "violated") << "]\n";
  out << "expected: SSIM(ho,ref) > SSIM(pl,ref)  [" << (hr > pr ? "holds" : "violated") << "]\n";
  if (!r.errors.empty()) {
    out << "\nskipped entries: " << r.errors.size() << '\n';
    for (const auto& e : r.errors) out << "  " << e.plaintext_id << ": " << e.message << '\n';
  }
}

void write_report_records(const QualityReport& r, std::ostream& out) {
  out << "dataset,pair_kind,metric,mean,count\n";
  for (const auto& p : r.pairs) {
    out << r.dataset_label << ',' << to_string(p.kind) << ",ssim," << fixed(p.ssim_mean, 10) << ',' << p.count << '\n';
    out << r.dataset_label << ',' << to_string(p.kind) << ",psnr," << fixed(p.psnr_mean, 10) << ',' << p.count << '\n';
    if (p.perceptual_mean) {
      out << r.dataset_label << ',' << to_string(p.kind) << ",perceptual," << fixed(*p.perceptual_mean, 10) << ','
          << p.count << '\n';
    }
  }
}

}  // namespace fesf::metrics

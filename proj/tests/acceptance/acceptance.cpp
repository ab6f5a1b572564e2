// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "fesf/demo.hpp"
#include "fesf/ihm.hpp"
#include "fesf/iqem.hpp"
#include "fesf/metrics.hpp"
#include "fesf/pipeline.hpp"
#include "fesf/spectral.hpp"
#include "fesf/toy_data.hpp"
#include "golden_hide.hpp"
#include "grad_check.hpp"
#include "oracle/dft_oracle.hpp"
#include "test_support.hpp"

using namespace fesf;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Image from_plane(const oracle::Plane& p) {
  Image img(Shape{1, p.size(), p[0].size()});
  for (std::size_t h = 0; h < p.size(); ++h)
    for (std::size_t w = 0; w < p[0].size(); ++w) img.at(0, h, w) = p[h][w];
  return img;
}

Outcome fft_round_trip() {
  const auto t0 = std::chrono::steady_clock::now();
  const Shape shapes[] = {{1, 8, 8}, {3, 31, 17}, {3, 512, 512}};
  nn::Rng rng(100);
  double worst_error = 0, worst_parseval = 0;
  for (int i = 0; i < 200; ++i) {
    const Image x = testing::random_image(shapes[i % 3], rng);
    const Spectrum f = spectral::fft2(x);
    worst_error = std::max(worst_error, max_abs_diff(spectral::ifft2(f).image, x));
    double e = 0, fe = 0;
    for (double v : x.data()) e += v * v;
    for (const auto& z : f.data()) fe += std::norm(z);
    worst_parseval = std::max(worst_parseval, std::abs(e - fe / static_cast<double>(x.shape().plane())) / e);
  }
  const double t = seconds_since(t0);
  return {worst_error < 1e-9 && worst_parseval < 1e-9 && t < 30.0,
          fmt("max error %.2e, Parseval rel %.2e, %.1f s", worst_error, worst_parseval, t)};
}

Outcome mask_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t mismatches = 0, masks = 0;
  for (double alpha : {0.0, 0.1, 0.25, 0.4, 0.5}) {
    for (std::size_t h = 4; h <= 32; ++h) {
      for (std::size_t w = 4; w <= 32; ++w) {
        const auto mask = ihm::build_mask(h, w, alpha);
        ++masks;
        for (std::size_t k = 0; k < h; ++k) {
          for (std::size_t l = 0; l < w; ++l) {
            const long m = static_cast<long>(k) - static_cast<long>(h / 2);
            const long n = static_cast<long>(l) - static_cast<long>(w / 2);
            if (mask.at(k, l) != oracle::mask_predicate(m, n, h, w, alpha)) ++mismatches;
          }
        }
      }
    }
  }
  const double t = seconds_since(t0);
  return {mismatches == 0 && t < 5.0, fmt("%zu masks, %zu mismatched cells, %.2f s", masks, mismatches, t)};
}

Outcome degenerate_hide() {
  nn::Rng rng(101);
  double worst = 0;
  std::size_t monotone = 0;
  for (int i = 0; i < 50; ++i) {
    const Shape shape{3, 16 + rng.below(24), 16 + rng.below(24)};
    const Image p = testing::random_image(shape, rng);
    const Image h = testing::random_image(shape, rng);
    const double alpha = rng.uniform(0.05, 0.5);
    worst = std::max(worst, max_abs_diff(ihm::hide(p, h, {alpha, 0.0}), h));
    worst = std::max(worst, max_abs_diff(ihm::hide(h, h, {alpha, rng.uniform()}), h));
    double previous = -1;
    bool ok = true;
    for (double beta : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const Image s = ihm::hide(p, h, {alpha, beta});
      double d = 0;
      for (std::size_t k = 0; k < s.size(); ++k) d += (s.data()[k] - h.data()[k]) * (s.data()[k] - h.data()[k]);
      d = std::sqrt(d);
      ok = ok && d >= previous;
      previous = d;
    }
    monotone += ok ? 1 : 0;
  }
  return {worst < 1e-6 && monotone == 50, fmt("identity error %.2e, beta-monotone %zu/50", worst, monotone)};
}

Outcome golden_hide() {
  const Image out = ihm::hide(from_plane(oracle::golden_plaintext()), from_plane(oracle::golden_host()), {0.25, 0.5});
  const auto live = oracle::direct_hide(oracle::golden_plaintext(), oracle::golden_host(), 0.25, 0.5);
  double vs_live = 0, vs_frozen = 0;
  for (std::size_t i = 0; i < 64; ++i) {
    vs_live = std::max(vs_live, std::abs(out.data()[i] - live[i / 8][i % 8]));
    vs_frozen = std::max(vs_frozen, std::abs(out.data()[i] - golden::kHideAlpha025Beta05[i]));
  }
  return {vs_live < 1e-9 && vs_frozen < 1e-9, fmt("vs oracle %.2e, vs frozen %.2e", vs_live, vs_frozen)};
}

Outcome gan_gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  iqem::TrainConfig cfg;
  cfg.generator_hidden = 4;
  cfg.discriminator_hidden = 4;
  iqem::EnhancerModel model = iqem::initial_model(3, cfg);
  nn::Rng rng(102);
  model.generator_params = nn::ConvNet(model.generator).init_params(rng, false);
  for (auto& v : model.generator_params) v *= 0.5;
  model.discriminator_params = nn::ConvNet(model.discriminator).init_params(rng, false);
  iqem::Batch batch;
  for (int i = 0; i < 2; ++i) {
    batch.real.push_back(testing::random_image(Shape{3, 6, 6}, rng));
    batch.synthetic.push_back(testing::random_image(Shape{3, 6, 6}, rng));
  }
  const double lambda = 0.5;
  std::vector<double> dg(model.discriminator_params.size(), 0.0), gg(model.generator_params.size(), 0.0);
  iqem::discriminator_objective(model, batch, dg);
  iqem::generator_objective(model, batch, lambda, gg);
  const auto d = testing::check_gradient(model.discriminator_params, dg, [&](const std::vector<double>& p) {
    auto m = model;
    m.discriminator_params = p;
    return iqem::discriminator_objective(m, batch);
  }, [&](const std::vector<double>& p) {
    auto m = model;
    m.discriminator_params = p;
    return testing::gan_kink_pattern(m, batch);
  });
  const auto g = testing::check_gradient(model.generator_params, gg, [&](const std::vector<double>& p) {
    auto m = model;
    m.generator_params = p;
    return iqem::generator_objective(m, batch, lambda);
  }, [&](const std::vector<double>& p) {
    auto m = model;
    m.generator_params = p;
    return testing::gan_kink_pattern(m, batch);
  });
  const double t = seconds_since(t0);
  const bool small = model.generator_params.size() <= 500 && model.discriminator_params.size() <= 500;
  return {small && d.passed() && g.passed() && t < 60.0,
          fmt("G %zu params rel %.2e, D %zu params rel %.2e (rtol 1e-4; worst error/allowance %.2f; %zu steps "
              "shortened at kinks, %zu rounding-limited), %.1f s",
              model.generator_params.size(), g.worst_relative, model.discriminator_params.size(), d.worst_relative,
              std::max(g.worst_ratio, d.worst_ratio), g.reduced_steps + d.reduced_steps,
              g.noise_limited + d.noise_limited, t)};
}

Outcome iqem_direction() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto task = toy::color_cast_task(32, 16, 8, 0);
  iqem::TrainConfig cfg;  // 200 epochs, seed 0, 32x32 patches
  const auto model = iqem::train_enhancer(task.train, task.host, cfg);
  double before = 0, after = 0;
  for (const auto& x : task.held_out) {
    before += metrics::ssim(task.host, x);
    after += metrics::ssim(task.host, iqem::enhance(model, x));
  }
  const double n = static_cast<double>(task.held_out.size());
  const double t = seconds_since(t0);
  return {after / n > before / n && t < 600.0,
          fmt("held-out SSIM(host, x) %.4f -> SSIM(host, G(x)) %.4f, %.1f s", before / n, after / n, t)};
}

Outcome metric_golden() {
  nn::Rng rng(103);
  const Image x = testing::random_image(Shape{3, 32, 32}, rng);
  const double self = metrics::ssim(x, x);
  const double constant = metrics::ssim(Image(Shape{1, 16, 16}, 0.0), Image(Shape{1, 16, 16}, 1.0));
  const Image a = testing::random_image(Shape{3, 16, 16}, rng, 0.0, 0.9);
  Image b = a;
  for (auto& v : b.data()) v += 0.1;
  const double p = metrics::psnr(a, b);
  return {self == 1.0 && std::abs(constant - 9.999e-5) < 1e-8 && std::abs(p - 20.0) < 1e-9,
          fmt("ssim(x,x) %.17g, constant pair %.8e, psnr %.12f dB", self, constant, p)};
}

Outcome privacy_proxy(const demo::DemoResult& r) {
  const double hr = r.report.get(metrics::PairKind::host_vs_refined).ssim_mean;
  const double pr = r.report.get(metrics::PairKind::plaintext_vs_refined).ssim_mean;
  return {hr > pr, fmt("SSIM(host, refined) %.4f vs SSIM(plaintext, refined) %.4f over %zu entries", hr, pr,
                       r.report.get(metrics::PairKind::host_vs_refined).count)};
}

// Mean amplitude in the 1 <= max(|m|,|n|) <= 3 band, i.e. the class signal
// band without DC.
double low_band_amplitude(const Image& img) {
  const auto ap = spectral::decompose(spectral::fft2(img));
  const std::size_t H = img.height(), W = img.width();
  double s = 0;
  std::size_t n = 0;
  for (std::size_t c = 0; c < img.channels(); ++c) {
    for (std::size_t k = 0; k < H; ++k) {
      for (std::size_t l = 0; l < W; ++l) {
        const long m = static_cast<long>(k) - static_cast<long>(H / 2), q = static_cast<long>(l) - static_cast<long>(W / 2);
        const long r = std::max(std::abs(m), std::abs(q));
        if (r < 1 || r > 3) continue;
        s += ap.amplitude[(c * H + k) * W + l];
        ++n;
      }
    }
  }
  return s / static_cast<double>(n);
}

Outcome utility(const fs::path& scratch) {
  const auto t0 = std::chrono::steady_clock::now();
  const Shape shape{3, 64, 64};
  const std::uint64_t seed = 0;
  toy::write_class_dataset(scratch / "data", shape, 200, seed);
  pipeline::DatasetSpec spec;
  spec.root = scratch / "data";
  spec.height = spec.width = 64;
  spec.split_mode = pipeline::SplitMode::exact;
  const auto ds = pipeline::ingest(spec);
  const Image host = toy::host_image(shape, seed + 1000);

  std::vector<Image> synthetics;
  for (const auto& item : ds.items) {
    if (item.split == Split::train) synthetics.push_back(ihm::hide(item.image, host, ihm::kDefaultHiding));
  }
  iqem::TrainConfig tc;
  tc.epochs = 40;
  const auto model = iqem::train_enhancer(synthetics, host, tc);
  pipeline::GenerateOptions go;
  go.output_dir = scratch / "out";
  go.model = &model;
  go.enhancer_note = "trained-per-run";
  const auto gen = pipeline::generate(ds, host, go);

  // The class signal must be visible in the surrogate spectra before any
  // classifier is asked to find it.
  const auto load = pipeline::manifest_loader(gen.manifest.shape);
  double band[2] = {0, 0};
  std::size_t count[2] = {0, 0};
  for (const auto& e : gen.manifest.entries) {
    const int k = e.label == "class_1" ? 1 : 0;
    band[k] += low_band_amplitude(load(gen.manifest.resolve(e.surrogate_path)));
    ++count[k];
  }
  const double ratio = (band[1] / static_cast<double>(count[1])) / (band[0] / static_cast<double>(count[0]));

  pipeline::UtilityOptions uo;
  uo.source = pipeline::Source::surrogate;
  const double sur = pipeline::utility_check(gen.manifest, uo).test.accuracy;
  uo.source = pipeline::Source::refined;
  const double ref = pipeline::utility_check(gen.manifest, uo).test.accuracy;
  uo.source = pipeline::Source::surrogate;
  uo.shuffle_labels = true;
  const auto shuffled = pipeline::utility_check(gen.manifest, uo);
  const double chance = 1.0 / static_cast<double>(shuffled.classes.size());
  const double t = seconds_since(t0);
  return {ratio > 1.1 && sur > 0.8 && std::abs(shuffled.test.accuracy - chance) <= 0.10 && ref >= sur && t < 600.0,
          fmt("band ratio %.3f, surrogate %.4f, refined %.4f, shuffled %.4f (chance %.2f), n_test %zu, %.1f s", ratio,
              sur, ref, shuffled.test.accuracy, chance, shuffled.test.count, t)};
}

Outcome determinism(const fs::path& first, const fs::path& second) {
  std::size_t same = 0, total = 0;
  std::string differing;
  for (const char* f : {"manifest.jsonl", "report.txt", "report.csv", "utility.txt", "utility.csv", "enhancer.bin"}) {
    ++total;
    const std::string a = slurp(first / f), b = slurp(second / f);
    if (!a.empty() && a == b) {
      ++same;
    } else {
      differing += std::string(" ") + f;
    }
  }
  return {same == total, fmt("%zu/%zu files identical%s", same, total, differing.empty() ? "" : (" (differ:" + differing + ")").c_str())};
}

}  // namespace

int main() {
  const fs::path scratch = testing::scratch_dir("acceptance");
  int failures = 0;
  auto report = [&](const char* name, const std::function<Outcome()>& criterion) {
    Outcome o;
    try {
      o = criterion();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    std::printf("%s  %-28s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  };

  report("fft-round-trip", fft_round_trip);
  report("mask-oracle", mask_oracle);
  report("degenerate-hide", degenerate_hide);
  report("golden-hide", golden_hide);
  report("gan-gradient-check", gan_gradients);
  report("iqem-directional", iqem_direction);
  report("metric-golden-values", metric_golden);

  // Paper defaults: alpha 0.5, beta 0.5, alpha' 0.5, beta' 0.1.
  demo::DemoOptions demo_opts;
  demo_opts.output_dir = scratch / "demo_a";
  std::optional<demo::DemoResult> demo_a;
  report("privacy-proxy", [&] {
    demo_a = demo::run_demo(demo_opts);
    return privacy_proxy(*demo_a);
  });
  report("utility", [&] { return utility(scratch / "utility"); });
  report("determinism", [&] {
    demo_opts.output_dir = scratch / "demo_b";
    demo::run_demo(demo_opts);
    return determinism(scratch / "demo_a", scratch / "demo_b");
  });

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

#include "fesf/iqem.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "fesf/error.hpp"
#include "fesf/simd.hpp"

namespace fesf::iqem {
namespace {

double clamp_score(double p) { return std::clamp(p, kScoreEpsilon, 1.0 - kScoreEpsilon); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Image crop(const Image& src, std::size_t top, std::size_t left, std::size_t size) {
  Image out(Shape{src.channels(), size, size});
  for (std::size_t c = 0; c < src.channels(); ++c) {
    for (std::size_t r = 0; r < size; ++r) {
      const auto row = src.channel(c).subspan((top + r) * src.width() + left, size);
      std::copy(row.begin(), row.end(), out.channel(c).begin() + static_cast<std::ptrdiff_t>(r * size));
    }
  }
  return out;
}

Image random_patch(const Image& src, std::size_t size, nn::Rng& rng) {
  const std::size_t top = rng.below(src.height() - size + 1);
  const std::size_t left = rng.below(src.width() - size + 1);
  return crop(src, top, left, size);
}

struct DiscriminatorPass {
  nn::ConvTrace trace;
  std::vector<double> probs;
};

DiscriminatorPass run_discriminator(const EnhancerModel& model, const Image& x) {
  DiscriminatorPass pass;
  const nn::ConvNet net(model.discriminator);
  const Image logits = net.forward(x, model.discriminator_params, &pass.trace);
  pass.probs.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) pass.probs[i] = sigmoid(logits.data()[i]);
  return pass;
}

std::size_t total_positions(const std::vector<Image>& images) {
  std::size_t n = 0;
  for (const auto& img : images) n += img.height() * img.width();
  return n;
}

}  // namespace

GanLosses gan_losses(std::span<const double> d_real, std::span<const double> d_fake) {
  if (d_real.empty() || d_fake.empty()) throw ValidationError("gan_losses: empty score array");
  double real_term = 0.0;
  for (double p : d_real) real_term += std::log(clamp_score(p));
  double fake_term = 0.0;
  double fooled = 0.0;
  for (double p : d_fake) {
    fake_term += std::log(1.0 - clamp_score(p));
    fooled += std::log(clamp_score(p));
  }
  const double nr = static_cast<double>(d_real.size());
  const double nf = static_cast<double>(d_fake.size());
  return {-fooled / nf, -real_term / nr - fake_term / nf};
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ValidationError("iqem: epochs must be >= 1");
  if (batch_size < 1) throw ValidationError("iqem: batch_size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError("iqem: learning_rate must be positive");
  }
  if (!(content_weight >= 0.0) || !std::isfinite(content_weight)) {
    throw ValidationError("iqem: content_weight must be nonnegative");
  }
  if (patch_size < 3) throw ValidationError("iqem: patch_size must be >= 3");
  if (generator_hidden == 0 || discriminator_hidden == 0) throw ValidationError("iqem: hidden width must be >= 1");
}

void EnhancerModel::validate() const {
  if (generator.in_channels != generator.out_channels) {
    throw ValidationError("enhancer generator must map C channels to C channels");
  }
  if (discriminator.in_channels != generator.in_channels || discriminator.out_channels != 1) {
    throw ValidationError("enhancer discriminator must map C channels to one score map");
  }
  if (generator_params.size() != generator.param_count() ||
      discriminator_params.size() != discriminator.param_count()) {
    throw ValidationError("enhancer parameter vectors do not match their architecture descriptors");
  }
}

EnhancerModel initial_model(std::size_t channels, const TrainConfig& config) {
  config.validate();
  if (channels == 0) throw ValidationError("iqem: images need at least one channel");
  const auto c = static_cast<std::uint32_t>(channels);
  EnhancerModel model;
  model.generator = {c, config.generator_hidden, c, 3};
  model.discriminator = {c, config.discriminator_hidden, 1, 3};
  nn::Rng rng(config.seed);
  model.generator_params = nn::ConvNet(model.generator).init_params(rng, /*zero_last_layer=*/true);
  model.discriminator_params = nn::ConvNet(model.discriminator).init_params(rng, false);
  model.meta = {config.seed, 0, config.batch_size, config.patch_size, config.learning_rate, config.content_weight,
                0.0, 0.0};
  return model;
}

Image generator_output(const EnhancerModel& model, const Image& x) {
  Image out = nn::ConvNet(model.generator).forward(x, model.generator_params);
  simd::axpy(1.0, x.data(), out.data());
  return out;
}

std::vector<double> discriminator_scores(const EnhancerModel& model, const Image& x) {
  return run_discriminator(model, x).probs;
}

double mean_discriminator_score(const EnhancerModel& model, const Image& x) {
  const auto s = discriminator_scores(model, x);
  return simd::sum(s) / static_cast<double>(s.size());
}

double discriminator_objective(const EnhancerModel& model, const Batch& batch, std::span<double> grad) {
  if (batch.real.empty() || batch.synthetic.empty()) throw ValidationError("iqem: batch needs real and synthetic images");
  const nn::ConvNet d_net(model.discriminator);
  const double n_real = static_cast<double>(total_positions(batch.real));
  const double n_fake = static_cast<double>(total_positions(batch.synthetic));
  double loss = 0.0;

  auto accumulate = [&](const Image& x, bool is_real) {
    auto pass = run_discriminator(model, x);
    Image d_logits(Shape{1, x.height(), x.width()});
    for (std::size_t i = 0; i < pass.probs.size(); ++i) {
      const double p = pass.probs[i];
      const double pc = clamp_score(p);
      const bool clamped = pc != p;
      if (is_real) {
        loss -= std::log(pc) / n_real;
        d_logits.data()[i] = clamped ? 0.0 : (p - 1.0) / n_real;
      } else {
        loss -= std::log(1.0 - pc) / n_fake;
        d_logits.data()[i] = clamped ? 0.0 : p / n_fake;
      }
    }
    if (!grad.empty()) d_net.backward(pass.trace, d_logits, model.discriminator_params, grad);
  };

  for (const auto& x : batch.real) accumulate(x, true);
  for (const auto& x : batch.synthetic) accumulate(generator_output(model, x), false);
  return loss;
}

double generator_objective(const EnhancerModel& model, const Batch& batch, double content_weight,
                           std::span<double> grad) {
  if (batch.synthetic.empty()) throw ValidationError("iqem: batch needs synthetic images");
  const nn::ConvNet g_net(model.generator);
  const nn::ConvNet d_net(model.discriminator);
  const double n_fake = static_cast<double>(total_positions(batch.synthetic));
  std::size_t pixel_count = 0;
  for (const auto& x : batch.synthetic) pixel_count += x.size();
  const double n_pix = static_cast<double>(pixel_count);

  std::vector<double> scratch_d(grad.empty() ? 0 : model.discriminator_params.size());
  double loss = 0.0;
  for (const auto& x : batch.synthetic) {
    nn::ConvTrace g_trace;
    Image gx = g_net.forward(x, model.generator_params, grad.empty() ? nullptr : &g_trace);
    simd::axpy(1.0, x.data(), gx.data());

    auto pass = run_discriminator(model, gx);
    Image d_logits(Shape{1, x.height(), x.width()});
    for (std::size_t i = 0; i < pass.probs.size(); ++i) {
      const double p = pass.probs[i];
      const double pc = clamp_score(p);
      loss -= std::log(pc) / n_fake;
      d_logits.data()[i] = pc != p ? 0.0 : (p - 1.0) / n_fake;
    }
    const auto gd = gx.data();
    const auto xd = x.data();
    for (std::size_t i = 0; i < gd.size(); ++i) loss += content_weight * std::abs(gd[i] - xd[i]) / n_pix;

    if (grad.empty()) continue;
    Image d_gx = d_net.backward(pass.trace, d_logits, model.discriminator_params, scratch_d);
    auto dg = d_gx.data();
    const double step = content_weight / n_pix;
    for (std::size_t i = 0; i < dg.size(); ++i) {
      const double diff = gd[i] - xd[i];
      if (diff > 0.0) dg[i] += step;
      else if (diff < 0.0) dg[i] -= step;
    }
    // The residual path contributes to dL/dx only, which is not needed here.
    g_net.backward(g_trace, d_gx, model.generator_params, grad);
  }
  return loss;
}

EnhancerModel train_enhancer(std::span<const Image> synthetics, const Image& host, const TrainConfig& config,
                             const EpochCallback& on_epoch) {
  config.validate();
  if (synthetics.size() < 2) throw ValidationError("iqem: training needs at least two synthetic images");
  host.validate();
  for (const auto& s : synthetics) {
    s.validate();
    if (s.channels() != host.channels()) throw ValidationError("iqem: synthetic and host channel counts differ");
    if (s.height() < config.patch_size || s.width() < config.patch_size) {
      throw ValidationError("iqem: synthetic image " + to_string(s.shape()) + " is smaller than patch_size " +
                            std::to_string(config.patch_size));
    }
  }
  if (host.height() < config.patch_size || host.width() < config.patch_size) {
    throw ValidationError("iqem: host image is smaller than patch_size");
  }

  EnhancerModel model = initial_model(host.channels(), config);
  nn::Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(synthetics.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<double> g_grad(model.generator_params.size());
  std::vector<double> d_grad(model.discriminator_params.size());

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double g_sum = 0.0, d_sum = 0.0;
    std::size_t steps = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      Batch batch;
      for (std::size_t k = start; k < end; ++k) {
        batch.synthetic.push_back(random_patch(synthetics[order[k]], config.patch_size, rng));
        batch.real.push_back(random_patch(host, config.patch_size, rng));
      }
      std::fill(d_grad.begin(), d_grad.end(), 0.0);
      const double d_loss = discriminator_objective(model, batch, d_grad);
      nn::sgd_step(model.discriminator_params, d_grad, config.learning_rate);

      std::fill(g_grad.begin(), g_grad.end(), 0.0);
      const double g_loss = generator_objective(model, batch, config.content_weight, g_grad);
      nn::sgd_step(model.generator_params, g_grad, config.learning_rate);

      if (!std::isfinite(d_loss) || !std::isfinite(g_loss) || !nn::all_finite(model.generator_params) ||
          !nn::all_finite(model.discriminator_params)) {
        throw TrainingError("iqem: non-finite loss or parameter at epoch " + std::to_string(epoch) + " (generator loss " +
                            std::to_string(g_loss) + ", discriminator loss " + std::to_string(d_loss) +
                            "); lower the learning rate");
      }
      g_sum += g_loss;
      d_sum += d_loss;
      ++steps;
    }
    model.meta.final_generator_loss = g_sum / static_cast<double>(steps);
    model.meta.final_discriminator_loss = d_sum / static_cast<double>(steps);
    model.meta.epochs = epoch + 1;
    if (on_epoch) on_epoch({epoch, model.meta.final_generator_loss, model.meta.final_discriminator_loss});
  }
  return model;
}

Image enhance(const EnhancerModel& model, const Image& synthetic) {
  model.validate();
  synthetic.validate();
  if (synthetic.channels() != model.channels()) {
    throw ValidationError("enhance: model expects " + std::to_string(model.channels()) + " channels, image has " +
                          std::to_string(synthetic.channels()));
  }
  Image out = generator_output(model, synthetic);
  simd::clamp01(out.data());
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr char kMagic[8] = {'F', 'E', 'S', 'F', 'E', 'N', 'H', '1'};
constexpr std::uint32_t kFormatVersion = 1;

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out.insert(out.end(), b, b + n);
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void descriptor(const nn::ConvNetDescriptor& d) {
    u32(d.in_channels);
    u32(d.hidden_channels);
    u32(d.out_channels);
    u32(d.depth);
  }
  void params(const std::vector<double>& p) {
    u64(p.size());
    for (double v : p) f64(v);
  }
  std::vector<std::uint8_t> out;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : buf(b) {}
  void need(std::size_t n) {
    if (pos + n > buf.size()) throw ValidationError("model file is truncated");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[pos++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[pos++]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  nn::ConvNetDescriptor descriptor() {
    nn::ConvNetDescriptor d;
    d.in_channels = u32();
    d.hidden_channels = u32();
    d.out_channels = u32();
    d.depth = u32();
    if (d.depth == 0 || d.depth > 64 || d.in_channels == 0 || d.out_channels == 0 || d.in_channels > 4096 ||
        d.hidden_channels > 4096 || d.out_channels > 4096) {
      throw ValidationError("model file has an invalid architecture descriptor");
    }
    return d;
  }
  std::vector<double> params(std::size_t expected) {
    const std::uint64_t n = u64();
    if (n != expected) throw ValidationError("model parameter count does not match its architecture descriptor");
    need(n * 8);
    std::vector<double> p(n);
    for (auto& v : p) v = f64();
    return p;
  }
  std::span<const std::uint8_t> buf;
  std::size_t pos = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_model(const EnhancerModel& model) {
  model.validate();
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.u32(kFormatVersion);
  w.descriptor(model.generator);
  w.descriptor(model.discriminator);
  w.params(model.generator_params);
  w.params(model.discriminator_params);
  const auto& m = model.meta;
  w.u64(m.seed);
  w.u64(m.epochs);
  w.u64(m.batch_size);
  w.u64(m.patch_size);
  w.f64(m.learning_rate);
  w.f64(m.content_weight);
  w.f64(m.final_generator_loss);
  w.f64(m.final_discriminator_loss);
  return std::move(w.out);
}

EnhancerModel deserialize_model(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  r.need(sizeof kMagic);
  if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) throw ValidationError("not an enhancer model file");
  r.pos = sizeof kMagic;
  if (const auto version = r.u32(); version != kFormatVersion) {
    throw ValidationError("unsupported model format version " + std::to_string(version));
  }
  EnhancerModel model;
  model.generator = r.descriptor();
  model.discriminator = r.descriptor();
  model.generator_params = r.params(model.generator.param_count());
  model.discriminator_params = r.params(model.discriminator.param_count());
  auto& m = model.meta;
  m.seed = r.u64();
  m.epochs = r.u64();
  m.batch_size = r.u64();
  m.patch_size = r.u64();
  m.learning_rate = r.f64();
  m.content_weight = r.f64();
  m.final_generator_loss = r.f64();
  m.final_discriminator_loss = r.f64();
  if (r.pos != bytes.size()) throw ValidationError("model file has trailing bytes");
  model.validate();
  return model;
}

void save_model(const EnhancerModel& model, const std::filesystem::path& path) {
  const auto bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write model " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing model " + path.string());
}

EnhancerModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read model " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace fesf::iqem

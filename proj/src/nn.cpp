#include "fesf/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fesf/error.hpp"
#include "fesf/simd.hpp"

namespace fesf::nn {

double Rng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t ConvNetDescriptor::param_count() const {
  std::size_t total = 0;
  for (std::uint32_t l = 0; l < depth; ++l) {
    const std::size_t in = l == 0 ? in_channels : hidden_channels;
    const std::size_t out = l + 1 == depth ? out_channels : hidden_channels;
    total += out * in * 9 + out;
  }
  return total;
}

ConvNet::ConvNet(ConvNetDescriptor descriptor) : desc_(descriptor) {
  if (desc_.depth == 0 || desc_.in_channels == 0 || desc_.out_channels == 0 ||
      (desc_.depth > 1 && desc_.hidden_channels == 0)) {
    throw ValidationError("conv net descriptor has a zero dimension");
  }
  std::size_t offset = 0;
  for (std::uint32_t l = 0; l < desc_.depth; ++l) {
    const std::size_t in = l == 0 ? desc_.in_channels : desc_.hidden_channels;
    const std::size_t out = l + 1 == desc_.depth ? desc_.out_channels : desc_.hidden_channels;
    layers_.push_back({in, out, offset});
    offset += out * in * 9 + out;
  }
}

Image conv3x3_forward(const Image& x, std::span<const double> weights, std::span<const double> bias,
                      std::size_t out_channels) {
  const std::size_t in_channels = x.channels();
  const std::size_t height = x.height();
  const std::size_t width = x.width();
  Image y(Shape{out_channels, height, width});
  for (std::size_t o = 0; o < out_channels; ++o) {
    auto out_plane = y.channel(o);
    std::fill(out_plane.begin(), out_plane.end(), bias[o]);
    for (std::size_t i = 0; i < in_channels; ++i) {
      const auto in_plane = x.channel(i);
      for (std::size_t ky = 0; ky < 3; ++ky) {
        for (std::size_t kx = 0; kx < 3; ++kx) {
          const double w = weights[((o * in_channels + i) * 3 + ky) * 3 + kx];
          // Output columns whose source column c + kx - 1 lies inside the image.
          const std::size_t c_lo = kx == 0 ? 1 : 0;
          const std::size_t c_hi = kx == 2 ? width - 1 : width;
          if (c_hi <= c_lo) continue;
          const std::size_t len = c_hi - c_lo;
          for (std::size_t r = 0; r < height; ++r) {
            const long src_r = static_cast<long>(r + ky) - 1;
            if (src_r < 0 || src_r >= static_cast<long>(height)) continue;
            simd::axpy(w, in_plane.subspan(static_cast<std::size_t>(src_r) * width + c_lo + kx - 1, len),
                       out_plane.subspan(r * width + c_lo, len));
          }
        }
      }
    }
  }
  return y;
}

Image conv3x3_backward(const Image& x, const Image& dy, std::span<const double> weights, std::span<double> grad_w,
                       std::span<double> grad_b) {
  const std::size_t in_channels = x.channels();
  const std::size_t out_channels = dy.channels();
  const std::size_t height = x.height();
  const std::size_t width = x.width();
  Image dx(x.shape());
  for (std::size_t o = 0; o < out_channels; ++o) {
    const auto d_plane = dy.channel(o);
    grad_b[o] += simd::sum(d_plane);
    for (std::size_t i = 0; i < in_channels; ++i) {
      const auto in_plane = x.channel(i);
      auto dx_plane = dx.channel(i);
      for (std::size_t ky = 0; ky < 3; ++ky) {
        for (std::size_t kx = 0; kx < 3; ++kx) {
          const std::size_t widx = ((o * in_channels + i) * 3 + ky) * 3 + kx;
          const double w = weights[widx];
          const std::size_t c_lo = kx == 0 ? 1 : 0;
          const std::size_t c_hi = kx == 2 ? width - 1 : width;
          if (c_hi <= c_lo) continue;
          const std::size_t len = c_hi - c_lo;
          double gw = 0.0;
          for (std::size_t r = 0; r < height; ++r) {
            const long src_r = static_cast<long>(r + ky) - 1;
            if (src_r < 0 || src_r >= static_cast<long>(height)) continue;
            const std::size_t src = static_cast<std::size_t>(src_r) * width + c_lo + kx - 1;
            const auto d_seg = d_plane.subspan(r * width + c_lo, len);
            gw += simd::dot(d_seg, in_plane.subspan(src, len));
            simd::axpy(w, d_seg, dx_plane.subspan(src, len));
          }
          grad_w[widx] += gw;
        }
      }
    }
  }
  return dx;
}

Image ConvNet::forward(const Image& x, std::span<const double> params, ConvTrace* trace) const {
  if (params.size() != param_count()) throw ValidationError("conv net parameter vector has the wrong length");
  if (x.channels() != desc_.in_channels) {
    throw ValidationError("conv net expects " + std::to_string(desc_.in_channels) + " input channels, got " +
                          std::to_string(x.channels()));
  }
  if (trace) {
    trace->inputs.clear();
    trace->pre.clear();
  }
  Image current = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    const auto weights = params.subspan(layer.offset, layer.out * layer.in * 9);
    const auto bias = params.subspan(layer.offset + layer.out * layer.in * 9, layer.out);
    Image pre = conv3x3_forward(current, weights, bias, layer.out);
    if (trace) {
      trace->inputs.push_back(std::move(current));
      trace->pre.push_back(pre);
    }
    if (l + 1 < layers_.size()) {
      for (auto& v : pre.data()) v = v > 0.0 ? v : kLeakySlope * v;
    }
    current = std::move(pre);
  }
  return current;
}

Image ConvNet::backward(const ConvTrace& trace, const Image& d_out, std::span<const double> params,
                        std::span<double> grad) const {
  if (grad.size() != param_count()) throw ValidationError("gradient vector has the wrong length");
  Image d = d_out;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const Layer& layer = layers_[l];
    if (l + 1 < layers_.size()) {
      const auto pre = trace.pre[l].data();
      auto dd = d.data();
      for (std::size_t i = 0; i < dd.size(); ++i) dd[i] *= pre[i] > 0.0 ? 1.0 : kLeakySlope;
    }
    const std::size_t nw = layer.out * layer.in * 9;
    d = conv3x3_backward(trace.inputs[l], d, params.subspan(layer.offset, nw), grad.subspan(layer.offset, nw),
                         grad.subspan(layer.offset + nw, layer.out));
  }
  return d;
}

std::vector<double> ConvNet::init_params(Rng& rng, bool zero_last_layer) const {
  std::vector<double> params(param_count(), 0.0);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    if (zero_last_layer && l + 1 == layers_.size()) continue;
    const double scale = std::sqrt(3.0 / static_cast<double>(layer.in * 9));
    for (std::size_t k = 0; k < layer.out * layer.in * 9; ++k) params[layer.offset + k] = rng.uniform(-scale, scale);
  }
  return params;
}

SoftmaxClassifier::SoftmaxClassifier(std::size_t features, std::size_t classes)
    : features_(features), classes_(classes) {
  if (features == 0 || classes < 2) throw ValidationError("classifier needs features and at least two classes");
}

std::vector<double> SoftmaxClassifier::probabilities(std::span<const double> f, std::span<const double> params) const {
  std::vector<double> logits(classes_);
  for (std::size_t k = 0; k < classes_; ++k) {
    logits[k] = simd::dot(params.subspan(k * features_, features_), f) + params[classes_ * features_ + k];
  }
  const double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (auto& v : logits) {
    v = std::exp(v - peak);
    total += v;
  }
  for (auto& v : logits) v /= total;
  return logits;
}

double SoftmaxClassifier::loss_and_grad(std::span<const double> f, std::size_t label, std::span<const double> params,
                                        std::span<double> grad, double weight) const {
  const auto p = probabilities(f, params);
  for (std::size_t k = 0; k < classes_; ++k) {
    const double delta = (p[k] - (k == label ? 1.0 : 0.0)) * weight;
    simd::axpy(delta, f, grad.subspan(k * features_, features_));
    grad[classes_ * features_ + k] += delta;
  }
  return -std::log(std::max(p[label], 1e-300));
}

std::size_t SoftmaxClassifier::predict(std::span<const double> f, std::span<const double> params) const {
  const auto p = probabilities(f, params);
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

void sgd_step(std::span<double> params, std::span<const double> grad, double learning_rate) {
  simd::axpy(-learning_rate, grad, params);
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace fesf::nn

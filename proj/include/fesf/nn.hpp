#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "fesf/image.hpp"

// Minimal training machinery: stacks of 3x3 same-padded convolutions with
// leaky-ReLU between layers, a dense softmax layer, plain SGD, and a seeded
// generator whose uniform draws do not depend on the standard library's
// distribution implementations.

namespace fesf::nn {

/// Deterministic uniform source over a 64-bit Mersenne twister.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }
  /// Box-Muller normal.
  double normal();
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

/// Architecture of a conv stack. Fully determines the parameter count.
struct ConvNetDescriptor {
  std::uint32_t in_channels = 3;
  std::uint32_t hidden_channels = 8;
  std::uint32_t out_channels = 3;
  std::uint32_t depth = 3;  // number of conv layers, >= 1

  std::size_t param_count() const;
  friend bool operator==(const ConvNetDescriptor&, const ConvNetDescriptor&) = default;
};

inline constexpr double kLeakySlope = 0.2;

/// Activations recorded by a forward pass for use in backward().
struct ConvTrace {
  std::vector<Image> inputs;  // input of each layer
  std::vector<Image> pre;     // conv output of each layer, before activation
};

class ConvNet {
 public:
  explicit ConvNet(ConvNetDescriptor descriptor);

  const ConvNetDescriptor& descriptor() const { return desc_; }
  std::size_t param_count() const { return desc_.param_count(); }

  /// Output of the last layer (no activation on it).
  Image forward(const Image& x, std::span<const double> params, ConvTrace* trace = nullptr) const;

  /// Accumulates dL/dparams into `grad` and returns dL/dx.
  Image backward(const ConvTrace& trace, const Image& d_out, std::span<const double> params,
                 std::span<double> grad) const;

  /// Uniform(+-sqrt(3/fan_in)) weights, zero biases. With zero_last_layer the
  /// final layer starts at exactly zero.
  std::vector<double> init_params(Rng& rng, bool zero_last_layer) const;

 private:
  struct Layer {
    std::size_t in, out, offset;  // offset of the layer's weights in the flat vector; biases follow
  };
  ConvNetDescriptor desc_;
  std::vector<Layer> layers_;
};

/// Same-padded 3x3 convolution. Weight layout [out][in][3][3], then bias[out].
Image conv3x3_forward(const Image& x, std::span<const double> weights, std::span<const double> bias,
                      std::size_t out_channels);

/// Gradients of conv3x3_forward. Accumulates into grad_w / grad_b; returns dL/dx.
Image conv3x3_backward(const Image& x, const Image& dy, std::span<const double> weights, std::span<double> grad_w,
                       std::span<double> grad_b);

/// Softmax regression over a fixed-length feature vector.
class SoftmaxClassifier {
 public:
  SoftmaxClassifier(std::size_t features, std::size_t classes);

  std::size_t param_count() const { return classes_ * (features_ + 1); }
  std::vector<double> probabilities(std::span<const double> features, std::span<const double> params) const;
  /// Cross-entropy for one example; accumulates gradient scaled by `weight`.
  double loss_and_grad(std::span<const double> features, std::size_t label, std::span<const double> params,
                       std::span<double> grad, double weight) const;
  std::size_t predict(std::span<const double> features, std::span<const double> params) const;

 private:
  std::size_t features_;
  std::size_t classes_;
};

/// params -= learning_rate * grad
void sgd_step(std::span<double> params, std::span<const double> grad, double learning_rate);

bool all_finite(std::span<const double> v);

}  // namespace fesf::nn

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "fesf/iqem.hpp"

namespace fesf::testing {

struct GradCheck {
  double worst_relative = 0.0;  // max |a - n| / max(|a|, |n|), for information
  double worst_ratio = 0.0;     // max |a - n| / allowed; the check passes when <= 1
  std::size_t checked = 0;
  std::size_t reduced_steps = 0;   // parameters whose step had to shrink to stay off a kink
  std::size_t noise_limited = 0;   // parameters where the rounding bound, not rtol, set the allowance
  bool passed() const { return worst_ratio <= 1.0; }
};

using KinkPattern = std::function<std::vector<bool>(const std::vector<double>&)>;

// Central differences on every parameter. The default step sits near the
// cube root of machine epsilon.
//
// A difference across a kink of a piecewise function is not a derivative
// estimate, so when `kinks` is given and the pattern of active pieces differs
// between p+h and p-h, h is halved until it matches.
//
// Allowed error is max(rtol * max(|a|, |n|), 8 eps max(|L+|, |L-|) / h). The
// second term is the rounding floor of the difference quotient itself; it only
// matters for gradients far below the loss scale.
inline GradCheck check_gradient(std::vector<double> params, std::span<const double> analytic,
                                const std::function<double(const std::vector<double>&)>& loss,
                                const KinkPattern& kinks = {}, double rtol = 1e-4, double step = 1e-5) {
  constexpr double kEps = 2.220446049250313e-16;
  GradCheck out;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    double h = step;
    if (kinks) {
      for (int halvings = 0; halvings < 12; ++halvings) {
        params[i] = saved + h;
        const auto up = kinks(params);
        params[i] = saved - h;
        const auto down = kinks(params);
        if (up == down) break;
        h *= 0.5;
      }
      if (h != step) ++out.reduced_steps;
    }
    params[i] = saved + h;
    const double up = loss(params);
    params[i] = saved - h;
    const double down = loss(params);
    params[i] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double err = std::abs(analytic[i] - numeric);
    const double magnitude = std::max(std::abs(analytic[i]), std::abs(numeric));
    const double relative_allowance = rtol * magnitude;
    const double noise = 8.0 * kEps * std::max(std::abs(up), std::abs(down)) / h;
    if (noise > relative_allowance) ++out.noise_limited;
    const double allowed = std::max(relative_allowance, noise);
    out.worst_ratio = std::max(out.worst_ratio, allowed > 0.0 ? err / allowed : (err > 0.0 ? INFINITY : 0.0));
    if (magnitude > 0.0) out.worst_relative = std::max(out.worst_relative, err / magnitude);
    ++out.checked;
  }
  return out;
}

// Which piece of every piecewise-linear operation the GAN objectives pass
// through: leaky-ReLU inputs in both networks, the sign of G(x) - x in the
// content term, and whether a discriminator score hit its clamp.
inline std::vector<bool> gan_kink_pattern(const iqem::EnhancerModel& model, const iqem::Batch& batch) {
  std::vector<bool> pattern;
  const nn::ConvNet g(model.generator), d(model.discriminator);
  auto hidden_signs = [&](const nn::ConvTrace& trace) {
    for (std::size_t l = 0; l + 1 < trace.pre.size(); ++l)
      for (double v : trace.pre[l].data()) pattern.push_back(v > 0.0);
  };
  auto scores = [&](const Image& x) {
    nn::ConvTrace trace;
    d.forward(x, model.discriminator_params, &trace);
    hidden_signs(trace);
    for (double p : iqem::discriminator_scores(model, x)) {
      pattern.push_back(p < iqem::kScoreEpsilon);
      pattern.push_back(p > 1.0 - iqem::kScoreEpsilon);
    }
  };
  for (const auto& x : batch.synthetic) {
    nn::ConvTrace trace;
    g.forward(x, model.generator_params, &trace);
    hidden_signs(trace);
    const Image gx = iqem::generator_output(model, x);
    for (std::size_t i = 0; i < x.size(); ++i) {
      pattern.push_back(gx.data()[i] > x.data()[i]);
      pattern.push_back(gx.data()[i] < x.data()[i]);
    }
    scores(gx);
  }
  for (const auto& x : batch.real) scores(x);
  return pattern;
}

}  // namespace fesf::testing

#pragma once

#include <utility>

#include "proad/layers.hpp"

namespace proad {

// Two-layer MLP C -> 4C -> C shared by the feature path and the prototype
// path; only the feature path receives dropout noise.
struct BottleneckParams {
  Linear fc1;
  Linear fc2;
  double prob = 0.2;

  static BottleneckParams init(std::size_t dim, double prob, double stddev, Rng& rng);
  std::size_t dim() const { return fc1.in_features(); }
  void collect(const std::string& prefix, ParameterList& out) const;
};

// Dropout_rate(W2 Dropout_rate(GELU(W1 x + b1)) + b2)
Tensor bottleneck_forward(const Tensor& x, const BottleneckParams& params, double rate, bool training, Rng& rng);

struct BottleneckOutput {
  Tensor features;    // Q_bn, noisy when training
  Tensor prototypes;  // P_bn, always noise-free
};

BottleneckOutput bottleneck_pair(const Tensor& fused, const Tensor& prototypes, const BottleneckParams& params,
                                 double prob, bool training, Rng& rng);

}  // namespace proad

#include "proad/bottleneck.hpp"

#include "proad/error.hpp"
#include "proad/ops.hpp"

namespace proad {

BottleneckParams BottleneckParams::init(std::size_t dim, double prob, double stddev, Rng& rng) {
  BottleneckParams p;
  p.fc1 = Linear::init(dim, 4 * dim, stddev, rng, true);
  p.fc2 = Linear::init(4 * dim, dim, stddev, rng, true);
  p.prob = prob;
  return p;
}

void BottleneckParams::collect(const std::string& prefix, ParameterList& out) const {
  fc1.collect(prefix + ".fc1", out);
  fc2.collect(prefix + ".fc2", out);
}

Tensor bottleneck_forward(const Tensor& x, const BottleneckParams& params, double rate, bool training, Rng& rng) {
  if (x.rank() != 2 || x.dim(1) != params.dim()) {
    throw DimensionError("bottleneck expects [* x " + std::to_string(params.dim()) + "], got " +
                         shape_to_string(x.shape()));
  }
  const Tensor hidden = dropout(gelu(params.fc1(x)), rate, training, rng);
  return dropout(params.fc2(hidden), rate, training, rng);
}

BottleneckOutput bottleneck_pair(const Tensor& fused, const Tensor& prototypes, const BottleneckParams& params,
                                 double prob, bool training, Rng& rng) {
  BottleneckOutput out;
  out.features = bottleneck_forward(fused, params, prob, training, rng);
  out.prototypes = bottleneck_forward(prototypes, params, 0.0, training, rng);
  return out;
}

}  // namespace proad

#pragma once

#include <vector>

#include "proad/decoder.hpp"
#include "proad/encoder.hpp"
#include "proad/model.hpp"

namespace proad {

// d_i = 1 - cos(f_E,i, f_D,i), one value per position, in [0, 2].
Tensor distance_map(const Tensor& f_e, const Tensor& f_d);

// alpha = d / mean(d) (or all ones when mean(d) <= eps), returned as
// alpha^tau. Plain numbers: the result never participates in the graph.
std::vector<double> decay_factors(std::span<const double> distances, double tau, double eps = 1e-12);

struct LossOptions {
  double tau = 3.0;
  // When false no hook is attached at all (reference for hook tests).
  bool gradient_decay = true;
};

struct LossTerms {
  Tensor loss;                               // scalar
  std::vector<std::vector<double>> distances;  // per pair, N values
  std::vector<std::vector<double>> scales;     // per pair, alpha^tau
  std::vector<Tensor> hooked_outputs;          // per pair, the hooked f_D
};

// Mean over pairs of the mean cosine distance; the gradient arriving at
// each f_D position is rescaled by alpha^tau of that position.
LossTerms decay_loss(const DecoderTrace& trace, const FeatureStack& features, const Pairing& pairing,
                     const LossOptions& options);

}  // namespace proad

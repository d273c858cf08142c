#include "proad/loss.hpp"

#include <cmath>

#include "proad/error.hpp"
#include "proad/ops.hpp"

namespace proad {

Tensor distance_map(const Tensor& f_e, const Tensor& f_d) { return cosine_distance_rows(f_e, f_d, 1e-12); }

std::vector<double> decay_factors(std::span<const double> distances, double tau, double eps) {
  double avg = 0.0;
  for (double d : distances) {
    if (d < 0.0) throw ParameterError("decay_factors: distances must be nonnegative");
    avg += d;
  }
  avg /= static_cast<double>(distances.size());
  std::vector<double> scale(distances.size(), 1.0);
  if (avg <= eps) return scale;
  for (std::size_t i = 0; i < scale.size(); ++i) scale[i] = std::pow(distances[i] / avg, tau);
  return scale;
}

LossTerms decay_loss(const DecoderTrace& trace, const FeatureStack& features, const Pairing& pairing,
                     const LossOptions& options) {
  if (pairing.empty()) throw ConfigError("decay_loss needs at least one layer pair");
  LossTerms terms;
  Tensor total;
  for (const auto& pair : pairing) {
    if (pair.decoder >= trace.layers.size() || pair.encoder >= features.per_layer.size()) {
      throw ConfigError("layer pairing references decoder layer " + std::to_string(pair.decoder + 1) +
                        " / encoder layer " + std::to_string(pair.encoder + 1) + " which does not exist");
    }
    const Tensor& f_e = features.per_layer[pair.encoder];
    Tensor f_d = trace.layers[pair.decoder].f_d;
    std::vector<double> d_plain;
    {
      NoGradGuard no_grad;
      const Tensor d = distance_map(f_e, f_d);
      d_plain.assign(d.data().begin(), d.data().end());
    }
    std::vector<double> scale = decay_factors(d_plain, options.tau);
    if (options.gradient_decay) {
      const std::size_t channels = f_d.dim(1);
      std::vector<double> broadcast(f_d.numel());
      for (std::size_t i = 0; i < scale.size(); ++i)
        for (std::size_t j = 0; j < channels; ++j) broadcast[i * channels + j] = scale[i];
      f_d = attach_grad_hook(f_d, broadcast);
    }
    const Tensor term = mean(distance_map(f_e, f_d));
    total = total.defined() ? add(total, term) : term;
    terms.distances.push_back(std::move(d_plain));
    terms.scales.push_back(std::move(scale));
    terms.hooked_outputs.push_back(f_d);
  }
  terms.loss = div_scalar(total, static_cast<double>(pairing.size()));
  return terms;
}

}  // namespace proad

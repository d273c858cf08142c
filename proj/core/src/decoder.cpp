#include "proad/decoder.hpp"

#include "proad/error.hpp"
#include "proad/ops.hpp"

namespace proad {

DecoderLayerParams DecoderLayerParams::init(std::size_t dim, double stddev, Rng& rng) {
  DecoderLayerParams p;
  p.ln_attn = LayerNorm::init(dim, true);
  p.ln_ffn = LayerNorm::init(dim, true);
  p.attn = AttentionProjections::init(dim, stddev, rng, true);
  p.ffn = FeedForward::init(dim, 4 * dim, stddev, rng, true);
  return p;
}

void DecoderLayerParams::collect(const std::string& prefix, ParameterList& out) const {
  ln_attn.collect(prefix + ".ln_attn", out);
  ln_ffn.collect(prefix + ".ln_ffn", out);
  attn.collect(prefix + ".attn", out);
  ffn.collect(prefix + ".ffn", out);
}

Tensor prototype_update(const Tensor& prototypes, const Tensor& targets, const DecoderLayerParams& layer,
                        const AttentionOptions& attention) {
  const Tensor aggregated =
      add(prototypes, linear_cross_attention(layer.ln_attn(prototypes), layer.ln_attn(targets), layer.attn, attention));
  return add(aggregated, layer.ffn(layer.ln_ffn(aggregated)));
}

Reconstruction target_reconstruct(const Tensor& targets, const Tensor& p_next, const DecoderLayerParams& layer,
                                  bool constraint, const AttentionOptions& attention) {
  if (constraint && p_next.dim(0) != targets.dim(0)) {
    throw ConfigError("prototype constraint needs one prototype per patch, got " + std::to_string(p_next.dim(0)) +
                      " prototypes for " + std::to_string(targets.dim(0)) + " patches");
  }
  Reconstruction r;
  r.f_rec =
      add(targets, linear_cross_attention(layer.ln_attn(targets), layer.ln_attn(p_next), layer.attn, attention));
  if (constraint) {
    r.p_reg = layer.ffn(layer.ln_ffn(p_next));
    r.f_d = add(r.f_rec, r.p_reg);
  } else {
    r.f_d = add(r.f_rec, layer.ffn(layer.ln_ffn(r.f_rec)));
  }
  return r;
}

DecoderTrace decoder_forward(const Tensor& q_bn, const Tensor& p_bn, const std::vector<DecoderLayerParams>& layers,
                             const DecoderOptions& options) {
  if (layers.empty()) throw ConfigError("decoder needs at least one layer");
  if (q_bn.rank() != 2 || p_bn.rank() != 2 || q_bn.dim(1) != p_bn.dim(1)) {
    throw DimensionError("decoder inputs " + shape_to_string(q_bn.shape()) + " and " +
                         shape_to_string(p_bn.shape()) + " disagree");
  }
  DecoderTrace trace;
  trace.q0 = q_bn;
  trace.p0 = p_bn;
  Tensor q = q_bn;
  Tensor p = p_bn;
  // Static variant: one aggregation before the first layer, then frozen.
  Tensor static_prototypes;
  if (!options.dynamic) static_prototypes = prototype_update(p_bn, q_bn, layers.front(), options.attention);
  for (const auto& layer : layers) {
    const Tensor p_next = options.dynamic ? prototype_update(p, q, layer, options.attention) : static_prototypes;
    Reconstruction r = target_reconstruct(q, p_next, layer, options.constraint, options.attention);
    trace.layers.push_back({p_next, r.f_rec, r.p_reg, r.f_d});
    q = r.f_d;
    p = p_next;
  }
  return trace;
}

}  // namespace proad

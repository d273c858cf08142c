#pragma once

#include <vector>

#include "proad/attention.hpp"
#include "proad/layers.hpp"

namespace proad {

// One decoder layer. The same attention projections and FFN serve the
// prototype update, the target reconstruction and the prototype constraint.
struct DecoderLayerParams {
  LayerNorm ln_attn;
  LayerNorm ln_ffn;
  AttentionProjections attn;
  FeedForward ffn;

  static DecoderLayerParams init(std::size_t dim, double stddev, Rng& rng);
  void collect(const std::string& prefix, ParameterList& out) const;
};

struct DecoderOptions {
  bool constraint = true;  // add FFN(P^{l+1}) position-wise to the reconstruction
  bool dynamic = true;     // re-aggregate prototypes in every layer
  AttentionOptions attention;
};

struct LayerTrace {
  Tensor p_next;  // P^{l+1}, M x C
  Tensor f_rec;   // N x C
  Tensor p_reg;   // M x C; undefined when the constraint is off
  Tensor f_d;     // N x C, also the next layer's target stream
};

struct DecoderTrace {
  Tensor q0;  // Q^0 = Q_bn
  Tensor p0;  // P^0 = P_bn
  std::vector<LayerTrace> layers;
  const Tensor& output() const { return layers.back().f_d; }
};

// A = P + LCA(ln(P), ln(Q));  P_next = A + FFN(ln_ffn(A))
Tensor prototype_update(const Tensor& prototypes, const Tensor& targets, const DecoderLayerParams& layer,
                        const AttentionOptions& attention);

struct Reconstruction {
  Tensor f_rec;
  Tensor p_reg;
  Tensor f_d;
};

// f_rec = Q + LCA(ln(Q), ln(P_next)). With the constraint,
// f_d = f_rec + FFN(ln_ffn(P_next)) row-aligned with the patches (M must
// equal N); without it, f_d = f_rec + FFN(ln_ffn(f_rec)).
Reconstruction target_reconstruct(const Tensor& targets, const Tensor& p_next, const DecoderLayerParams& layer,
                                  bool constraint, const AttentionOptions& attention);

DecoderTrace decoder_forward(const Tensor& q_bn, const Tensor& p_bn, const std::vector<DecoderLayerParams>& layers,
                             const DecoderOptions& options);

}  // namespace proad

#pragma once

#include <string>

#include "proad/layers.hpp"

namespace proad {

// Nonnegative feature map applied to queries and keys.
enum class Kernel { EluPlusOne, Relu };

std::string to_string(Kernel kernel);
Kernel kernel_from_string(const std::string& name);

struct AttentionOptions {
  Kernel kernel = Kernel::EluPlusOne;
  // Divide each output row by phi(q_i) . sum_j phi(k_j) + eps.
  bool normalize = true;
  double eps = 1e-6;
};

// The four C x C projections (with biases) of one attention block.
struct AttentionProjections {
  Linear query;
  Linear key;
  Linear value;
  Linear out;

  static AttentionProjections init(std::size_t dim, double stddev, Rng& rng, bool trainable);
  void collect(const std::string& prefix, ParameterList& out) const;
};

Tensor apply_kernel(const Tensor& x, Kernel kernel);

// phi(q) (phi(k)^T v) on already-projected inputs: q [A x C], k/v [B x C].
// Complexity is linear in A and B; no A x B attention map is formed.
Tensor linear_attention(const Tensor& q, const Tensor& k, const Tensor& v, const AttentionOptions& options);

// Full linear cross-attention: projects queries from `query_src` and
// keys/values from `kv_src`, attends, then applies the output projection.
Tensor linear_cross_attention(const Tensor& query_src, const Tensor& kv_src, const AttentionProjections& proj,
                              const AttentionOptions& options);

}  // namespace proad

#include "proad/attention.hpp"

#include "proad/error.hpp"
#include "proad/ops.hpp"

namespace proad {

std::string to_string(Kernel kernel) { return kernel == Kernel::Relu ? "relu" : "elu_plus_one"; }

Kernel kernel_from_string(const std::string& name) {
  if (name == "elu_plus_one" || name == "elu") return Kernel::EluPlusOne;
  if (name == "relu") return Kernel::Relu;
  throw ConfigError("unknown attention kernel '" + name + "' (expected elu_plus_one or relu)");
}

AttentionProjections AttentionProjections::init(std::size_t dim, double stddev, Rng& rng, bool trainable) {
  AttentionProjections p;
  p.query = Linear::init(dim, dim, stddev, rng, trainable);
  p.key = Linear::init(dim, dim, stddev, rng, trainable);
  p.value = Linear::init(dim, dim, stddev, rng, trainable);
  p.out = Linear::init(dim, dim, stddev, rng, trainable);
  return p;
}

void AttentionProjections::collect(const std::string& prefix, ParameterList& out) const {
  query.collect(prefix + ".q", out);
  key.collect(prefix + ".k", out);
  value.collect(prefix + ".v", out);
  this->out.collect(prefix + ".o", out);
}

Tensor apply_kernel(const Tensor& x, Kernel kernel) {
  return kernel == Kernel::Relu ? relu(x) : elu_plus_one(x);
}

Tensor linear_attention(const Tensor& q, const Tensor& k, const Tensor& v, const AttentionOptions& options) {
  if (q.rank() != 2 || k.rank() != 2 || v.rank() != 2) {
    throw DimensionError("linear_attention expects 2-D operands");
  }
  if (k.dim(0) != v.dim(0) || q.dim(1) != k.dim(1)) {
    throw DimensionError("linear_attention: incompatible q " + shape_to_string(q.shape()) + ", k " +
                         shape_to_string(k.shape()) + ", v " + shape_to_string(v.shape()));
  }
  const Tensor phi_q = apply_kernel(q, options.kernel);
  const Tensor phi_k = apply_kernel(k, options.kernel);
  // [C x C] context accumulated over the key/value tokens.
  const Tensor context = matmul(transpose(phi_k), v);
  Tensor raw = matmul(phi_q, context);
  if (!options.normalize) return raw;
  const Tensor key_mass = transpose(column_sum(phi_k));  // [C x 1]
  const Tensor denom = add_scalar(matmul(phi_q, key_mass), options.eps);
  return div(raw, denom);
}

Tensor linear_cross_attention(const Tensor& query_src, const Tensor& kv_src, const AttentionProjections& proj,
                              const AttentionOptions& options) {
  const std::size_t c = proj.query.in_features();
  if (query_src.rank() != 2 || kv_src.rank() != 2 || query_src.dim(1) != c || kv_src.dim(1) != c) {
    throw DimensionError("linear_cross_attention: expected [* x " + std::to_string(c) + "] inputs, got " +
                         shape_to_string(query_src.shape()) + " and " + shape_to_string(kv_src.shape()));
  }
  const Tensor attended = linear_attention(proj.query(query_src), proj.key(kv_src), proj.value(kv_src), options);
  return proj.out(attended);
}

}  // namespace proad

#pragma once

#include <string>
#include <vector>

#include "proad/rng.hpp"
#include "proad/tensor.hpp"

namespace proad {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};
using ParameterList = std::vector<NamedTensor>;

// y = x W + b, with W stored as [in x out].
struct Linear {
  Tensor weight;
  Tensor bias;

  // Weights ~ N(0, stddev^2), bias zero.
  static Linear init(std::size_t in, std::size_t out, double stddev, Rng& rng, bool trainable);
  static Linear zeros(std::size_t in, std::size_t out, bool trainable);

  std::size_t in_features() const { return weight.dim(0); }
  std::size_t out_features() const { return weight.dim(1); }
  Tensor operator()(const Tensor& x) const;
  void collect(const std::string& prefix, ParameterList& out) const;
};

struct LayerNorm {
  Tensor gamma;
  Tensor beta;
  double eps = 1e-5;

  static LayerNorm init(std::size_t dim, bool trainable);
  Tensor operator()(const Tensor& x) const;
  void collect(const std::string& prefix, ParameterList& out) const;
};

// C -> hidden -> C with GELU in between.
struct FeedForward {
  Linear fc1;
  Linear fc2;

  static FeedForward init(std::size_t dim, std::size_t hidden, double stddev, Rng& rng, bool trainable);
  Tensor operator()(const Tensor& x) const;
  void collect(const std::string& prefix, ParameterList& out) const;
};

std::size_t count_elements(const ParameterList& params);

}  // namespace proad

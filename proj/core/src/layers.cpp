#include "proad/layers.hpp"

#include "proad/ops.hpp"

namespace proad {

Linear Linear::init(std::size_t in, std::size_t out, double stddev, Rng& rng, bool trainable) {
  std::vector<double> w(in * out);
  for (auto& v : w) v = rng.normal(0.0, stddev);
  return {Tensor::from({in, out}, std::move(w), trainable), Tensor::zeros({out}, trainable)};
}

Linear Linear::zeros(std::size_t in, std::size_t out, bool trainable) {
  return {Tensor::zeros({in, out}, trainable), Tensor::zeros({out}, trainable)};
}

Tensor Linear::operator()(const Tensor& x) const { return add(matmul(x, weight), bias); }

void Linear::collect(const std::string& prefix, ParameterList& out) const {
  out.push_back({prefix + ".weight", weight});
  out.push_back({prefix + ".bias", bias});
}

LayerNorm LayerNorm::init(std::size_t dim, bool trainable) {
  return {Tensor::full({dim}, 1.0, trainable), Tensor::zeros({dim}, trainable)};
}

Tensor LayerNorm::operator()(const Tensor& x) const { return layer_norm(x, gamma, beta, eps); }

void LayerNorm::collect(const std::string& prefix, ParameterList& out) const {
  out.push_back({prefix + ".gamma", gamma});
  out.push_back({prefix + ".beta", beta});
}

FeedForward FeedForward::init(std::size_t dim, std::size_t hidden, double stddev, Rng& rng, bool trainable) {
  FeedForward ffn;
  ffn.fc1 = Linear::init(dim, hidden, stddev, rng, trainable);
  ffn.fc2 = Linear::init(hidden, dim, stddev, rng, trainable);
  return ffn;
}

Tensor FeedForward::operator()(const Tensor& x) const { return fc2(gelu(fc1(x))); }

void FeedForward::collect(const std::string& prefix, ParameterList& out) const {
  fc1.collect(prefix + ".fc1", out);
  fc2.collect(prefix + ".fc2", out);
}

std::size_t count_elements(const ParameterList& params) {
  std::size_t n = 0;
  for (const auto& p : params) n += p.tensor.numel();
  return n;
}

}  // namespace proad

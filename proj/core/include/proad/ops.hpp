#pragma once

#include <span>

#include "proad/rng.hpp"
#include "proad/tensor.hpp"

namespace proad {

// Matrix product of 2-D tensors: [m x k] * [k x n] -> [m x n].
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

// Binary elementwise ops broadcast over trailing dimensions (numpy rules).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

Tensor add_scalar(const Tensor& a, double s);
Tensor mul_scalar(const Tensor& a, double s);
Tensor div_scalar(const Tensor& a, double s);

// GELU, tanh approximation.
Tensor gelu(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor relu(const Tensor& a);
// elu(x) + 1: strictly positive kernel for linear attention.
Tensor elu_plus_one(const Tensor& a);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
// [R x C] -> [1 x C]
Tensor column_sum(const Tensor& a);

// Normalizes over the last dimension, then applies gamma/beta of size C.
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = 1e-5);

// Inverted dropout. Identity (same handle) when !training or prob == 0.
Tensor dropout(const Tensor& x, double prob, bool training, Rng& rng);

// Identity in the forward pass; the gradient flowing back into `x` is
// multiplied elementwise by `scale_map`, which is treated as a constant.
Tensor attach_grad_hook(const Tensor& x, std::span<const double> scale_map);

// Rowwise cosine distance 1 - <a_i, b_i> / (|a_i| |b_i|) of two [N x C]
// tensors, giving [N]. The norm product is clamped below by eps.
Tensor cosine_distance_rows(const Tensor& a, const Tensor& b, double eps = 1e-12);

}  // namespace proad

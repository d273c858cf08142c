#include "proad/ops.hpp"

#include <algorithm>
#include <Eigen/Core>
#include <cmath>
#include <numbers>

#include "proad/error.hpp"

namespace proad {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

std::vector<double>& grad_buffer(detail::Node& n) {
  if (n.grad.empty()) n.grad.assign(n.data.size(), 0.0);
  return n.grad;
}

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                         shape_to_string(t.shape()));
  }
}

// Flat-index maps from the broadcast output back into each operand. Empty
// maps mean the operand already has the output shape.
struct BroadcastPlan {
  Shape out;
  std::vector<std::size_t> index_a;
  std::vector<std::size_t> index_b;
};

std::vector<std::size_t> broadcast_index(const Shape& in, const Shape& out) {
  const std::size_t rank = out.size();
  const std::size_t offset = rank - in.size();
  std::vector<std::size_t> stride(rank, 0);
  std::size_t s = 1;
  for (std::size_t k = in.size(); k-- > 0;) {
    stride[k + offset] = in[k] == 1 ? 0 : s;
    s *= in[k];
  }
  const std::size_t n = shape_numel(out);
  std::vector<std::size_t> index(n);
  std::vector<std::size_t> counter(rank, 0);
  std::size_t flat = 0;
  for (std::size_t i = 0; i < n; ++i) {
    index[i] = flat;
    for (std::size_t k = rank; k-- > 0;) {
      ++counter[k];
      flat += stride[k];
      if (counter[k] < out[k]) break;
      flat -= stride[k] * counter[k];
      counter[k] = 0;
    }
  }
  return index;
}

BroadcastPlan plan_broadcast(const Shape& a, const Shape& b, const char* op) {
  BroadcastPlan plan;
  if (a == b) {
    plan.out = a;
    return plan;
  }
  const std::size_t rank = std::max(a.size(), b.size());
  plan.out.assign(rank, 1);
  for (std::size_t k = 0; k < rank; ++k) {
    const std::size_t da = k < rank - a.size() ? 1 : a[k - (rank - a.size())];
    const std::size_t db = k < rank - b.size() ? 1 : b[k - (rank - b.size())];
    if (da != db && da != 1 && db != 1) {
      throw DimensionError(std::string(op) + ": shapes " + shape_to_string(a) + " and " +
                           shape_to_string(b) + " do not broadcast");
    }
    plan.out[k] = std::max(da, db);
  }
  if (a != plan.out) plan.index_a = broadcast_index(a, plan.out);
  if (b != plan.out) plan.index_b = broadcast_index(b, plan.out);
  return plan;
}

inline std::size_t at(const std::vector<std::size_t>& index, std::size_t i) {
  return index.empty() ? i : index[i];
}

template <class Forward, class GradA, class GradB>
Tensor binary_op(const Tensor& a, const Tensor& b, const char* name, Forward f, GradA da, GradB db) {
  auto plan = plan_broadcast(a.shape(), b.shape(), name);
  const std::size_t n = shape_numel(plan.out);
  std::vector<double> out(n);
  auto xa = a.data();
  auto xb = b.data();
  for (std::size_t i = 0; i < n; ++i) out[i] = f(xa[at(plan.index_a, i)], xb[at(plan.index_b, i)]);
  auto ia = std::move(plan.index_a);
  auto ib = std::move(plan.index_b);
  return Tensor::make_result(plan.out, std::move(out), {a, b},
                             [ia = std::move(ia), ib = std::move(ib), da, db](detail::Node& self) {
                               auto& na = *self.inputs[0];
                               auto& nb = *self.inputs[1];
                               const auto& g = self.grad;
                               if (na.requires_grad) {
                                 auto& ga = grad_buffer(na);
                                 for (std::size_t i = 0; i < g.size(); ++i) {
                                   const auto j = at(ia, i), k = at(ib, i);
                                   ga[j] += da(g[i], na.data[j], nb.data[k]);
                                 }
                               }
                               if (nb.requires_grad) {
                                 auto& gb = grad_buffer(nb);
                                 for (std::size_t i = 0; i < g.size(); ++i) {
                                   const auto j = at(ia, i), k = at(ib, i);
                                   gb[k] += db(g[i], na.data[j], nb.data[k]);
                                 }
                               }
                             });
}

// Unary op whose derivative is expressed through the input value.
template <class Forward, class Derivative>
Tensor unary_op(const Tensor& a, Forward f, Derivative df) {
  auto x = a.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i]);
  return Tensor::make_result(a.shape(), std::move(out), {a}, [df](detail::Node& self) {
    auto& in = *self.inputs[0];
    auto& g = grad_buffer(in);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * df(in.data[i]);
  });
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const auto m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw DimensionError("matmul: inner dimensions disagree, " + shape_to_string(a.shape()) + " x " +
                         shape_to_string(b.shape()));
  }
  std::vector<double> out(m * n);
  MutMap(out.data(), m, n).noalias() = ConstMap(a.data().data(), m, k) * ConstMap(b.data().data(), k, n);
  return Tensor::make_result({m, n}, std::move(out), {a, b}, [m, k, n](detail::Node& self) {
    auto& na = *self.inputs[0];
    auto& nb = *self.inputs[1];
    ConstMap g(self.grad.data(), m, n);
    if (na.requires_grad) {
      MutMap(grad_buffer(na).data(), m, k).noalias() += g * ConstMap(nb.data.data(), k, n).transpose();
    }
    if (nb.requires_grad) {
      MutMap(grad_buffer(nb).data(), k, n).noalias() += ConstMap(na.data.data(), m, k).transpose() * g;
    }
  });
}

Tensor transpose(const Tensor& a) {
  require_rank(a, 2, "transpose");
  const auto r = a.dim(0), c = a.dim(1);
  std::vector<double> out(r * c);
  auto x = a.data();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = x[i * c + j];
  return Tensor::make_result({c, r}, std::move(out), {a}, [r, c](detail::Node& self) {
    auto& g = grad_buffer(*self.inputs[0]);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) g[i * c + j] += self.grad[j * r + i];
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  return binary_op(
      a, b, "add", [](double x, double y) { return x + y; }, [](double g, double, double) { return g; },
      [](double g, double, double) { return g; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary_op(
      a, b, "sub", [](double x, double y) { return x - y; }, [](double g, double, double) { return g; },
      [](double g, double, double) { return -g; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary_op(
      a, b, "mul", [](double x, double y) { return x * y; },
      [](double g, double, double y) { return g * y; }, [](double g, double x, double) { return g * x; });
}

Tensor div(const Tensor& a, const Tensor& b) {
  return binary_op(
      a, b, "div", [](double x, double y) { return x / y; },
      [](double g, double, double y) { return g / y; },
      [](double g, double x, double y) { return -g * x / (y * y); });
}

Tensor add_scalar(const Tensor& a, double s) {
  return unary_op(a, [s](double x) { return x + s; }, [](double) { return 1.0; });
}

Tensor mul_scalar(const Tensor& a, double s) {
  return unary_op(a, [s](double x) { return x * s; }, [s](double) { return s; });
}

Tensor div_scalar(const Tensor& a, double s) {
  if (s == 0.0) throw ParameterError("div_scalar: division by zero");
  return unary_op(a, [s](double x) { return x / s; }, [s](double) { return 1.0 / s; });
}

Tensor gelu(const Tensor& a) {
  constexpr double k = 0.7978845608028654;  // sqrt(2 / pi)
  constexpr double c = 0.044715;
  return unary_op(
      a,
      [](double x) { return 0.5 * x * (1.0 + std::tanh(k * (x + c * x * x * x))); },
      [](double x) {
        const double t = std::tanh(k * (x + c * x * x * x));
        return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * k * (1.0 + 3.0 * c * x * x);
      });
}

Tensor exp(const Tensor& a) {
  return unary_op(a, [](double x) { return std::exp(x); }, [](double x) { return std::exp(x); });
}

Tensor relu(const Tensor& a) {
  return unary_op(a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor elu_plus_one(const Tensor& a) {
  return unary_op(
      a, [](double x) { return x > 0.0 ? x + 1.0 : std::exp(x); },
      [](double x) { return x > 0.0 ? 1.0 : std::exp(x); });
}

Tensor sum(const Tensor& a) {
  double total = 0.0;
  for (double v : a.data()) total += v;
  return Tensor::make_result({}, {total}, {a}, [](detail::Node& self) {
    auto& g = grad_buffer(*self.inputs[0]);
    const double s = self.grad[0];
    for (auto& v : g) v += s;
  });
}

Tensor mean(const Tensor& a) {
  if (a.numel() == 0) throw DimensionError("mean of empty tensor");
  return div_scalar(sum(a), static_cast<double>(a.numel()));
}

Tensor column_sum(const Tensor& a) {
  require_rank(a, 2, "column_sum");
  const auto r = a.dim(0), c = a.dim(1);
  std::vector<double> out(c, 0.0);
  auto x = a.data();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j] += x[i * c + j];
  return Tensor::make_result({1, c}, std::move(out), {a}, [r, c](detail::Node& self) {
    auto& g = grad_buffer(*self.inputs[0]);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) g[i * c + j] += self.grad[j];
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  if (x.rank() == 0) throw DimensionError("layer_norm on a scalar");
  const std::size_t c = x.shape().back();
  if (gamma.numel() != c || beta.numel() != c) {
    throw DimensionError("layer_norm: gamma/beta size does not match last dimension " + std::to_string(c));
  }
  const std::size_t rows = x.numel() / c;
  auto in = x.data();
  auto gm = gamma.data();
  auto bt = beta.data();
  std::vector<double> out(x.numel());
  std::vector<double> xhat(x.numel());
  std::vector<double> inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = in.data() + r * c;
    double mu = 0.0;
    for (std::size_t j = 0; j < c; ++j) mu += row[j];
    mu /= static_cast<double>(c);
    double var = 0.0;
    for (std::size_t j = 0; j < c; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<double>(c);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < c; ++j) {
      const double h = (row[j] - mu) * inv_std[r];
      xhat[r * c + j] = h;
      out[r * c + j] = h * gm[j] + bt[j];
    }
  }
  return Tensor::make_result(
      x.shape(), std::move(out), {x, gamma, beta},
      [c, rows, xhat = std::move(xhat), inv_std = std::move(inv_std)](detail::Node& self) {
        auto& nx = *self.inputs[0];
        auto& ng = *self.inputs[1];
        auto& nb = *self.inputs[2];
        const auto& g = self.grad;
        if (ng.requires_grad || nb.requires_grad) {
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t j = 0; j < c; ++j) {
              ng.accumulate_grad(j, g[r * c + j] * xhat[r * c + j]);
              nb.accumulate_grad(j, g[r * c + j]);
            }
          }
        }
        if (!nx.requires_grad) return;
        auto& gx = grad_buffer(nx);
        const double inv_c = 1.0 / static_cast<double>(c);
        for (std::size_t r = 0; r < rows; ++r) {
          double mean_dh = 0.0, mean_dh_h = 0.0;
          for (std::size_t j = 0; j < c; ++j) {
            const double dh = g[r * c + j] * ng.data[j];
            mean_dh += dh;
            mean_dh_h += dh * xhat[r * c + j];
          }
          mean_dh *= inv_c;
          mean_dh_h *= inv_c;
          for (std::size_t j = 0; j < c; ++j) {
            const double dh = g[r * c + j] * ng.data[j];
            gx[r * c + j] += inv_std[r] * (dh - mean_dh - xhat[r * c + j] * mean_dh_h);
          }
        }
      });
}

Tensor dropout(const Tensor& x, double prob, bool training, Rng& rng) {
  if (!(prob >= 0.0 && prob < 1.0)) {
    throw ParameterError("dropout probability must lie in [0, 1), got " + std::to_string(prob));
  }
  if (!training || prob == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - prob);
  std::vector<double> scale(x.numel());
  std::vector<double> out(x.numel());
  auto in = x.data();
  for (std::size_t i = 0; i < scale.size(); ++i) {
    scale[i] = rng.uniform() < prob ? 0.0 : keep_scale;
    out[i] = in[i] * scale[i];
  }
  return Tensor::make_result(x.shape(), std::move(out), {x}, [scale = std::move(scale)](detail::Node& self) {
    auto& g = grad_buffer(*self.inputs[0]);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * scale[i];
  });
}

Tensor attach_grad_hook(const Tensor& x, std::span<const double> scale_map) {
  if (scale_map.size() != x.numel()) {
    throw DimensionError("attach_grad_hook: scale map has " + std::to_string(scale_map.size()) +
                         " entries for tensor " + shape_to_string(x.shape()));
  }
  for (double s : scale_map) {
    if (!std::isfinite(s) || s < 0.0) {
      throw ParameterError("attach_grad_hook: scale entries must be finite and nonnegative");
    }
  }
  std::vector<double> scale(scale_map.begin(), scale_map.end());
  auto in = x.data();
  return Tensor::make_result(x.shape(), std::vector<double>(in.begin(), in.end()), {x},
                             [scale = std::move(scale)](detail::Node& self) {
                               auto& g = grad_buffer(*self.inputs[0]);
                               for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * scale[i];
                             });
}

Tensor cosine_distance_rows(const Tensor& a, const Tensor& b, double eps) {
  require_rank(a, 2, "cosine_distance_rows");
  if (a.shape() != b.shape()) {
    throw DimensionError("cosine_distance_rows: shapes " + shape_to_string(a.shape()) + " and " +
                         shape_to_string(b.shape()) + " differ");
  }
  const auto n = a.dim(0), c = a.dim(1);
  auto xa = a.data();
  auto xb = b.data();
  std::vector<double> out(n);
  // Per row: dot, |a|^2, |b|^2, clamped denominator.
  std::vector<double> stats(4 * n);
  for (std::size_t i = 0; i < n; ++i) {
    double dot = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      const double u = xa[i * c + j], v = xb[i * c + j];
      dot += u * v;
      aa += u * u;
      bb += v * v;
    }
    const double denom = std::max(std::sqrt(aa) * std::sqrt(bb), eps);
    stats[4 * i] = dot;
    stats[4 * i + 1] = aa;
    stats[4 * i + 2] = bb;
    stats[4 * i + 3] = denom;
    out[i] = std::clamp(1.0 - dot / denom, 0.0, 2.0);  // rounding can leave the range
  }
  return Tensor::make_result({n}, std::move(out), {a, b}, [n, c, eps, stats = std::move(stats)](detail::Node& self) {
    auto& na = *self.inputs[0];
    auto& nb = *self.inputs[1];
    for (std::size_t i = 0; i < n; ++i) {
      const double g = self.grad[i];
      const double dot = stats[4 * i], aa = stats[4 * i + 1], bb = stats[4 * i + 2], denom = stats[4 * i + 3];
      const bool clamped = denom <= eps;
      const double cosv = dot / denom;
      for (std::size_t j = 0; j < c; ++j) {
        const double u = na.data[i * c + j], v = nb.data[i * c + j];
        // d(distance) = -d(cos)
        if (na.requires_grad) {
          const double dcos = clamped ? v / denom : v / denom - cosv * u / aa;
          na.accumulate_grad(i * c + j, -g * dcos);
        }
        if (nb.requires_grad) {
          const double dcos = clamped ? u / denom : u / denom - cosv * v / bb;
          nb.accumulate_grad(i * c + j, -g * dcos);
        }
      }
    }
  });
}

}  // namespace proad

#include "proad/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "proad/error.hpp"

namespace proad {

StableAdamW::StableAdamW(ParameterList params, AdamWConfig config)
    : params_(std::move(params)), config_(config) {
  for (const auto& p : params_) {
    m_.emplace_back(p.tensor.numel(), 0.0);
    v_.emplace_back(p.tensor.numel(), 0.0);
  }
}

bool StableAdamW::step(double lr) {
  for (const auto& p : params_) {
    if (!p.tensor.has_grad()) continue;
    for (double g : p.tensor.grad()) {
      if (!std::isfinite(g)) {
        ++rejected_;
        return false;
      }
    }
  }
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double bias1 = 1.0 - std::pow(config_.beta1, t);
  const double bias2 = 1.0 - std::pow(config_.beta2, t);
  std::vector<double> update;
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Tensor param = params_[k].tensor;
    auto values = param.mutable_data();
    const bool has_grad = param.has_grad();
    auto grad = param.grad();
    auto& m = m_[k];
    auto& v = v_[k];
    update.assign(values.size(), 0.0);
    double sq = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = has_grad ? grad[i] : 0.0;
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g;
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
      update[i] = (m[i] / bias1) / (std::sqrt(v[i] / bias2) + config_.eps);
      sq += update[i] * update[i];
    }
    const double rms = std::sqrt(sq / static_cast<double>(values.size()));
    const double clip = rms > config_.clip_threshold ? config_.clip_threshold / rms : 1.0;
    const double decay = 1.0 - lr * config_.weight_decay;
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = values[i] * decay - lr * clip * update[i];
  }
  return true;
}

ParameterList StableAdamW::state() const {
  ParameterList out;
  for (std::size_t k = 0; k < params_.size(); ++k) {
    const Shape& shape = params_[k].tensor.shape();
    out.push_back({params_[k].name + ".m", Tensor::from(shape, m_[k])});
    out.push_back({params_[k].name + ".v", Tensor::from(shape, v_[k])});
  }
  out.push_back({"steps", Tensor::from({2}, {static_cast<double>(steps_), static_cast<double>(rejected_)})});
  return out;
}

void StableAdamW::load_state(const ParameterList& state) {
  auto find = [&](const std::string& name) -> const Tensor& {
    for (const auto& s : state)
      if (s.name == name) return s.tensor;
    throw ConfigError("optimizer state lacks '" + name + "'");
  };
  for (std::size_t k = 0; k < params_.size(); ++k) {
    const Tensor& m = find(params_[k].name + ".m");
    const Tensor& v = find(params_[k].name + ".v");
    if (m.numel() != m_[k].size() || v.numel() != v_[k].size()) {
      throw ConfigError("optimizer state for '" + params_[k].name + "' has the wrong size");
    }
    m_[k].assign(m.data().begin(), m.data().end());
    v_[k].assign(v.data().begin(), v.data().end());
  }
  const Tensor& counters = find("steps");
  steps_ = static_cast<std::size_t>(counters.at(0));
  rejected_ = static_cast<std::size_t>(counters.at(1));
}

double lr_schedule(std::size_t step, std::size_t total_steps, std::size_t warmup_steps, double base_lr) {
  if (step < warmup_steps) return base_lr * static_cast<double>(step) / static_cast<double>(warmup_steps);
  const std::size_t decay_steps = total_steps > warmup_steps ? total_steps - warmup_steps : 1;
  const double progress = std::min(1.0, static_cast<double>(step - warmup_steps) / static_cast<double>(decay_steps));
  return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace proad

#pragma once

#include <cstddef>

#include "proad/layers.hpp"

namespace proad {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-5;
  // Per-tensor cap on the RMS of the normalized Adam update.
  double clip_threshold = 1.0;
};

// AdamW with decoupled weight decay and per-tensor update clipping:
//   u = m_hat / (sqrt(v_hat) + eps),  u <- u * min(1, clip / RMS(u))
//   p <- p (1 - lr wd) - lr u
class StableAdamW {
 public:
  StableAdamW(ParameterList params, AdamWConfig config);

  // Applies one update from the parameters' current grads (missing grads
  // count as zero). Returns false, leaving everything untouched, when any
  // gradient is non-finite.
  bool step(double lr);

  std::size_t steps() const { return steps_; }
  std::size_t rejected() const { return rejected_; }
  const AdamWConfig& config() const { return config_; }

  // Moment buffers named "<param>.m" / "<param>.v", plus "step" counters for
  // checkpointing.
  ParameterList state() const;
  void load_state(const ParameterList& state);

 private:
  ParameterList params_;
  AdamWConfig config_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::size_t steps_ = 0;
  std::size_t rejected_ = 0;
};

// Linear warmup from 0 to base_lr, then cosine decay towards 0.
double lr_schedule(std::size_t step, std::size_t total_steps, std::size_t warmup_steps, double base_lr);

}  // namespace proad

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace proad {

// Mixes a base seed with stream identifiers (epoch, class id, sample index,
// ...) into an independent 64-bit seed.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> streams);

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  double uniform() { return unit_(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal(double mean = 0.0, double stddev = 1.0) {
    return mean + stddev * normal_(engine_);
  }
  // Uniform integer in [lo, hi].
  int integer(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(engine_);
  }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace proad

#include <benchmark/benchmark.h>

#include "proad/attention.hpp"
#include "proad/datagen.hpp"
#include "proad/loss.hpp"
#include "proad/metrics.hpp"
#include "proad/model.hpp"
#include "proad/ops.hpp"

using namespace proad;

namespace {

Tensor random_tensor(std::size_t rows, std::size_t cols, std::uint64_t seed, bool grad = false) {
  Rng rng(seed);
  std::vector<double> v(rows * cols);
  for (auto& x : v) x = rng.normal();
  return Tensor::from({rows, cols}, std::move(v), grad);
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor a = random_tensor(n, n, 1), b = random_tensor(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Matmul)->RangeMultiplier(2)->Range(32, 256)->Complexity();

// Cost should grow linearly with the number of tokens.
void BM_LinearAttention(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor q = random_tensor(n, 64, 3), k = random_tensor(n, 64, 4), v = random_tensor(n, 64, 5);
  for (auto _ : state) benchmark::DoNotOptimize(linear_attention(q, k, v, {}));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LinearAttention)->RangeMultiplier(4)->Range(64, 4096)->Complexity(benchmark::oN);

void BM_ModelStep(benchmark::State& state) {
  ModelConfig config;
  config.decoder_layers = static_cast<int>(state.range(0));
  const ProAD model(config);
  DatasetSpec spec;
  spec.num_classes = 1;
  spec.train_per_class = 1;
  spec.test_normal_per_class = 1;
  spec.test_anomalous_per_class = 1;
  const FeatureStack features = model.encode(generate_dataset(spec).front().image);
  Rng rng(0);
  for (auto _ : state) {
    const DecoderTrace trace = model.forward(features, true, rng);
    const LossTerms terms = decay_loss(trace, features, model.pairing(), {});
    backward(terms.loss);
    for (auto& p : model.parameters()) p.tensor.zero_grad();
  }
}
BENCHMARK(BM_ModelStep)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_Aupro(benchmark::State& state) {
  Rng rng(6);
  std::vector<std::vector<double>> maps;
  std::vector<Mask> masks;
  for (int i = 0; i < 8; ++i) {
    Mask m(64, 64);
    for (int y = 20; y < 30; ++y)
      for (int x = 10 + i; x < 25 + i; ++x) m.at(y, x) = 1;
    std::vector<double> map(64 * 64);
    for (std::size_t p = 0; p < map.size(); ++p) map[p] = rng.uniform() + 0.5 * m.values[p];
    maps.push_back(std::move(map));
    masks.push_back(std::move(m));
  }
  for (auto _ : state) benchmark::DoNotOptimize(aupro(maps, masks));
}
BENCHMARK(BM_Aupro)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();

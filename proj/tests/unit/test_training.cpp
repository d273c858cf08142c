#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "proad/error.hpp"
#include "proad/hash.hpp"
#include "proad/loss.hpp"
#include "proad/ops.hpp"
#include "proad/optimizer.hpp"
#include "proad/trainer.hpp"

using namespace proad;

namespace {

Tensor random_tensor(Shape shape, Rng& rng, bool grad = false) {
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) x = rng.normal();
  return Tensor::from(std::move(shape), std::move(v), grad);
}

// A one-layer trace whose f_D is a free leaf, for hook-level checks.
struct LeafSetup {
  FeatureStack features;
  DecoderTrace trace;
  Pairing pairing{{0, 0}};
};

LeafSetup leaf_setup(std::size_t n, std::size_t c, std::uint64_t seed) {
  Rng rng(seed);
  LeafSetup s;
  s.features.per_layer.push_back(random_tensor({n, c}, rng));
  LayerTrace t;
  t.f_d = random_tensor({n, c}, rng, true);
  s.trace.layers.push_back(t);
  return s;
}

}  // namespace

TEST(DistanceMap, Range) {
  Rng rng(1);
  const Tensor a = random_tensor({50, 8}, rng), b = random_tensor({50, 8}, rng);
  const Tensor ab = distance_map(a, b), aa = distance_map(a, a);
  for (double d : ab.data()) {
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 2.0);
  }
  for (double d : aa.data()) EXPECT_NEAR(d, 0.0, 1e-15);
}

TEST(DecayFactors, ConstantZeroAndHandExample) {
  for (double tau : {0.0, 1.0, 3.0}) {
    for (double s : decay_factors(std::vector<double>(7, 0.4), tau)) EXPECT_DOUBLE_EQ(s, 1.0);
    for (double s : decay_factors(std::vector<double>(7, 0.0), tau)) EXPECT_EQ(s, 1.0);
  }
  for (double s : decay_factors(std::vector<double>{0.1, 0.9, 0.0}, 0.0)) EXPECT_EQ(s, 1.0);
  const auto s = decay_factors(std::vector<double>{0.1, 0.3}, 3.0);
  EXPECT_NEAR(s[0], 0.125, 1e-12);
  EXPECT_NEAR(s[1], 3.375, 1e-12);
}

TEST(DecayFactors, AlphaAveragesToOne) {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> d(37);
    for (auto& x : d) x = 2.0 * rng.uniform();
    const auto alpha = decay_factors(d, 1.0);
    double m = 0.0;
    for (double a : alpha) m += a / 37.0;
    EXPECT_NEAR(m, 1.0, 1e-12);
  }
}

TEST(DecayLoss, PerfectReconstructionIsZero) {
  LeafSetup s = leaf_setup(6, 4, 3);
  s.trace.layers[0].f_d = s.features.per_layer[0];
  EXPECT_NEAR(decay_loss(s.trace, s.features, s.pairing, {}).loss.item(), 0.0, 1e-15);
}

TEST(DecayLoss, ScaleInvariant) {
  LeafSetup s = leaf_setup(6, 4, 4);
  const double base = decay_loss(s.trace, s.features, s.pairing, {}).loss.item();
  s.trace.layers[0].f_d = mul_scalar(s.trace.layers[0].f_d, 7.5);
  EXPECT_NEAR(decay_loss(s.trace, s.features, s.pairing, {}).loss.item(), base, 1e-14);
}

TEST(DecayLoss, BadPairingRejected) {
  LeafSetup s = leaf_setup(4, 4, 5);
  EXPECT_THROW(decay_loss(s.trace, s.features, Pairing{{1, 0}}, {}), ConfigError);
  EXPECT_THROW(decay_loss(s.trace, s.features, Pairing{{0, 3}}, {}), ConfigError);
}

TEST(DecayLoss, HookScalesGradientPerPosition) {
  for (double tau : {0.0, 1.0, 3.0}) {
    LeafSetup s = leaf_setup(2, 3, 6);
    Tensor f_d = s.trace.layers[0].f_d;
    backward(decay_loss(s.trace, s.features, s.pairing, {tau, false}).loss);
    const std::vector<double> plain(f_d.grad().begin(), f_d.grad().end());
    f_d.zero_grad();
    const LossTerms terms = decay_loss(s.trace, s.features, s.pairing, {tau, true});
    backward(terms.loss);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t c = 0; c < 3; ++c) {
        const double expected = plain[i * 3 + c] * terms.scales[0][i];
        EXPECT_LE(std::abs(f_d.grad()[i * 3 + c] - expected), 1e-12 * std::abs(expected)) << tau;
        if (tau == 0.0) EXPECT_EQ(f_d.grad()[i * 3 + c], plain[i * 3 + c]);
      }
  }
}

TEST(Optimizer, ZeroGradientCases) {
  Tensor p = Tensor::from({3}, {1.0, -2.0, 0.5}, true);
  AdamWConfig cfg;
  cfg.weight_decay = 0.0;
  StableAdamW opt({{"p", p}}, cfg);
  p.mutable_grad();  // allocate zeros
  opt.step(0.1);
  EXPECT_EQ(p.at(0), 1.0);
  EXPECT_EQ(p.at(1), -2.0);

  Tensor q = Tensor::from({2}, {4.0, -8.0}, true);
  AdamWConfig decay;
  decay.weight_decay = 0.01;
  StableAdamW opt2({{"q", q}}, decay);
  opt2.step(0.1);
  EXPECT_DOUBLE_EQ(q.at(0), 4.0 * (1.0 - 0.1 * 0.01));
  EXPECT_DOUBLE_EQ(q.at(1), -8.0 * (1.0 - 0.1 * 0.01));
}

TEST(Optimizer, MatchesHandSteppedQuadratic) {
  // f(p) = 0.5 a (p - b)^2, stepped twice by hand.
  const double a = 3.0, b = 0.25, lr = 0.05, wd = 1e-2;
  Tensor p = Tensor::from({1}, {2.0}, true);
  AdamWConfig cfg;
  cfg.weight_decay = wd;
  cfg.clip_threshold = 10.0;
  StableAdamW opt({{"p", p}}, cfg);
  double ref = 2.0, m = 0.0, v = 0.0;
  for (int t = 1; t <= 2; ++t) {
    p.zero_grad();
    backward(mul_scalar(mul(sub(p, Tensor::scalar(b)), sub(p, Tensor::scalar(b))), 0.5 * a));
    const double g = a * (ref - b);
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double u = (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
    ref = ref * (1 - lr * wd) - lr * u;
    opt.step(lr);
    EXPECT_NEAR(p.at(0), ref, 1e-12);
  }
}

TEST(Optimizer, UpdateClipping) {
  // First-step Adam updates are ~sign(g), so RMS ~1; a 0.5 threshold halves them.
  Tensor p = Tensor::from({4}, {0, 0, 0, 0}, true);
  AdamWConfig cfg;
  cfg.weight_decay = 0.0;
  cfg.clip_threshold = 0.5;
  StableAdamW opt({{"p", p}}, cfg);
  auto g = p.mutable_grad();
  g[0] = 1.0;
  g[1] = -2.0;
  g[2] = 3.0;
  g[3] = -4.0;
  opt.step(1.0);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(std::abs(p.at(i)), 0.5, 1e-6);
}

TEST(Optimizer, NonFiniteGradientRejected) {
  Tensor p = Tensor::from({2}, {1.0, 2.0}, true);
  StableAdamW opt({{"p", p}}, AdamWConfig{});
  p.mutable_grad()[1] = NAN;
  EXPECT_FALSE(opt.step(0.1));
  EXPECT_EQ(opt.rejected(), 1u);
  EXPECT_EQ(opt.steps(), 0u);
  EXPECT_EQ(p.at(0), 1.0);
}

TEST(Schedule, WarmupCosine) {
  const double base = 1e-3;
  const std::size_t total = 400, warmup = 40;
  EXPECT_EQ(lr_schedule(0, total, warmup, base), 0.0);
  EXPECT_NEAR(lr_schedule(20, total, warmup, base), base / 2, 1e-18);
  EXPECT_EQ(lr_schedule(warmup, total, warmup, base), base);
  EXPECT_NEAR(lr_schedule(warmup + (total - warmup) / 2, total, warmup, base), base / 2, 1e-12);
  EXPECT_LT(lr_schedule(total - 1, total, warmup, base), base * 1e-3);
  for (std::size_t s = warmup; s + 1 < total; ++s)
    EXPECT_GE(lr_schedule(s, total, warmup, base), lr_schedule(s + 1, total, warmup, base));
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  c.warmup_epochs = c.epochs;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig{};
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig{};
  EXPECT_EQ(c.epochs, 200);
  EXPECT_EQ(c.batch_size, 16);
  EXPECT_EQ(c.lr, 1e-4);
  EXPECT_EQ(c.weight_decay, 1e-5);
  EXPECT_EQ(c.warmup_epochs, 10);
  EXPECT_EQ(c.tau, 3.0);
}

TEST(Trainer, DeterministicParameterHash) {
  const auto data = generate_dataset(fixture::tiny_data());
  auto run = [&] {
    ProAD model(fixture::tiny_model());
    train(model, data, fixture::tiny_train(2));
    return parameter_hash(model);
  };
  const std::uint64_t a = run();
  EXPECT_EQ(a, run());
  EXPECT_NE(a, parameter_hash(ProAD(fixture::tiny_model())));
}

TEST(Trainer, EncoderStaysFrozen) {
  const auto data = generate_dataset(fixture::tiny_data());
  ProAD model(fixture::tiny_model());
  Fnv1a before;
  for (const auto& p : model.encoder().parameters()) before.update(p.tensor.data());
  train(model, data, fixture::tiny_train(1));
  Fnv1a after;
  for (const auto& p : model.encoder().parameters()) after.update(p.tensor.data());
  EXPECT_EQ(before.digest(), after.digest());
}

TEST(Trainer, ResumeIsBitIdentical) {
  const auto data = generate_dataset(fixture::tiny_data());
  const TrainConfig cfg = fixture::tiny_train(4);
  ProAD straight(fixture::tiny_model());
  const TrainResult full = train(straight, data, cfg);

  ProAD interrupted(fixture::tiny_model());
  const TrainResult first = train(interrupted, data, cfg, std::nullopt,
                                  [](const EpochRecord& r, const TrainState&) { return r.epoch < 2; });
  ASSERT_EQ(first.state.epochs_done, 2);
  const TrainResult second = train(interrupted, data, cfg, first.state);
  EXPECT_EQ(parameter_hash(straight), parameter_hash(interrupted));
  ASSERT_EQ(second.log.size(), 2u);
  EXPECT_EQ(second.log.back().loss, full.log.back().loss);
}

TEST(Trainer, LossDecreases) {
  const auto data = generate_dataset(fixture::tiny_data());
  ProAD model(fixture::tiny_model());
  const TrainResult r = train(model, data, fixture::tiny_train(10));
  EXPECT_LT(r.log.back().loss, r.log.front().loss);
}

TEST(Trainer, NonFiniteLossNamesTensor) {
  const auto data = generate_dataset(fixture::tiny_data());
  ProAD model(fixture::tiny_model());
  model.prototypes().mutable_data()[0] = NAN;
  try {
    train(model, data, fixture::tiny_train(1));
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("P_bn"), std::string::npos) << e.what();
  }
}

TEST(Trainer, NeedsNormalTrainingSamples) {
  auto data = generate_dataset(fixture::tiny_data());
  std::erase_if(data, [](const ImageSample& s) { return s.split == Split::Train; });
  ProAD model(fixture::tiny_model());
  EXPECT_THROW(train(model, data, fixture::tiny_train(1)), UsageError);
}

TEST(Trainer, TauZeroMatchesHookFree) {
  const auto data = generate_dataset(fixture::tiny_data());
  TrainConfig a = fixture::tiny_train(1);
  a.tau = 0.0;
  TrainConfig b = a;
  b.gradient_decay = false;
  ProAD ma(fixture::tiny_model()), mb(fixture::tiny_model());
  train(ma, data, a);
  train(mb, data, b);
  EXPECT_EQ(parameter_hash(ma), parameter_hash(mb));
}

TEST(Trainer, AblationTogglesAllTrain) {
  const auto data = generate_dataset(fixture::tiny_data());
  for (int mask = 0; mask < 8; ++mask) {
    ModelConfig c = fixture::tiny_model();
    c.anb = mask & 1;
    c.dynamic = mask & 2;
    c.constraint = mask & 4;
    ProAD model(c);
    const TrainResult r = train(model, data, fixture::tiny_train(1));
    EXPECT_TRUE(std::isfinite(r.log.back().loss));
    EXPECT_DOUBLE_EQ(model.feature_noise(), c.anb ? c.drop_prob : 0.0);
  }
}

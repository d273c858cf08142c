#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "proad/bottleneck.hpp"
#include "proad/checkpoint.hpp"
#include "proad/decoder.hpp"
#include "proad/encoder.hpp"
#include "proad/error.hpp"
#include "proad/hash.hpp"
#include "proad/model.hpp"
#include "proad/ops.hpp"
#include "proad/param_count.hpp"

using namespace proad;

namespace {

Tensor random_tensor(Shape shape, Rng& rng, bool grad = false, double scale = 1.0) {
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) x = rng.normal(0.0, scale);
  return Tensor::from(std::move(shape), std::move(v), grad);
}

Image random_image(int size, std::uint64_t seed) {
  Rng rng(seed);
  Image img(size, size, 3);
  for (auto& p : img.pixels) p = rng.uniform();
  return img;
}

std::uint64_t hash_params(const ParameterList& params) {
  Fnv1a h;
  for (const auto& p : params) h.update(p.tensor.data());
  return h.digest();
}

void zero(Tensor t) {
  for (auto& v : t.mutable_data()) v = 0.0;
}

// Randomize LN affine parameters too, so the transcription exercises them.
DecoderLayerParams random_layer(std::size_t c, Rng& rng) {
  DecoderLayerParams layer = DecoderLayerParams::init(c, 0.4, rng);
  for (Tensor t : {layer.ln_attn.gamma, layer.ln_attn.beta, layer.ln_ffn.gamma, layer.ln_ffn.beta,
                   layer.attn.query.bias, layer.attn.out.bias, layer.ffn.fc1.bias, layer.ffn.fc2.bias})
    for (auto& v : t.mutable_data()) v = rng.normal(0.0, 0.5);
  return layer;
}

oracle::Mat ffn(const oracle::Mat& x, const DecoderLayerParams& l) {
  return oracle::linear(oracle::map(oracle::linear(x, l.ffn.fc1.weight, l.ffn.fc1.bias), oracle::gelu),
                        l.ffn.fc2.weight, l.ffn.fc2.bias);
}

oracle::Mat lca(const oracle::Mat& qs, const oracle::Mat& kvs, const DecoderLayerParams& l) {
  const auto& a = l.attn;
  const oracle::Mat q = oracle::linear(qs, a.query.weight, a.query.bias);
  const oracle::Mat k = oracle::linear(kvs, a.key.weight, a.key.bias);
  const oracle::Mat v = oracle::linear(kvs, a.value.weight, a.value.bias);
  return oracle::linear(oracle::linear_attention(q, k, v, oracle::elu_plus_one, true, 1e-6), a.out.weight, a.out.bias);
}

ModelConfig tiny_config() {
  ModelConfig c;
  c.image_size = 32;
  c.encoder.dim = 16;
  c.encoder.num_layers = 4;
  c.encoder.fuse_from = 2;
  c.encoder.fuse_to = 3;
  c.decoder_layers = 2;
  return c;
}

}  // namespace

TEST(Encoder, ShapesAndFrozenParameters) {
  Encoder enc(EncoderConfig{});
  const FeatureStack fs = enc.encode(random_image(64, 1));
  ASSERT_EQ(fs.per_layer.size(), 8u);
  for (const auto& t : fs.per_layer) EXPECT_EQ(t.shape(), (Shape{64, 64}));
  EXPECT_EQ(enc.num_tokens(64, 64), 64u);
  for (const auto& p : enc.parameters()) EXPECT_FALSE(p.tensor.requires_grad()) << p.name;
}

TEST(Encoder, SameSeedSameWeights) {
  EncoderConfig cfg;
  cfg.seed = 7;
  EXPECT_EQ(hash_params(Encoder(cfg).parameters()), hash_params(Encoder(cfg).parameters()));
  EncoderConfig other = cfg;
  other.seed = 8;
  EXPECT_NE(hash_params(Encoder(cfg).parameters()), hash_params(Encoder(other).parameters()));
}

TEST(Encoder, DeterministicAndFusionIsPlainSum) {
  Encoder enc(EncoderConfig{});
  for (const Image& img : {random_image(64, 2), Image(64, 64, 3, 0.0)}) {
    const FeatureStack a = enc.encode(img), b = enc.encode(img);
    EXPECT_TRUE(std::equal(a.fused.data().begin(), a.fused.data().end(), b.fused.data().begin()));
    // Reverse-order summation agrees to rounding.
    std::vector<double> sum(a.fused.numel(), 0.0);
    for (int l = 7; l >= 2; --l)
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += a.per_layer[l - 1].at(i);
    for (std::size_t i = 0; i < sum.size(); ++i) EXPECT_NEAR(sum[i], a.fused.at(i), 1e-12);
  }
}

TEST(Encoder, IndivisibleImageRejected) {
  Encoder enc(EncoderConfig{});
  EXPECT_THROW(enc.encode(random_image(60, 3)), DimensionError);
  EncoderConfig bad;
  bad.fuse_from = 5;
  bad.fuse_to = 3;
  EXPECT_THROW(Encoder{bad}, ConfigError);
}

TEST(Encoder, NoGradientReachesEncoder) {
  Encoder enc(EncoderConfig{});
  const FeatureStack fs = enc.encode(random_image(64, 4));
  Tensor w = Tensor::full(fs.fused.shape(), 1.0, true);
  backward(sum(mul(fs.fused, w)));
  for (const auto& p : enc.parameters()) EXPECT_FALSE(p.tensor.has_grad()) << p.name;
}

TEST(Bottleneck, ZeroRateIsDeterministicMlp) {
  Rng init(1);
  const BottleneckParams bn = BottleneckParams::init(8, 0.3, 0.3, init);
  Rng data(2);
  const Tensor x = random_tensor({5, 8}, data);
  Rng r1(10), r2(20);
  const Tensor a = bottleneck_forward(x, bn, 0.0, true, r1);
  const Tensor b = bottleneck_forward(x, bn, 0.0, false, r2);
  EXPECT_TRUE(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
  const oracle::Mat ref = oracle::linear(
      oracle::map(oracle::linear(oracle::from_tensor(x), bn.fc1.weight, bn.fc1.bias), oracle::gelu), bn.fc2.weight,
      bn.fc2.bias);
  for (std::size_t i = 0; i < ref.v.size(); ++i) EXPECT_NEAR(a.at(i), ref.v[i], 1e-12);
}

TEST(Bottleneck, EvalIsDeterministicForAnyRate) {
  Rng init(3);
  const BottleneckParams bn = BottleneckParams::init(8, 0.4, 0.3, init);
  Rng data(4);
  const Tensor x = random_tensor({5, 8}, data);
  Rng r1(1), r2(2);
  const Tensor a = bottleneck_forward(x, bn, 0.4, false, r1), b = bottleneck_forward(x, bn, 0.4, false, r2);
  EXPECT_TRUE(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
}

TEST(Bottleneck, PairSharesWeightsAndKeepsPrototypesClean) {
  Rng init(5);
  BottleneckParams bn = BottleneckParams::init(8, 0.3, 0.3, init);
  Rng data(6);
  const Tensor f = random_tensor({6, 8}, data), p = random_tensor({6, 8}, data);
  Rng r0(0);
  const Tensor reference = bottleneck_forward(p, bn, 0.0, false, r0);
  for (int step = 0; step < 100; ++step) {
    Rng rng(static_cast<std::uint64_t>(step));
    const BottleneckOutput out = bottleneck_pair(f, p, bn, 0.3, true, rng);
    ASSERT_TRUE(std::equal(out.prototypes.data().begin(), out.prototypes.data().end(), reference.data().begin()));
  }
  Rng a(1), b(2);
  const BottleneckOutput zero_rate = bottleneck_pair(f, p, bn, 0.0, true, a);
  const Tensor f_clean = bottleneck_forward(f, bn, 0.0, false, b);
  EXPECT_TRUE(std::equal(zero_rate.features.data().begin(), zero_rate.features.data().end(), f_clean.data().begin()));
  bn.fc2.bias.mutable_data()[0] += 1.0;
  Rng c(3);
  const BottleneckOutput moved = bottleneck_pair(f, p, bn, 0.0, true, c);
  EXPECT_NE(moved.features.at(0), zero_rate.features.at(0));
  EXPECT_NE(moved.prototypes.at(0), zero_rate.prototypes.at(0));
}

TEST(Bottleneck, NoisyPathZeroFraction) {
  Rng init(7);
  BottleneckParams bn = BottleneckParams::init(4, 0.3, 0.3, init);
  // Make fc2 the identity on a positive hidden layer so dropped outputs are
  // exactly zero and the final dropout is what we measure.
  zero(bn.fc2.weight);
  for (auto& b : bn.fc2.bias.mutable_data()) b = 1.0;
  const Tensor x = Tensor::zeros({100000, 4});
  Rng rng(8);
  const Tensor y = bottleneck_forward(x, bn, 0.3, true, rng);
  std::size_t zeros = 0;
  for (double v : y.data()) zeros += v == 0.0;
  EXPECT_NEAR(static_cast<double>(zeros) / static_cast<double>(y.numel()), 0.3, 0.005);
}

TEST(Bottleneck, GradientMatchesFiniteDifferences) {
  Rng init(9);
  const BottleneckParams bn = BottleneckParams::init(6, 0.2, 0.4, init);
  Rng data(10);
  const Tensor x = random_tensor({4, 6}, data), w = random_tensor({4, 6}, data);
  auto loss = [&] {
    Rng rng(11);  // same mask every call
    return sum(mul(bottleneck_forward(x, bn, 0.2, true, rng), w));
  };
  backward(loss());
  const std::vector<double> analytic(bn.fc1.weight.grad().begin(), bn.fc1.weight.grad().end());
  NoGradGuard guard;
  const auto numeric = oracle::numeric_gradient(bn.fc1.weight, [&] { return loss().item(); });
  EXPECT_LT(oracle::max_relative_error(analytic, numeric), 1e-4);
}

TEST(Attention, SingleKeyReturnsValueRow) {
  Rng rng(12);
  const Tensor q = random_tensor({5, 4}, rng), k = random_tensor({1, 4}, rng), v = random_tensor({1, 4}, rng);
  AttentionOptions exact;
  exact.eps = 0.0;
  const Tensor out = linear_attention(q, k, v, exact);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(out.at(i * 4 + c), v.at(c), 1e-12);
}

TEST(Attention, ConvexEnvelope) {
  Rng rng(13);
  for (Kernel kernel : {Kernel::EluPlusOne, Kernel::Relu}) {
    const Tensor q = random_tensor({7, 5}, rng), k = random_tensor({9, 5}, rng), v = random_tensor({9, 5}, rng);
    AttentionOptions opts;
    opts.kernel = kernel;
    const Tensor out = linear_attention(q, k, v, opts);
    for (std::size_t c = 0; c < 5; ++c) {
      double lo = 1e300, hi = -1e300;
      for (std::size_t j = 0; j < 9; ++j) {
        lo = std::min(lo, v.at(j * 5 + c));
        hi = std::max(hi, v.at(j * 5 + c));
      }
      for (std::size_t i = 0; i < 7; ++i) {
        // relu can zero a whole row, which pulls the output to 0 instead.
        const double o = out.at(i * 5 + c);
        EXPECT_GE(o, std::min(lo, 0.0) - 1e-12);
        EXPECT_LE(o, std::max(hi, 0.0) + 1e-12);
        if (kernel == Kernel::EluPlusOne) {
          EXPECT_GE(o, lo - 1e-12);
          EXPECT_LE(o, hi + 1e-12);
        }
      }
    }
  }
}

TEST(Attention, MatchesBruteForce) {
  Rng rng(14);
  for (bool normalize : {true, false}) {
    const Tensor q = random_tensor({2, 4}, rng), k = random_tensor({3, 4}, rng), v = random_tensor({3, 4}, rng);
    AttentionOptions opts;
    opts.normalize = normalize;
    const Tensor out = linear_attention(q, k, v, opts);
    const oracle::Mat ref = oracle::linear_attention(oracle::from_tensor(q), oracle::from_tensor(k),
                                                     oracle::from_tensor(v), oracle::elu_plus_one, normalize, 1e-6);
    for (std::size_t i = 0; i < ref.v.size(); ++i) EXPECT_NEAR(out.at(i), ref.v[i], 1e-12);
  }
}

TEST(Attention, RankBoundedByKeyCount) {
  Rng rng(15);
  AttentionOptions opts;
  opts.normalize = false;
  for (std::size_t m : {1u, 2u, 4u}) {
    const Tensor q = random_tensor({12, 8}, rng), k = random_tensor({m, 8}, rng), v = random_tensor({m, 8}, rng);
    const Tensor out = linear_attention(q, k, v, opts);
    Eigen::MatrixXd mat(12, 8);
    for (int i = 0; i < 12; ++i)
      for (int c = 0; c < 8; ++c) mat(i, c) = out.at(static_cast<std::size_t>(i * 8 + c));
    Eigen::FullPivLU<Eigen::MatrixXd> lu(mat);
    lu.setThreshold(1e-10);
    EXPECT_LE(static_cast<std::size_t>(lu.rank()), m);
  }
}

TEST(Attention, DimensionMismatch) {
  EXPECT_THROW(linear_attention(Tensor::zeros({2, 4}), Tensor::zeros({3, 5}), Tensor::zeros({3, 5}), {}),
               DimensionError);
}

TEST(Decoder, ZeroOutputProjectionsGiveResidualIdentity) {
  Rng rng(16);
  DecoderLayerParams layer = random_layer(8, rng);
  zero(layer.attn.out.weight);
  zero(layer.attn.out.bias);
  zero(layer.ffn.fc2.weight);
  zero(layer.ffn.fc2.bias);
  const Tensor p = random_tensor({6, 8}, rng), q = random_tensor({6, 8}, rng);
  const Tensor p_next = prototype_update(p, q, layer, {});
  EXPECT_TRUE(std::equal(p_next.data().begin(), p_next.data().end(), p.data().begin()));
  const Reconstruction r = target_reconstruct(q, p_next, layer, true, {});
  EXPECT_TRUE(std::equal(r.f_d.data().begin(), r.f_d.data().end(), q.data().begin()));
}

TEST(Decoder, PrototypeUpdateShapeForAnyN) {
  Rng rng(17);
  const DecoderLayerParams layer = random_layer(8, rng);
  for (std::size_t n : {1u, 5u, 13u}) EXPECT_EQ(prototype_update(random_tensor({4, 8}, rng), random_tensor({n, 8}, rng), layer, {}).shape(),
                                                (Shape{4, 8}));
}

TEST(Decoder, PrototypeUpdateGradient) {
  Rng rng(18);
  const DecoderLayerParams layer = random_layer(6, rng);
  const Tensor p = random_tensor({4, 6}, rng, true), q = random_tensor({5, 6}, rng), w = random_tensor({4, 6}, rng);
  auto loss = [&] { return sum(mul(prototype_update(p, q, layer, {}), w)); };
  backward(loss());
  const std::vector<double> analytic(p.grad().begin(), p.grad().end());
  NoGradGuard guard;
  EXPECT_LT(oracle::max_relative_error(analytic, oracle::numeric_gradient(p, [&] { return loss().item(); })), 1e-4);
}

TEST(Decoder, RegularizerDependsOnlyOnPrototypes) {
  Rng rng(19);
  const DecoderLayerParams layer = random_layer(8, rng);
  const Tensor p_next = random_tensor({6, 8}, rng), q = random_tensor({6, 8}, rng);
  const Tensor q2 = add(q, random_tensor({6, 8}, rng));
  const Reconstruction a = target_reconstruct(q, p_next, layer, true, {});
  const Reconstruction b = target_reconstruct(q2, p_next, layer, true, {});
  EXPECT_TRUE(std::equal(a.p_reg.data().begin(), a.p_reg.data().end(), b.p_reg.data().begin()));
  for (std::size_t i = 0; i < a.f_d.numel(); ++i) EXPECT_EQ(a.f_d.at(i), a.f_rec.at(i) + a.p_reg.at(i));
}

TEST(Decoder, ConstraintNeedsOnePrototypePerPatch) {
  Rng rng(20);
  const DecoderLayerParams layer = random_layer(8, rng);
  EXPECT_THROW(target_reconstruct(random_tensor({6, 8}, rng), random_tensor({4, 8}, rng), layer, true, {}),
               ConfigError);
  EXPECT_NO_THROW(target_reconstruct(random_tensor({6, 8}, rng), random_tensor({4, 8}, rng), layer, false, {}));
}

TEST(Decoder, LayerMatchesTranscription) {
  Rng rng(21);
  const std::size_t n = 5, c = 6;
  const DecoderLayerParams layer = random_layer(c, rng);
  const Tensor p = random_tensor({n, c}, rng), q = random_tensor({n, c}, rng);
  for (bool constraint : {true, false}) {
    DecoderOptions opts;
    opts.constraint = constraint;
    const DecoderTrace trace = decoder_forward(q, p, {layer}, opts);

    const oracle::Mat P = oracle::from_tensor(p), Q = oracle::from_tensor(q);
    const auto ln1 = [&](const oracle::Mat& x) { return oracle::layer_norm(x, layer.ln_attn.gamma, layer.ln_attn.beta); };
    const auto ln2 = [&](const oracle::Mat& x) { return oracle::layer_norm(x, layer.ln_ffn.gamma, layer.ln_ffn.beta); };
    const oracle::Mat attn_pq = oracle::plus(P, lca(ln1(P), ln1(Q), layer));
    const oracle::Mat p_next = oracle::plus(attn_pq, ffn(ln2(attn_pq), layer));
    const oracle::Mat f_rec = oracle::plus(Q, lca(ln1(Q), ln1(p_next), layer));
    const oracle::Mat f_d = constraint ? oracle::plus(f_rec, ffn(ln2(p_next), layer)) : oracle::plus(f_rec, ffn(ln2(f_rec), layer));

    const LayerTrace& t = trace.layers[0];
    for (std::size_t i = 0; i < n * c; ++i) {
      EXPECT_NEAR(t.p_next.at(i), p_next.v[i], 1e-12);
      EXPECT_NEAR(t.f_rec.at(i), f_rec.v[i], 1e-12);
      EXPECT_NEAR(t.f_d.at(i), f_d.v[i], 1e-12);
    }
  }
}

TEST(Decoder, OneLayerEqualsComposition) {
  Rng rng(22);
  const DecoderLayerParams layer = random_layer(8, rng);
  const Tensor p = random_tensor({6, 8}, rng), q = random_tensor({6, 8}, rng);
  const DecoderTrace trace = decoder_forward(q, p, {layer}, {});
  EXPECT_TRUE(trace.q0.same_storage(q));
  EXPECT_TRUE(trace.p0.same_storage(p));
  const Tensor p_next = prototype_update(p, q, layer, {});
  const Reconstruction r = target_reconstruct(q, p_next, layer, true, {});
  EXPECT_TRUE(std::equal(r.f_d.data().begin(), r.f_d.data().end(), trace.output().data().begin()));
}

TEST(Decoder, StaticPrototypesHeldFixed) {
  Rng rng(23);
  std::vector<DecoderLayerParams> layers;
  for (int l = 0; l < 4; ++l) layers.push_back(random_layer(8, rng));
  DecoderOptions opts;
  opts.dynamic = false;
  const DecoderTrace trace = decoder_forward(random_tensor({6, 8}, rng), random_tensor({6, 8}, rng), layers, opts);
  for (std::size_t l = 1; l < trace.layers.size(); ++l)
    EXPECT_TRUE(std::equal(trace.layers[l].p_next.data().begin(), trace.layers[l].p_next.data().end(),
                           trace.layers[0].p_next.data().begin()));
  opts.dynamic = true;
  const DecoderTrace dyn = decoder_forward(trace.q0, trace.p0, layers, opts);
  EXPECT_NE(dyn.layers[1].p_next.at(0), dyn.layers[0].p_next.at(0));
}

TEST(Decoder, EmptyLayersAndMismatchedInputs) {
  Rng rng(24);
  EXPECT_THROW(decoder_forward(random_tensor({4, 8}, rng), random_tensor({4, 8}, rng), {}, {}), ConfigError);
  EXPECT_THROW(decoder_forward(random_tensor({4, 8}, rng), random_tensor({4, 6}, rng), {random_layer(8, rng)}, {}),
               DimensionError);
}

TEST(Decoder, FiniteOnLargeInputs) {
  Rng rng(25);
  std::vector<DecoderLayerParams> layers;
  for (int l = 0; l < 8; ++l) layers.push_back(random_layer(8, rng));
  const DecoderTrace trace =
      decoder_forward(random_tensor({16, 8}, rng, false, 1e3), random_tensor({16, 8}, rng, false, 1e3), layers, {});
  for (const auto& t : trace.layers)
    for (const Tensor& x : {t.p_next, t.f_rec, t.p_reg, t.f_d})
      for (double v : x.data()) ASSERT_TRUE(std::isfinite(v));
}

TEST(Model, WeightSharingAcrossPasses) {
  ProAD model(tiny_config());
  const ParameterList params = model.parameters();
  // Per layer: 2 LN pairs (4), 4 projections (8), FFN (4).
  std::size_t layer0 = 0;
  for (const auto& p : params) layer0 += p.name.rfind("decoder.0.", 0) == 0;
  EXPECT_EQ(layer0, 16u);
  // Perturbing the shared FFN moves both the prototype path and the constraint term.
  Rng rng(1);
  const FeatureStack fs = model.encode(random_image(32, 5));
  const DecoderTrace before = model.forward(fs, false, rng);
  model.layers()[0].ffn.fc2.bias.mutable_data()[0] += 0.5;
  const DecoderTrace after = model.forward(fs, false, rng);
  EXPECT_NE(before.layers[0].p_next.at(0), after.layers[0].p_next.at(0));
  EXPECT_NE(before.layers[0].p_reg.at(0), after.layers[0].p_reg.at(0));
}

TEST(Model, PairingFollowsFusedLayers) {
  ModelConfig c;
  const Pairing p = default_pairing(c.encoder, 4);
  ASSERT_EQ(p.size(), 4u);
  for (std::size_t l = 0; l < 4; ++l) {
    EXPECT_EQ(p[l].decoder, l);
    EXPECT_EQ(p[l].encoder, l + 1);  // 0-based: encoder layers 2..5
  }
  EXPECT_THROW(default_pairing(c.encoder, 8), ConfigError);
}

TEST(Model, ConfigValidation) {
  ModelConfig c = tiny_config();
  c.prototypes = 10;
  EXPECT_THROW(c.validate(), ConfigError);
  c.constraint = false;
  EXPECT_NO_THROW(c.validate());
  ProAD model(c);
  EXPECT_EQ(model.prototypes().dim(0), 10u);
}

TEST(Model, ConfigRoundTrip) {
  ModelConfig c = tiny_config();
  c.drop_prob = 0.35;
  c.attention.kernel = Kernel::Relu;
  c.dynamic = false;
  KeyValues kv;
  c.write(kv);
  KeyValues again;
  ModelConfig::read(KeyValues::parse(kv.format())).write(again);
  EXPECT_EQ(kv.format(), again.format());
}

TEST(ParamCount, PaperScale) {
  const ParamLedger l = count_parameters(paper_scale_config());
  EXPECT_EQ(l.bottleneck, 4722432u);
  EXPECT_EQ(l.decoder, 56702976u);
  EXPECT_EQ(l.prototypes, 605952u);
  EXPECT_EQ(l.total, 62031360u);
  EXPECT_EQ(l.decoder / 8, 7087872u);
}

TEST(ParamCount, DeskScaleHandSum) {
  // C = 64, hidden 256, 2 layers, 64 prototypes.
  const std::size_t c = 64, h = 256;
  const std::size_t mlp = c * h + h + h * c + c;
  const std::size_t layer = 2 * 2 * c + 4 * (c * c + c) + mlp;
  const ParamLedger l = count_parameters(ParamCountConfig{64, 2, 64, 4});
  EXPECT_EQ(l.bottleneck, mlp);
  EXPECT_EQ(l.decoder, 2 * layer);
  EXPECT_EQ(l.prototypes, 64 * c);
  EXPECT_EQ(l.total, mlp + 2 * layer + 64 * c);
}

TEST(ParamCount, InstantiatedModelAgrees) {
  ModelConfig c;
  const ProAD model(c);
  const ParamLedger actual = count_parameters(model);
  const ParamLedger closed = count_parameters(ParamCountConfig{64, 4, 64, 4});
  EXPECT_EQ(actual.bottleneck, closed.bottleneck);
  EXPECT_EQ(actual.decoder, closed.decoder);
  EXPECT_EQ(actual.prototypes, closed.prototypes);
  EXPECT_EQ(actual.total, count_elements(model.parameters()));
}

TEST(Checkpoint, RoundTripAndErrors) {
  const auto path = std::filesystem::temp_directory_path() / "proad_test_ckpt.bin";
  ModelConfig c = tiny_config();
  ProAD a(c);
  save_checkpoint(path, "hello = world\n", a.parameters());
  c.seed = 99;
  ProAD b(c);
  const CheckpointData data = load_checkpoint(path);
  EXPECT_EQ(data.header, "hello = world\n");
  restore_parameters(data, b.parameters());
  EXPECT_EQ(hash_params(a.parameters()), hash_params(b.parameters()));

  ModelConfig wide = tiny_config();
  wide.decoder_layers = 3;
  ProAD deeper(wide);
  try {
    restore_parameters(data, deeper.parameters());
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("decoder.2"), std::string::npos) << e.what();
  }
  std::ofstream(path, std::ios::binary) << "garbage";
  EXPECT_THROW(load_checkpoint(path), Error);
  std::filesystem::remove(path);
}

#include "proad/trainer.hpp"

#include <cmath>
#include <cstdio>

#include "proad/error.hpp"
#include "proad/hash.hpp"
#include "proad/ops.hpp"

namespace proad {

namespace {

bool all_finite(const Tensor& t) {
  if (!t.defined()) return true;
  for (double v : t.data())
    if (!std::isfinite(v)) return false;
  return true;
}

std::string first_non_finite(const DecoderTrace& trace) {
  if (!all_finite(trace.q0)) return "bottleneck features (Q_bn)";
  if (!all_finite(trace.p0)) return "bottleneck prototypes (P_bn)";
  for (std::size_t l = 0; l < trace.layers.size(); ++l) {
    const auto& t = trace.layers[l];
    const std::string p = "decoder layer " + std::to_string(l + 1) + " ";
    if (!all_finite(t.p_next)) return p + "prototypes";
    if (!all_finite(t.f_rec)) return p + "f_rec";
    if (!all_finite(t.p_reg)) return p + "p_reg";
    if (!all_finite(t.f_d)) return p + "f_d";
  }
  return "loss";
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (warmup_epochs < 0 || warmup_epochs >= epochs) throw ConfigError("warmup_epochs must lie in [0, epochs)");
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
  if (tau < 0.0) throw ConfigError("tau must be >= 0");
  if (!(clip_threshold > 0.0)) throw ConfigError("clip_threshold must be positive");
}

void TrainConfig::write(KeyValues& kv) const {
  kv.set("epochs", epochs);
  kv.set("batch_size", batch_size);
  kv.set("lr", lr);
  kv.set("weight_decay", weight_decay);
  kv.set("warmup_epochs", warmup_epochs);
  kv.set("tau", tau);
  kv.set("clip_threshold", clip_threshold);
  kv.set("gradient_decay", gradient_decay);
  kv.set("seed", seed);
}

TrainConfig TrainConfig::read(const KeyValues& kv) {
  TrainConfig c;
  c.epochs = static_cast<int>(kv.get_int("epochs"));
  c.batch_size = static_cast<int>(kv.get_int("batch_size"));
  c.lr = kv.get_double("lr");
  c.weight_decay = kv.get_double("weight_decay");
  c.warmup_epochs = static_cast<int>(kv.get_int("warmup_epochs"));
  c.tau = kv.get_double("tau");
  c.clip_threshold = kv.get_double("clip_threshold");
  c.gradient_decay = kv.get_bool("gradient_decay");
  c.seed = kv.get_uint("seed");
  return c;
}

std::string format_epoch_record(const EpochRecord& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "epoch=%d step=%zu lr=%.9e loss=%.12f", r.epoch, r.step, r.lr, r.loss);
  return buf;
}

TrainResult train(ProAD& model, const std::vector<ImageSample>& samples, const TrainConfig& config,
                  const std::optional<TrainState>& resume, const EpochCallback& on_epoch) {
  config.validate();
  std::vector<const ImageSample*> normals;
  for (const auto& s : samples)
    if (s.split == Split::Train && s.label == Label::Normal) normals.push_back(&s);
  if (normals.empty()) throw UsageError("training needs at least one normal training sample");

  std::vector<FeatureStack> features;
  features.reserve(normals.size());
  for (const auto* s : normals) features.push_back(model.encode(s->image));

  const ParameterList params = model.parameters();
  AdamWConfig adam;
  adam.weight_decay = config.weight_decay;
  adam.clip_threshold = config.clip_threshold;
  StableAdamW optimizer(params, adam);
  int start_epoch = 0;
  if (resume) {
    optimizer.load_state(resume->optimizer_state);
    start_epoch = resume->epochs_done;
  }

  const BatchIterator batches(normals.size(), static_cast<std::size_t>(config.batch_size),
                              derive_seed(config.seed, {0x5b0f}));
  const std::size_t per_epoch = batches.batches_per_epoch();
  const std::size_t total_steps = per_epoch * static_cast<std::size_t>(config.epochs);
  const std::size_t warmup_steps = per_epoch * static_cast<std::size_t>(config.warmup_epochs);
  const LossOptions loss_options{config.tau, config.gradient_decay};

  TrainResult result;
  result.state.epochs_done = start_epoch;
  std::size_t step = per_epoch * static_cast<std::size_t>(start_epoch);
  for (int epoch = start_epoch; epoch < config.epochs; ++epoch) {
    double loss_sum = 0.0;
    double lr = 0.0;
    for (const auto& batch : batches.epoch(static_cast<std::size_t>(epoch))) {
      for (const auto& p : params) Tensor(p.tensor).zero_grad();
      Rng rng(derive_seed(config.seed, {0xd70, step}));
      const Tensor p_bn = model.bottleneck_prototypes(rng);
      Tensor batch_loss;
      for (std::size_t idx : batch) {
        const DecoderTrace trace = model.forward(features[idx], p_bn, true, rng);
        const auto fail = [&] {
          return NumericalError("non-finite loss at epoch " + std::to_string(epoch + 1) + ", step " +
                                std::to_string(step) + "; first non-finite tensor: " + first_non_finite(trace));
        };
        for (const auto& layer : trace.layers)
          if (!all_finite(layer.f_d)) throw fail();
        const LossTerms terms = decay_loss(trace, features[idx], model.pairing(), loss_options);
        if (!std::isfinite(terms.loss.item())) throw fail();
        batch_loss = batch_loss.defined() ? add(batch_loss, terms.loss) : terms.loss;
      }
      batch_loss = div_scalar(batch_loss, static_cast<double>(batch.size()));
      backward(batch_loss);
      lr = lr_schedule(step, total_steps, warmup_steps, config.lr);
      optimizer.step(lr);
      loss_sum += batch_loss.item();
      ++step;
    }
    EpochRecord record{epoch + 1, step, lr, loss_sum / static_cast<double>(per_epoch)};
    result.log.push_back(record);
    result.state.epochs_done = epoch + 1;
    if (on_epoch && !on_epoch(record, TrainState{epoch + 1, optimizer.state()})) break;
  }
  for (const auto& p : params) Tensor(p.tensor).zero_grad();
  result.steps = optimizer.steps();
  result.rejected_steps = optimizer.rejected();
  result.state.optimizer_state = optimizer.state();
  return result;
}

std::uint64_t parameter_hash(const ProAD& model) {
  Fnv1a h;
  for (const auto& p : model.parameters()) {
    h.update(p.name);
    h.update(p.tensor.data());
  }
  return h.digest();
}

}  // namespace proad

#include "proad/model.hpp"

#include <cmath>

#include "proad/error.hpp"

namespace proad {

Pairing default_pairing(const EncoderConfig& encoder, int decoder_layers) {
  Pairing pairing;
  for (int l = 0; l < decoder_layers; ++l) {
    const int enc = encoder.fuse_from - 1 + l;
    if (enc >= encoder.num_layers) {
      throw ConfigError("decoder layer " + std::to_string(l + 1) + " pairs with missing encoder layer " +
                        std::to_string(enc + 1) + " (encoder has " + std::to_string(encoder.num_layers) + ")");
    }
    pairing.push_back({static_cast<std::size_t>(l), static_cast<std::size_t>(enc)});
  }
  return pairing;
}

std::size_t ModelConfig::num_patches() const {
  const auto side = static_cast<std::size_t>(image_size / encoder.patch_size);
  return side * side;
}

std::size_t ModelConfig::num_prototypes() const {
  return prototypes > 0 ? static_cast<std::size_t>(prototypes) : num_patches();
}

void ModelConfig::validate() const {
  encoder.validate();
  if (image_size < encoder.patch_size || image_size % encoder.patch_size != 0) {
    throw ConfigError("image size " + std::to_string(image_size) + " is not divisible by patch size " +
                      std::to_string(encoder.patch_size));
  }
  if (decoder_layers < 1) throw ConfigError("decoder needs at least one layer");
  if (prototypes < 0) throw ConfigError("prototype count must be >= 0");
  if (!(drop_prob >= 0.0 && drop_prob < 1.0)) throw ConfigError("drop_prob must lie in [0, 1)");
  if (constraint && num_prototypes() != num_patches()) {
    throw ConfigError("the prototype constraint needs prototypes == patches (" + std::to_string(num_patches()) +
                      "), got " + std::to_string(num_prototypes()));
  }
  default_pairing(encoder, decoder_layers);
}

void ModelConfig::write(KeyValues& kv) const {
  kv.set("image_size", image_size);
  kv.set("patch_size", encoder.patch_size);
  kv.set("dim", encoder.dim);
  kv.set("encoder_layers", encoder.num_layers);
  kv.set("fuse_from", encoder.fuse_from);
  kv.set("fuse_to", encoder.fuse_to);
  kv.set("encoder_seed", encoder.seed);
  kv.set("decoder_layers", decoder_layers);
  kv.set("prototypes", prototypes);
  kv.set("drop_prob", drop_prob);
  kv.set("kernel", to_string(attention.kernel));
  kv.set("normalize_attention", attention.normalize);
  kv.set("attention_eps", attention.eps);
  kv.set("anb", anb);
  kv.set("dynamic", dynamic);
  kv.set("constraint", constraint);
  kv.set("model_seed", seed);
}

ModelConfig ModelConfig::read(const KeyValues& kv) {
  ModelConfig c;
  c.image_size = static_cast<int>(kv.get_int("image_size"));
  c.encoder.patch_size = static_cast<int>(kv.get_int("patch_size"));
  c.encoder.dim = static_cast<int>(kv.get_int("dim"));
  c.encoder.num_layers = static_cast<int>(kv.get_int("encoder_layers"));
  c.encoder.fuse_from = static_cast<int>(kv.get_int("fuse_from"));
  c.encoder.fuse_to = static_cast<int>(kv.get_int("fuse_to"));
  c.encoder.seed = kv.get_uint("encoder_seed");
  c.decoder_layers = static_cast<int>(kv.get_int("decoder_layers"));
  c.prototypes = static_cast<int>(kv.get_int("prototypes"));
  c.drop_prob = kv.get_double("drop_prob");
  c.attention.kernel = kernel_from_string(kv.get("kernel"));
  c.attention.normalize = kv.get_bool("normalize_attention");
  c.attention.eps = kv.get_double("attention_eps");
  c.anb = kv.get_bool("anb");
  c.dynamic = kv.get_bool("dynamic");
  c.constraint = kv.get_bool("constraint");
  c.seed = kv.get_uint("model_seed");
  return c;
}

ProAD::ProAD(const ModelConfig& config) : config_(config), encoder_((config.validate(), config.encoder)) {
  pairing_ = default_pairing(config.encoder, config.decoder_layers);
  const auto c = static_cast<std::size_t>(config.encoder.dim);
  Rng rng(derive_seed(config.seed, {0x9a0}));
  const double proto_std = 1.0 / std::sqrt(static_cast<double>(c));
  std::vector<double> p(config.num_prototypes() * c);
  for (auto& v : p) v = rng.normal(0.0, proto_std);
  prototypes_ = Tensor::from({config.num_prototypes(), c}, std::move(p), true);
  const double stddev = 1.0 / std::sqrt(static_cast<double>(c));
  bottleneck_ = BottleneckParams::init(c, config.drop_prob, stddev, rng);
  for (int l = 0; l < config.decoder_layers; ++l) layers_.push_back(DecoderLayerParams::init(c, stddev, rng));
}

ParameterList ProAD::parameters() const {
  ParameterList out;
  bottleneck_.collect("bottleneck", out);
  for (std::size_t l = 0; l < layers_.size(); ++l) layers_[l].collect("decoder." + std::to_string(l), out);
  out.push_back({"prototypes", prototypes_});
  return out;
}

DecoderOptions ProAD::decoder_options() const {
  return {config_.constraint, config_.dynamic, config_.attention};
}

Tensor ProAD::bottleneck_prototypes(Rng& rng) const {
  return bottleneck_forward(prototypes_, bottleneck_, 0.0, false, rng);
}

DecoderTrace ProAD::forward(const FeatureStack& features, const Tensor& p_bn, bool training, Rng& rng) const {
  const Tensor q_bn = bottleneck_forward(features.fused, bottleneck_, feature_noise(), training, rng);
  return decoder_forward(q_bn, p_bn, layers_, decoder_options());
}

DecoderTrace ProAD::forward(const FeatureStack& features, bool training, Rng& rng) const {
  return forward(features, bottleneck_prototypes(rng), training, rng);
}

}  // namespace proad

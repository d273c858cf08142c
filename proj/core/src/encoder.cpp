#include "proad/encoder.hpp"

#include <cmath>

#include "proad/error.hpp"
#include "proad/ops.hpp"

namespace proad {

void EncoderConfig::validate() const {
  if (patch_size < 1 || dim < 1 || num_layers < 1) throw ConfigError("encoder sizes must be positive");
  if (!(1 <= fuse_from && fuse_from <= fuse_to && fuse_to <= num_layers)) {
    throw ConfigError("encoder fusion range must satisfy 1 <= fuse_from <= fuse_to <= num_layers");
  }
}

Tensor patchify(const Image& image, int p) {
  if (p < 1 || image.height % p != 0 || image.width % p != 0) {
    throw DimensionError("image " + std::to_string(image.height) + "x" + std::to_string(image.width) +
                         " is not divisible by patch size " + std::to_string(p));
  }
  const int gh = image.height / p, gw = image.width / p, ch = image.channels;
  const std::size_t row = static_cast<std::size_t>(p) * p * ch;
  std::vector<double> out(static_cast<std::size_t>(gh) * gw * row);
  std::size_t k = 0;
  for (int py = 0; py < gh; ++py)
    for (int px = 0; px < gw; ++px)
      for (int y = 0; y < p; ++y)
        for (int x = 0; x < p; ++x)
          for (int c = 0; c < ch; ++c) out[k++] = (image.at(py * p + y, px * p + x, c) - 0.5) / 0.25;
  return Tensor::from({static_cast<std::size_t>(gh) * gw, row}, std::move(out));
}

Encoder::Encoder(const EncoderConfig& config) : config_(config) {
  config_.validate();
  Rng rng(config.seed);
  const auto c = static_cast<std::size_t>(config.dim);
  const std::size_t in = static_cast<std::size_t>(config.patch_size) * config.patch_size * 3;
  patch_embed_ = Linear::init(in, c, 1.0 / std::sqrt(static_cast<double>(in)), rng, false);
  const double std_c = 1.0 / std::sqrt(static_cast<double>(c));
  for (int l = 0; l < config.num_layers; ++l) {
    Block b;
    b.ln_attn = LayerNorm::init(c, false);
    b.attn = AttentionProjections::init(c, std_c, rng, false);
    b.ln_mlp = LayerNorm::init(c, false);
    b.mlp.fc1 = Linear::init(c, 4 * c, std_c, rng, false);
    b.mlp.fc2 = Linear::init(4 * c, c, 0.5 / std::sqrt(static_cast<double>(4 * c)), rng, false);
    blocks_.push_back(std::move(b));
  }
}

std::size_t Encoder::num_tokens(int height, int width) const {
  const int p = config_.patch_size;
  if (height % p != 0 || width % p != 0) {
    throw DimensionError("image size not divisible by patch size " + std::to_string(p));
  }
  return static_cast<std::size_t>(height / p) * (width / p);
}

FeatureStack Encoder::encode(const Image& image) const {
  NoGradGuard no_grad;
  FeatureStack stack;
  Tensor x = patch_embed_(patchify(image, config_.patch_size));
  for (const auto& b : blocks_) {
    const Tensor h = b.ln_attn(x);
    x = add(x, linear_cross_attention(h, h, b.attn, attention_));
    x = add(x, b.mlp(b.ln_mlp(x)));
    stack.per_layer.push_back(x);
  }
  Tensor fused = stack.per_layer[config_.fuse_from - 1].detach();
  for (int l = config_.fuse_from; l < config_.fuse_to; ++l) fused = add(fused, stack.per_layer[l]);
  stack.fused = fused;
  return stack;
}

ParameterList Encoder::parameters() const {
  ParameterList out;
  patch_embed_.collect("encoder.patch_embed", out);
  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    const std::string p = "encoder.blocks." + std::to_string(l);
    blocks_[l].ln_attn.collect(p + ".ln_attn", out);
    blocks_[l].attn.collect(p + ".attn", out);
    blocks_[l].ln_mlp.collect(p + ".ln_mlp", out);
    blocks_[l].mlp.collect(p + ".mlp", out);
  }
  return out;
}

}  // namespace proad

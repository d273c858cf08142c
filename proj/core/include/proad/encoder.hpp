#pragma once

#include <cstdint>
#include <vector>

#include "proad/attention.hpp"
#include "proad/image.hpp"
#include "proad/layers.hpp"

namespace proad {

struct EncoderConfig {
  int patch_size = 8;
  int dim = 64;
  int num_layers = 8;
  // 1-based, inclusive range of block outputs summed into the fused input.
  int fuse_from = 2;
  int fuse_to = 7;
  std::uint64_t seed = 0;

  void validate() const;
};

// Per-block patch features (each N x C) plus their fused sum.
struct FeatureStack {
  std::vector<Tensor> per_layer;
  Tensor fused;
};

// [N x p*p*3] rows of raster-ordered patches; pixel order inside a patch is
// (row, column, channel).
Tensor patchify(const Image& image, int patch_size);

// Frozen random patch encoder: patch projection followed by pre-norm blocks
// of linear self-attention and a GELU MLP. Parameters never require grad.
class Encoder {
 public:
  explicit Encoder(const EncoderConfig& config);

  const EncoderConfig& config() const { return config_; }
  std::size_t num_tokens(int height, int width) const;
  FeatureStack encode(const Image& image) const;
  ParameterList parameters() const;

 private:
  struct Block {
    LayerNorm ln_attn;
    AttentionProjections attn;
    LayerNorm ln_mlp;
    FeedForward mlp;
  };

  EncoderConfig config_;
  Linear patch_embed_;
  std::vector<Block> blocks_;
  AttentionOptions attention_;
};

}  // namespace proad

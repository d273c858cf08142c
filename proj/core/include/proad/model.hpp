#pragma once

#include <cstdint>
#include <vector>

#include "proad/bottleneck.hpp"
#include "proad/decoder.hpp"
#include "proad/encoder.hpp"
#include "proad/kv.hpp"

namespace proad {

// Decoder layer index -> encoder layer index (both 0-based) supervised by
// the loss and read by the anomaly map.
struct LayerPair {
  std::size_t decoder;
  std::size_t encoder;
};
using Pairing = std::vector<LayerPair>;

// Decoder layer l supervises against encoder layer fuse_from + l (1-based),
// i.e. decoder layers walk the fused encoder layers in order.
Pairing default_pairing(const EncoderConfig& encoder, int decoder_layers);

struct ModelConfig {
  EncoderConfig encoder;
  int image_size = 64;
  int decoder_layers = 4;
  int prototypes = 0;  // 0 = one prototype per patch
  double drop_prob = 0.2;
  AttentionOptions attention;
  bool anb = true;
  bool dynamic = true;
  bool constraint = true;
  // Seed for the learnable parameters; the encoder has its own seed.
  std::uint64_t seed = 0;

  std::size_t num_patches() const;
  std::size_t num_prototypes() const;
  void validate() const;

  void write(KeyValues& kv) const;
  static ModelConfig read(const KeyValues& kv);
};

// Frozen encoder + learnable bottleneck, prototype bank and decoder.
class ProAD {
 public:
  explicit ProAD(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  const Encoder& encoder() const { return encoder_; }
  const Pairing& pairing() const { return pairing_; }

  Tensor& prototypes() { return prototypes_; }
  const Tensor& prototypes() const { return prototypes_; }
  BottleneckParams& bottleneck() { return bottleneck_; }
  const BottleneckParams& bottleneck() const { return bottleneck_; }
  std::vector<DecoderLayerParams>& layers() { return layers_; }
  const std::vector<DecoderLayerParams>& layers() const { return layers_; }

  // Learnable tensors in canonical order with stable names.
  ParameterList parameters() const;
  DecoderOptions decoder_options() const;

  FeatureStack encode(const Image& image) const { return encoder_.encode(image); }

  // Noise rate on the feature path: drop_prob with the noisy bottleneck,
  // zero without it.
  double feature_noise() const { return config_.anb ? config_.drop_prob : 0.0; }

  // P_bn: the prototype bank pushed through the noise-free bottleneck path.
  Tensor bottleneck_prototypes(Rng& rng) const;

  // Full forward for one image. `p_bn` may be shared across a batch.
  DecoderTrace forward(const FeatureStack& features, const Tensor& p_bn, bool training, Rng& rng) const;
  DecoderTrace forward(const FeatureStack& features, bool training, Rng& rng) const;

 private:
  ModelConfig config_;
  Encoder encoder_;
  Pairing pairing_;
  Tensor prototypes_;
  BottleneckParams bottleneck_;
  std::vector<DecoderLayerParams> layers_;
};

}  // namespace proad

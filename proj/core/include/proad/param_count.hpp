#pragma once

#include <cstddef>

namespace proad {

class ProAD;

struct ParamLedger {
  std::size_t bottleneck = 0;
  std::size_t decoder = 0;
  std::size_t prototypes = 0;
  std::size_t total = 0;
};

struct ParamCountConfig {
  std::size_t dim = 64;
  std::size_t decoder_layers = 4;
  std::size_t prototypes = 64;
  std::size_t ffn_ratio = 4;
};

// The large preset: C = 768, eight decoder layers, 789 prototype tokens
// (784 patches plus five extra tokens of a ViT-B/14 backbone at 392 px).
ParamCountConfig paper_scale_config();

// Closed-form count of every learnable float; the frozen encoder is excluded.
ParamLedger count_parameters(const ParamCountConfig& config);

// Same ledger from the tensors an instantiated model actually holds.
ParamLedger count_parameters(const ProAD& model);

}  // namespace proad

#include "proad/param_count.hpp"

#include "proad/model.hpp"

namespace proad {

ParamCountConfig paper_scale_config() { return {768, 8, 789, 4}; }

ParamLedger count_parameters(const ParamCountConfig& cfg) {
  const std::size_t c = cfg.dim;
  const std::size_t hidden = cfg.ffn_ratio * c;
  const std::size_t mlp = c * hidden + hidden + hidden * c + c;
  const std::size_t layer_norms = 2 * (2 * c);
  const std::size_t projections = 4 * (c * c + c);
  ParamLedger ledger;
  ledger.bottleneck = mlp;
  ledger.decoder = cfg.decoder_layers * (layer_norms + projections + mlp);
  ledger.prototypes = cfg.prototypes * c;
  ledger.total = ledger.bottleneck + ledger.decoder + ledger.prototypes;
  return ledger;
}

ParamLedger count_parameters(const ProAD& model) {
  ParamLedger ledger;
  ParameterList list;
  model.bottleneck().collect("bottleneck", list);
  ledger.bottleneck = count_elements(list);
  list.clear();
  for (const auto& layer : model.layers()) layer.collect("decoder", list);
  ledger.decoder = count_elements(list);
  ledger.prototypes = model.prototypes().numel();
  ledger.total = ledger.bottleneck + ledger.decoder + ledger.prototypes;
  return ledger;
}

}  // namespace proad

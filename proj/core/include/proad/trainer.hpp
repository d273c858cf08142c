#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "proad/datagen.hpp"
#include "proad/loss.hpp"
#include "proad/model.hpp"
#include "proad/optimizer.hpp"

namespace proad {

struct TrainConfig {
  int epochs = 200;
  int batch_size = 16;
  double lr = 1e-4;
  double weight_decay = 1e-5;
  int warmup_epochs = 10;
  double tau = 3.0;
  double clip_threshold = 1.0;
  bool gradient_decay = true;
  std::uint64_t seed = 0;

  void validate() const;
  void write(KeyValues& kv) const;
  static TrainConfig read(const KeyValues& kv);
};

struct EpochRecord {
  int epoch = 0;         // 1-based
  std::size_t step = 0;  // optimizer steps completed after this epoch
  double lr = 0.0;       // rate used by the epoch's last step
  double loss = 0.0;     // mean batch loss
};

std::string format_epoch_record(const EpochRecord& record);

// Everything needed to continue an interrupted run bit-identically.
struct TrainState {
  int epochs_done = 0;
  ParameterList optimizer_state;
};

struct TrainResult {
  std::vector<EpochRecord> log;
  std::size_t steps = 0;
  std::size_t rejected_steps = 0;
  TrainState state;
};

// Called after every epoch with the state a resumed run would need. Returning
// false ends training early (the state is still complete for resuming).
using EpochCallback = std::function<bool(const EpochRecord&, const TrainState&)>;

// Seeded training loop: encode (cached, the encoder is frozen) ->
// bottleneck pair -> decoder -> decay loss -> backward -> StableAdamW.
// Throws NumericalError naming the first non-finite tensor if the loss
// becomes NaN/inf.
TrainResult train(ProAD& model, const std::vector<ImageSample>& samples, const TrainConfig& config,
                  const std::optional<TrainState>& resume = std::nullopt, const EpochCallback& on_epoch = {});

// Hash of every learnable parameter value, in canonical order.
std::uint64_t parameter_hash(const ProAD& model);

}  // namespace proad

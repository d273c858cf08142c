#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "proad/datagen.hpp"
#include "proad/kv.hpp"
#include "proad/model.hpp"
#include "proad/trainer.hpp"

namespace proad::cli {

// Everything a command needs, as one flat key = value document.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  DatasetSpec data;           // image_size/patch_size follow the model
  std::string data_dir;       // empty: synthesize `data` in memory
  int resize_to = 0;          // MVTec ingestion; 0 = image_size
  int crop_to = 0;            // 0 = image_size
  double fpr_limit = 0.3;

  void write(KeyValues& kv) const;
  // Missing keys keep their current value; unknown keys are rejected.
  void apply(const KeyValues& kv);
  void validate() const;
  std::string format() const;

  // One seed for encoder, learnable parameters and training.
  void set_seed(std::uint64_t seed);

  std::vector<ImageSample> load_samples() const;
};

struct ConfigKey {
  const char* key;
  const char* help;
};

// Every key RunConfig understands, in display order.
const std::vector<ConfigKey>& config_keys();

// Keys that define the model itself (must agree with a checkpoint).
bool is_model_key(const std::string& key);

// Named presets: "paper" (the defaults) and "desk" (short CPU runs).
RunConfig preset(const std::string& name);

KeyValues read_config_file(const std::filesystem::path& path);

}  // namespace proad::cli

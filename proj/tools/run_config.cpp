#include "run_config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "proad/error.hpp"

namespace proad::cli {

namespace {

const char* const kModelKeys[] = {"image_size", "patch_size",  "dim",        "encoder_layers",      "fuse_from",
                                  "fuse_to",    "encoder_seed", "decoder_layers", "prototypes",      "drop_prob",
                                  "kernel",     "normalize_attention", "attention_eps", "anb", "dynamic",
                                  "constraint", "model_seed"};

std::string join_defects(const std::vector<DefectType>& defects) {
  std::string out;
  for (std::size_t i = 0; i < defects.size(); ++i) out += (i ? "," : "") + to_string(defects[i]);
  return out;
}

std::vector<DefectType> split_defects(const std::string& text) {
  std::vector<DefectType> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(defect_from_string(item));
  }
  return out;
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"image_size", "image side in pixels (synthetic render or crop size)"},
      {"patch_size", "encoder patch size p"},
      {"dim", "feature width C"},
      {"encoder_layers", "frozen encoder depth"},
      {"fuse_from", "first fused encoder layer (1-based)"},
      {"fuse_to", "last fused encoder layer (1-based)"},
      {"encoder_seed", "seed of the frozen encoder weights"},
      {"decoder_layers", "decoder depth"},
      {"prototypes", "prototype count M (0 = one per patch)"},
      {"drop_prob", "bottleneck dropout rate"},
      {"kernel", "attention feature map: elu_plus_one | relu"},
      {"normalize_attention", "row-normalize linear attention"},
      {"attention_eps", "attention normalizer epsilon"},
      {"anb", "noisy bottleneck on the feature path"},
      {"dynamic", "update prototypes in every decoder layer"},
      {"constraint", "add the prototype constraint to the reconstruction"},
      {"model_seed", "seed of the learnable parameters"},
      {"epochs", "training epochs"},
      {"batch_size", "images per optimizer step"},
      {"lr", "peak learning rate"},
      {"weight_decay", "decoupled weight decay"},
      {"warmup_epochs", "linear warmup length in epochs"},
      {"tau", "gradient decay exponent"},
      {"clip_threshold", "update RMS clip of the optimizer"},
      {"gradient_decay", "rescale loss gradients by the decay factors"},
      {"seed", "training seed (shuffling, dropout)"},
      {"num_classes", "synthetic classes"},
      {"train_per_class", "synthetic normal training images per class"},
      {"test_normal_per_class", "synthetic normal test images per class"},
      {"test_anomalous_per_class", "synthetic anomalous test images per class"},
      {"defects", "comma list of scratch,blob,color_patch,missing_part,misplacement"},
      {"data_seed", "synthetic dataset seed"},
      {"data_dir", "MVTec-layout dataset root (empty = synthesize in memory)"},
      {"resize_to", "ingestion resize side (0 = image_size)"},
      {"crop_to", "ingestion center-crop side (0 = image_size)"},
      {"fpr_limit", "AUPRO integration limit"},
  };
  return keys;
}

bool is_model_key(const std::string& key) {
  return std::find(std::begin(kModelKeys), std::end(kModelKeys), key) != std::end(kModelKeys);
}

void RunConfig::write(KeyValues& kv) const {
  model.write(kv);
  train.write(kv);
  kv.set("num_classes", data.num_classes);
  kv.set("train_per_class", data.train_per_class);
  kv.set("test_normal_per_class", data.test_normal_per_class);
  kv.set("test_anomalous_per_class", data.test_anomalous_per_class);
  kv.set("defects", join_defects(data.defect_types));
  kv.set("data_seed", data.seed);
  kv.set("data_dir", data_dir);
  kv.set("resize_to", resize_to);
  kv.set("crop_to", crop_to);
  kv.set("fpr_limit", fpr_limit);
}

void RunConfig::apply(const KeyValues& overrides) {
  std::set<std::string> known;
  for (const auto& k : config_keys()) known.insert(k.key);
  for (const auto& [key, value] : overrides.entries()) {
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  KeyValues kv;
  write(kv);
  for (const auto& [key, value] : overrides.entries()) kv.set(key, value);
  model = ModelConfig::read(kv);
  train = TrainConfig::read(kv);
  data.num_classes = static_cast<int>(kv.get_int("num_classes"));
  data.train_per_class = static_cast<int>(kv.get_int("train_per_class"));
  data.test_normal_per_class = static_cast<int>(kv.get_int("test_normal_per_class"));
  data.test_anomalous_per_class = static_cast<int>(kv.get_int("test_anomalous_per_class"));
  data.defect_types = split_defects(kv.get("defects"));
  data.seed = kv.get_uint("data_seed");
  data_dir = kv.get("data_dir");
  resize_to = static_cast<int>(kv.get_int("resize_to"));
  crop_to = static_cast<int>(kv.get_int("crop_to"));
  fpr_limit = kv.get_double("fpr_limit");
  data.image_size = model.image_size;
  data.patch_size = model.encoder.patch_size;
}

void RunConfig::validate() const {
  model.validate();
  train.validate();
  if (data_dir.empty()) data.validate();
  if (resize_to < 0 || crop_to < 0) throw ConfigError("resize_to and crop_to must be >= 0");
  if (crop_to > 0 && crop_to != model.image_size) {
    throw ConfigError("crop_to (" + std::to_string(crop_to) + ") must equal image_size (" +
                      std::to_string(model.image_size) + ")");
  }
  if (!(fpr_limit > 0.0 && fpr_limit <= 1.0)) throw ConfigError("fpr_limit must lie in (0, 1]");
}

std::string RunConfig::format() const {
  KeyValues kv;
  write(kv);
  return kv.format();
}

void RunConfig::set_seed(std::uint64_t seed) {
  train.seed = seed;
  model.seed = seed;
  model.encoder.seed = seed;
}

std::vector<ImageSample> RunConfig::load_samples() const {
  if (data_dir.empty()) return generate_dataset(data);
  const int crop = crop_to > 0 ? crop_to : model.image_size;
  const int resize = resize_to > 0 ? resize_to : crop;
  return load_mvtec_layout(data_dir, resize, crop);
}

RunConfig preset(const std::string& name) {
  RunConfig c;
  if (name == "paper") return c;
  if (name == "desk") {
    c.train.epochs = 50;
    c.train.batch_size = 2;
    c.train.lr = 4e-3;
    c.train.warmup_epochs = 5;
    return c;
  }
  throw UsageError("unknown preset '" + name + "' (expected paper or desk)");
}

KeyValues read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return KeyValues::parse(ss.str());
}

}  // namespace proad::cli

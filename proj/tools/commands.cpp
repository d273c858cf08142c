#include "commands.hpp"

#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include "proad/checkpoint.hpp"
#include "proad/error.hpp"
#include "proad/hash.hpp"
#include "proad/png_io.hpp"

namespace proad::cli {

namespace {

constexpr const char* kOptimizerPrefix = "optimizer.";

void write_text(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
  }
  fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::optional<std::uint64_t> env_seed() {
  const char* text = std::getenv("PROAD_SEED");
  if (!text || !*text) return std::nullopt;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(text, &end, 10);
  if (*end != '\0') throw UsageError(std::string("PROAD_SEED is not an unsigned integer: ") + text);
  return v;
}

void save_run_checkpoint(const fs::path& path, const RunConfig& config, const ProAD& model, const TrainState& state) {
  KeyValues header;
  config.write(header);
  header.set("epochs_done", state.epochs_done);
  ParameterList tensors = model.parameters();
  for (const auto& s : state.optimizer_state) tensors.push_back({kOptimizerPrefix + s.name, s.tensor});
  const fs::path tmp = path.string() + ".tmp";
  save_checkpoint(tmp, header.format(), tensors);
  fs::rename(tmp, path);
}

std::string dataset_fingerprint(const std::vector<ImageSample>& samples) { return hex64(dataset_hash(samples)); }

// Normalizes `value` for `key` through a RunConfig round trip so "1e-6" and
// "9.9999999999999995e-07" compare equal.
std::string canonical(const RunConfig& base, const std::string& key, const std::string& value) {
  RunConfig c = base;
  KeyValues one;
  one.set(key, value);
  c.apply(one);
  KeyValues kv;
  c.write(kv);
  return kv.get(key);
}

void check_agreement(const RunConfig& stored, const KeyValues& requested, bool model_keys_only, const char* what) {
  KeyValues kv;
  stored.write(kv);
  for (const auto& [key, value] : requested.entries()) {
    if (model_keys_only && !is_model_key(key)) continue;
    const std::string want = canonical(stored, key, value);
    if (want != kv.get(key)) {
      throw ConfigError(std::string("config/") + what + " mismatch in field '" + key + "': requested " + want +
                        ", " + what + " has " + kv.get(key));
    }
  }
}

RunConfig config_from_header(const std::string& header) {
  KeyValues kv = KeyValues::parse(header);
  KeyValues known;
  for (const auto& k : config_keys())
    if (kv.has(k.key)) known.set(k.key, kv.get(k.key));
  RunConfig c;
  c.apply(known);
  return c;
}

}  // namespace

RunConfig resolve_config(const std::string& preset_name, const std::string& config_file, const KeyValues& flags,
                         std::optional<std::uint64_t> seed_flag) {
  RunConfig config = preset(preset_name);
  bool file_has_seed = false;
  if (!config_file.empty()) {
    const KeyValues file = read_config_file(config_file);
    config.apply(file);
    file_has_seed = file.has("seed") || file.has("model_seed") || file.has("encoder_seed");
  }
  if (seed_flag) {
    config.set_seed(*seed_flag);
  } else if (!file_has_seed) {
    if (auto s = env_seed()) config.set_seed(*s);
  }
  config.apply(flags);
  config.validate();
  return config;
}

void synth_data(const RunConfig& config, const fs::path& out) {
  config.data.validate();
  const std::vector<ImageSample> samples = generate_dataset(config.data);
  make_dir(out);
  write_mvtec_layout(out, samples);
  write_text(out / "config.txt", config.format());
  write_text(out / "dataset.txt", "dataset_hash = " + dataset_fingerprint(samples) +
                                      "\nsamples = " + std::to_string(samples.size()) + "\n");
}

TrainResult train_run(const RunConfig& requested, const fs::path& out, const TrainOptions& options) {
  const fs::path ckpt_path = out / "checkpoint.bin";
  const fs::path log_path = out / "train_log.txt";
  RunConfig config = requested;
  std::optional<CheckpointData> stored;
  if (options.resume) {
    if (!fs::exists(ckpt_path)) throw UsageError("--resume: no checkpoint at " + ckpt_path.string());
    stored = load_checkpoint(ckpt_path);
    config = config_from_header(stored->header);
    if (options.overrides) check_agreement(config, *options.overrides, false, "checkpoint");
  }
  config.validate();
  make_dir(out);

  const std::vector<ImageSample> samples = config.load_samples();
  ProAD model(config.model);
  std::optional<TrainState> resume;
  std::vector<std::string> log_lines;
  if (stored) {
    restore_parameters(*stored, model.parameters());
    TrainState state;
    state.epochs_done = static_cast<int>(KeyValues::parse(stored->header).get_int("epochs_done"));
    for (const auto& t : stored->tensors) {
      if (t.name.rfind(kOptimizerPrefix, 0) == 0) state.optimizer_state.push_back({t.name.substr(std::string_view(kOptimizerPrefix).size()), t.tensor});
    }
    resume = state;
    if (fs::exists(log_path)) {
      std::istringstream in(read_text(log_path));
      std::string line;
      while (static_cast<int>(log_lines.size()) < state.epochs_done && std::getline(in, line))
        if (line.rfind("epoch=", 0) == 0) log_lines.push_back(line);
    }
  }
  write_text(out / "config.txt", config.format());

  auto flush_log = [&]() {
    std::string text;
    for (const auto& l : log_lines) text += l + "\n";
    write_text(log_path, text);
  };
  int epochs_this_call = 0;
  TrainResult result = train(model, samples, config.train, resume, [&](const EpochRecord& r, const TrainState& s) {
    log_lines.push_back(format_epoch_record(r));
    flush_log();
    save_run_checkpoint(ckpt_path, config, model, s);
    if (options.progress) *options.progress << log_lines.back() << std::endl;
    ++epochs_this_call;
    return options.stop_after <= 0 || epochs_this_call < options.stop_after;
  });
  if (epochs_this_call == 0) {
    save_run_checkpoint(ckpt_path, config, model, result.state);
    flush_log();
  }

  KeyValues metrics;
  metrics.set("epochs_done", result.state.epochs_done);
  metrics.set("steps", static_cast<std::uint64_t>(result.steps));
  metrics.set("rejected_steps", static_cast<std::uint64_t>(result.rejected_steps));
  metrics.set("final_loss", result.log.empty() ? 0.0 : result.log.back().loss);
  metrics.set("parameter_hash", hex64(parameter_hash(model)));
  metrics.set("dataset_hash", dataset_fingerprint(samples));
  write_text(out / "metrics.txt", metrics.format());
  return result;
}

EvalReport eval_run(const fs::path& run_dir, const EvalRunOptions& options) {
  const fs::path ckpt_path = fs::is_directory(run_dir) ? run_dir / "checkpoint.bin" : run_dir;
  const CheckpointData ckpt = load_checkpoint(ckpt_path);
  RunConfig config = config_from_header(ckpt.header);
  check_agreement(config, options.requested, true, "checkpoint");
  KeyValues data_keys;
  for (const auto& [key, value] : options.requested.entries())
    if (!is_model_key(key)) data_keys.set(key, value);
  config.apply(data_keys);
  config.validate();

  ProAD model(config.model);
  restore_parameters(ckpt, model.parameters());
  const std::vector<ImageSample> samples = config.load_samples();
  EvalOptions eval_options;
  eval_options.fpr_limit = config.fpr_limit;
  const EvalOutput result = evaluate(model, samples, eval_options);

  const fs::path out = options.out.empty() ? ckpt_path.parent_path() : options.out;
  make_dir(out);
  write_text(out / "report.txt",
             "dataset_hash: " + dataset_fingerprint(samples) + "\n" + format_report(result.report));
  if (options.dump_maps) {
    make_dir(out / "maps");
    for (const auto& map : result.maps) write_png(out / "maps" / (map.sample_id + "_amap.png"), map_to_image(map));
  }
  return result.report;
}

AblationTable ablate(const RunConfig& config, int num_seeds, const fs::path& out, std::ostream* progress) {
  if (num_seeds < 1) throw UsageError("--seeds must be >= 1");
  config.validate();
  const std::vector<ImageSample> samples = config.load_samples();
  AblationTable table;
  table.dataset_hash = dataset_fingerprint(samples);
  const bool toggles[4][3] = {{false, false, false}, {true, false, false}, {true, true, false}, {true, true, true}};
  for (const auto& t : toggles) {
    AblationRow row;
    row.anb = t[0];
    row.dynamic = t[1];
    row.constraint = t[2];
    table.rows.push_back(row);
  }
  for (int s = 0; s < num_seeds; ++s) table.seeds.push_back(config.train.seed + static_cast<std::uint64_t>(s));

  make_dir(out);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    AblationRow& row = table.rows[r];
    for (std::uint64_t seed : table.seeds) {
      RunConfig run = config;
      run.set_seed(seed);
      run.model.anb = row.anb;
      run.model.dynamic = row.dynamic;
      run.model.constraint = row.constraint;
      const fs::path dir = out / ("row" + std::to_string(r + 1) + "_seed" + std::to_string(seed));
      if (progress) *progress << "training row " << r + 1 << " seed " << seed << std::endl;
      train_run(run, dir);
      row.per_seed.push_back(eval_run(dir, {}));
    }
    const double n = static_cast<double>(row.per_seed.size());
    EvalReport& m = row.mean;
    for (const auto& e : row.per_seed) {
      m.image.auroc += e.image.auroc / n;
      m.image.ap += e.image.ap / n;
      m.image.f1_max += e.image.f1_max / n;
      m.pixel.auroc += e.pixel.auroc / n;
      m.pixel.ap += e.pixel.ap / n;
      m.pixel.f1_max += e.pixel.f1_max / n;
      m.pixel.aupro += e.pixel.aupro / n;
      m.recon_ratio += e.recon_ratio / n;
    }
  }
  write_text(out / "ablation.txt", format_ablation(table));
  return table;
}

std::string format_ablation(const AblationTable& table) {
  auto mark = [](bool on) { return on ? "yes" : "no"; };
  auto line = [&](const AblationRow& row, std::size_t index, const EvalReport& e) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%zu %-3s %-3s %-3s %.4f %.4f %.4f %.4f %.4f %.4f %.4f\n", index, mark(row.anb),
                  mark(row.dynamic), mark(row.constraint), e.image.auroc, e.image.ap, e.image.f1_max, e.pixel.auroc,
                  e.pixel.ap, e.pixel.f1_max, e.pixel.aupro);
    return std::string(buf);
  };
  const std::string header =
      "row anb dyn pr  image_auroc image_ap image_f1_max pixel_auroc pixel_ap pixel_f1_max pixel_aupro\n";
  std::string out = "dataset_hash: " + table.dataset_hash + "\nseeds:";
  for (auto s : table.seeds) out += " " + std::to_string(s);
  out += "\n\n[mean]\n" + header;
  for (std::size_t r = 0; r < table.rows.size(); ++r) out += line(table.rows[r], r + 1, table.rows[r].mean);
  for (std::size_t k = 0; k < table.seeds.size(); ++k) {
    out += "\n[seed " + std::to_string(table.seeds[k]) + "]\n" + header;
    for (std::size_t r = 0; r < table.rows.size(); ++r) out += line(table.rows[r], r + 1, table.rows[r].per_seed[k]);
  }
  out += "\n[recon_ratio]\nrow";
  for (auto s : table.seeds) out += " seed" + std::to_string(s);
  out += " mean\n";
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out += std::to_string(r + 1);
    char buf[32];
    for (const auto& e : table.rows[r].per_seed) {
      std::snprintf(buf, sizeof buf, " %.4f", e.recon_ratio);
      out += buf;
    }
    std::snprintf(buf, sizeof buf, " %.4f\n", table.rows[r].mean.recon_ratio);
    out += buf;
  }
  return out;
}

std::string format_ledger(const ParamLedger& ledger) {
  auto grouped = [](std::size_t v) {
    std::string digits = std::to_string(v), out;
    for (std::size_t i = 0; i < digits.size(); ++i) {
      if (i && (digits.size() - i) % 3 == 0) out += ',';
      out += digits[i];
    }
    return out;
  };
  char buf[256];
  std::snprintf(buf, sizeof buf, "Bottleneck %s\nDecoder %s\nPrototypes %s\nTotal %s\n", grouped(ledger.bottleneck).c_str(),
                grouped(ledger.decoder).c_str(), grouped(ledger.prototypes).c_str(), grouped(ledger.total).c_str());
  return buf;
}

}  // namespace proad::cli

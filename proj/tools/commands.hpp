#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "proad/evaluation.hpp"
#include "proad/param_count.hpp"
#include "run_config.hpp"

namespace proad::cli {

namespace fs = std::filesystem;

// defaults < preset < config file < PROAD_SEED < flags. The environment seed
// only applies when neither the file nor the flags name a seed.
RunConfig resolve_config(const std::string& preset_name, const std::string& config_file, const KeyValues& flags,
                         std::optional<std::uint64_t> seed_flag);

// Writes the synthetic dataset in MVTec layout plus a config snapshot.
void synth_data(const RunConfig& config, const fs::path& out);

struct TrainOptions {
  bool resume = false;
  int stop_after = 0;             // > 0: stop after this many epochs (resumable)
  const KeyValues* overrides = nullptr;  // with resume: must agree with the stored config
  std::ostream* progress = nullptr;
};

// Run directory layout: config.txt, train_log.txt, checkpoint.bin, metrics.txt.
TrainResult train_run(const RunConfig& config, const fs::path& out, const TrainOptions& options = {});

struct EvalRunOptions {
  KeyValues requested;            // user-supplied keys; model keys must match the checkpoint
  fs::path out;                   // empty: the run directory
  bool dump_maps = false;
};

EvalReport eval_run(const fs::path& run_dir, const EvalRunOptions& options);

struct AblationRow {
  bool anb = false;
  bool dynamic = false;
  bool constraint = false;
  std::vector<EvalReport> per_seed;
  EvalReport mean;  // metric fields averaged over seeds
};

struct AblationTable {
  std::string dataset_hash;
  std::vector<std::uint64_t> seeds;
  std::vector<AblationRow> rows;  // (off,off,off) (anb) (anb,dyn) (anb,dyn,constraint)
};

AblationTable ablate(const RunConfig& config, int num_seeds, const fs::path& out, std::ostream* progress = nullptr);
std::string format_ablation(const AblationTable& table);

std::string format_ledger(const ParamLedger& ledger);

}  // namespace proad::cli

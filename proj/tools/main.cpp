#include <CLI11.hpp>

#include <iostream>
#include <map>

#include "commands.hpp"
#include "proad/error.hpp"

namespace {

using namespace proad;
using namespace proad::cli;

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

struct Common {
  std::string out;
  std::string config_file;
  std::string preset = "paper";
  std::optional<std::uint64_t> seed;
  std::map<std::string, std::string> values;
  bool no_anb = false;
  bool no_dynamic = false;
  bool no_constraint = false;

  KeyValues overrides() const {
    KeyValues kv;
    for (const auto& [k, v] : values) kv.set(k, v);
    if (no_anb) kv.set("anb", false);
    if (no_dynamic) kv.set("dynamic", false);
    if (no_constraint) kv.set("constraint", false);
    return kv;
  }
};

std::string flag_name(std::string key) {
  for (auto& c : key)
    if (c == '_') c = '-';
  return "--" + key;
}

// One flag per RunConfig key, plus the seed and the ablation shortcuts.
void add_config_flags(CLI::App* app, Common& common, bool toggles) {
  app->add_option("--config", common.config_file, "flat key = value config file (flags override it)");
  app->add_option("--preset", common.preset, "base settings: paper (defaults) or desk (short CPU runs)")
      ->check(CLI::IsMember({"paper", "desk"}));
  app->add_option("--seed", common.seed, "global seed for encoder, parameters and training (env PROAD_SEED)");
  for (const auto& k : config_keys()) {
    const std::string key = k.key;
    if (key == "seed") continue;
    app->add_option_function<std::string>(
           flag_name(key), [&common, key](const std::string& v) { common.values[key] = v; }, k.help)
        ->group("Run config");
  }
  app->add_option_function<std::string>(
         "--layers", [&common](const std::string& v) { common.values["decoder_layers"] = v; }, "alias of --decoder-layers")
      ->group("Run config");
  if (toggles) {
    app->add_flag("--no-anb", common.no_anb, "deterministic bottleneck (no feature noise)");
    app->add_flag("--no-dynamic", common.no_dynamic, "prototypes updated before the first layer only");
    app->add_flag("--no-constraint", common.no_constraint, "plain FFN block instead of the prototype constraint");
  }
}

RunConfig resolve(const Common& c) { return resolve_config(c.preset, c.config_file, c.overrides(), c.seed); }

int run(int argc, char** argv) {
  CLI::App app{"proad: prototype-based anomaly detection on synthetic or MVTec-layout data"};
  app.require_subcommand(1);

  Common synth_opts;
  auto* synth = app.add_subcommand("synth-data", "write a synthetic dataset in MVTec layout");
  synth->add_option("--out", synth_opts.out, "output directory")->required();
  add_config_flags(synth, synth_opts, false);

  Common train_opts;
  bool resume = false;
  int stop_after = 0;
  auto* train_cmd = app.add_subcommand("train", "train a model into a run directory");
  train_cmd->add_option("--out", train_opts.out, "run directory")->required();
  train_cmd->add_flag("--resume", resume, "continue from <out>/checkpoint.bin");
  train_cmd->add_option("--stop-after", stop_after, "stop after this many epochs, leaving a resumable checkpoint");
  add_config_flags(train_cmd, train_opts, true);

  Common eval_opts;
  std::string run_dir;
  bool dump_maps = false;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a trained checkpoint");
  eval_cmd->add_option("--run", run_dir, "run directory or checkpoint file")->required();
  eval_cmd->add_option("--out", eval_opts.out, "report directory (default: the run directory)");
  eval_cmd->add_flag("--dump-maps", dump_maps, "write <sample_id>_amap.png per test image");
  eval_cmd->add_option("--config", eval_opts.config_file, "config file; model keys must match the checkpoint");
  for (const auto& k : config_keys()) {
    const std::string key = k.key;
    if (key == "seed") continue;
    eval_cmd->add_option_function<std::string>(
                flag_name(key), [&eval_opts, key](const std::string& v) { eval_opts.values[key] = v; }, k.help)
        ->group("Run config");
  }

  Common ablate_opts;
  int seeds = 3;
  auto* ablate_cmd = app.add_subcommand("ablate", "train and evaluate the four component ablation rows");
  ablate_cmd->add_option("--out", ablate_opts.out, "output directory")->required();
  ablate_cmd->add_option("--seeds", seeds, "number of consecutive seeds per row")->check(CLI::PositiveNumber);
  add_config_flags(ablate_cmd, ablate_opts, false);

  Common params_opts;
  bool paper_scale = false;
  auto* params_cmd = app.add_subcommand("params", "print the learnable parameter ledger");
  params_cmd->add_flag("--paper-scale", paper_scale, "C = 768, 8 decoder layers, 789 prototypes");
  params_cmd->add_option("--out", params_opts.out, "also write params.txt here");
  add_config_flags(params_cmd, params_opts, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  if (synth->parsed()) {
    synth_data(resolve(synth_opts), synth_opts.out);
  } else if (train_cmd->parsed()) {
    TrainOptions options;
    options.resume = resume;
    options.stop_after = stop_after;
    const KeyValues overrides = train_opts.overrides();
    options.overrides = &overrides;
    options.progress = &std::cout;
    // On resume the stored config wins; explicit flags are only checked against it.
    const RunConfig config = resume ? RunConfig{} : resolve(train_opts);
    const TrainResult result = train_run(config, train_opts.out, options);
    if (result.rejected_steps > 0) std::cout << "rejected_steps=" << result.rejected_steps << "\n";
  } else if (eval_cmd->parsed()) {
    EvalRunOptions options;
    if (!eval_opts.config_file.empty()) options.requested = read_config_file(eval_opts.config_file);
    for (const auto& [k, v] : eval_opts.values) options.requested.set(k, v);
    options.out = eval_opts.out;
    options.dump_maps = dump_maps;
    const EvalReport report = eval_run(run_dir, options);
    std::cout << format_report(report);
  } else if (ablate_cmd->parsed()) {
    const AblationTable table = ablate(resolve(ablate_opts), seeds, ablate_opts.out, &std::cout);
    std::cout << format_ablation(table);
  } else if (params_cmd->parsed()) {
    ParamCountConfig pc = paper_scale_config();
    if (!paper_scale) {
      const RunConfig c = resolve(params_opts);
      pc = ParamCountConfig{static_cast<std::size_t>(c.model.encoder.dim), static_cast<std::size_t>(c.model.decoder_layers),
                            c.model.num_prototypes(), 4};
    }
    const std::string text = format_ledger(count_parameters(pc));
    std::cout << text;
    if (!params_opts.out.empty()) {
      std::filesystem::create_directories(params_opts.out);
      std::ofstream(std::filesystem::path(params_opts.out) / "params.txt") << text;
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kData;
  } catch (const MetricError& e) {
    std::cerr << "metric error: " << e.what() << "\n";
    return kData;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kData;
  }
}

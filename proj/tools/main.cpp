// Command line front end. Subcommands cover the three benchmark tasks,
// synthetic data generation, and rescoring of stored reports. A JSON config
// file can preload any benchmark setting; explicit flags override it.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "zsinfer/errors.hpp"
#include "zsinfer/harness.hpp"
#include "zsinfer/io.hpp"
#include "zsinfer/mjp_simulation.hpp"
#include "zsinfer/version.hpp"

namespace {

using zsinfer::BenchmarkConfig;
using zsinfer::ConfigError;
using zsinfer::DataError;

// Applies a JSON config document onto cfg. Keys mirror the BenchmarkConfig
// field names; anything unrecognized is a config error so typos fail loudly.
void apply_config_file(const std::string& path, BenchmarkConfig& cfg) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open config file: " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed config file " + path + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config file must hold a JSON object");
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "data") {
        if (value.is_string())
          cfg.data = {value.get<std::string>()};
        else
          cfg.data = value.get<std::vector<std::string>>();
      } else if (key == "context") {
        cfg.context = value.get<std::string>();
      } else if (key == "truth") {
        cfg.truth = value.get<std::string>();
      } else if (key == "horizon") {
        cfg.horizon = value.get<int>();
      } else if (key == "variant") {
        cfg.variant = value.get<std::string>();
      } else if (key == "otd_del_cost") {
        cfg.otd_del_cost = value.get<double>();
      } else if (key == "prefix_policy") {
        cfg.prefix_policy = value.get<std::string>();
      } else if (key == "window_length") {
        cfg.window_length = value.get<int>();
      } else if (key == "seed") {
        cfg.seed = value.get<std::uint64_t>();
      } else if (key == "threads") {
        cfg.threads = value.get<int>();
      } else if (key == "out") {
        cfg.out = value.get<std::string>();
      } else if (key == "emit_timings") {
        cfg.emit_timings = value.get<bool>();
      } else if (key == "holdout_fraction") {
        cfg.holdout_fraction = value.get<double>();
      } else if (key == "holdout_mode") {
        cfg.holdout_mode = value.get<std::string>();
      } else if (key == "simulate_dfr") {
        cfg.simulate_dfr = value.get<bool>();
      } else if (key == "dfr_v") {
        cfg.dfr_v = value.get<double>();
      } else if (key == "dfr_r") {
        cfg.dfr_r = value.get<double>();
      } else if (key == "dfr_b") {
        cfg.dfr_b = value.get<double>();
      } else if (key == "dfr_paths") {
        cfg.dfr_paths = value.get<int>();
      } else if (key == "dfr_obs") {
        cfg.dfr_obs = value.get<int>();
      } else if (key == "dfr_horizon") {
        cfg.dfr_horizon = value.get<double>();
      } else if (key == "dfr_grid") {
        cfg.dfr_grid = value.get<std::string>();
      } else if (key == "dfr_corruption") {
        cfg.dfr_corruption = value.get<double>();
      } else if (key == "hellinger_target") {
        cfg.hellinger_target = value.get<std::string>();
      } else if (key == "hellinger_target_paths") {
        cfg.hellinger_target_paths = value.get<int>();
      } else if (key == "hellinger_paths") {
        cfg.hellinger_paths = value.get<int>();
      } else if (key == "hellinger_reps") {
        cfg.hellinger_reps = value.get<int>();
      } else if (key == "skip_hellinger") {
        cfg.skip_hellinger = value.get<bool>();
      } else {
        throw ConfigError("unknown config key '" + key + "' in " + path);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path +
                      " has a wrongly typed value: " + e.what());
  }
}

// The config file must take effect before CLI11 applies flag values, so it
// is pulled straight from argv ahead of parsing.
std::string find_config_path(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config") {
      if (i + 1 >= argc) throw ConfigError("--config needs a file path");
      return argv[i + 1];
    }
    if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
  }
  return {};
}

void add_common_flags(CLI::App* cmd, BenchmarkConfig& cfg) {
  cmd->add_option("--config", "JSON file preloading any of these settings")
      ->expected(1);
  cmd->add_option("--seed", cfg.seed, "Base random seed");
  cmd->add_option("--threads", cfg.threads, "Worker thread count")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", cfg.out,
                  "Report file; when omitted the JSON document goes to stdout");
  cmd->add_flag("--emit-timings", cfg.emit_timings,
                "Include wall-clock timings in the JSON document");
}

// Keeps stdout machine-readable when no report file is requested: the JSON
// document goes to stdout and the summary to stderr. With --out the file
// holds the JSON and stdout carries the summary.
void emit(const zsinfer::BenchmarkReport& report, const BenchmarkConfig& cfg) {
  if (cfg.out.empty()) {
    std::cerr << report.rendered;
    std::cout << report.json_text << '\n';
  } else {
    std::cout << report.rendered;
    std::cout << "report written to " << cfg.out << '\n';
  }
}

int run_generate(const std::string& out_dir, int count,
                 const zsinfer::SyntheticMjpConfig& gen_cfg,
                 std::uint64_t seed) {
  if (count < 1) throw ConfigError("need a positive sample count");
  std::filesystem::create_directories(out_dir);
  // Streams must not collide across samples: each sample consumes one
  // process-level stream plus one per path.
  const auto spacing =
      static_cast<std::uint64_t>(gen_cfg.paths_per_process) + 16;
  for (int i = 0; i < count; ++i) {
    const zsinfer::SyntheticMjp sample = zsinfer::generate_synthetic_mjp(
        gen_cfg, seed, static_cast<std::uint64_t>(i) * spacing);
    char name[32];
    std::snprintf(name, sizeof(name), "sample_%04d", i);
    const std::filesystem::path base = std::filesystem::path(out_dir) / name;
    std::filesystem::path data_path = base;
    data_path += ".jsonl";
    std::filesystem::path truth_path = base;
    truth_path += ".truth.json";
    zsinfer::io::save_mjp_dataset(data_path, sample.observations);
    zsinfer::io::save_mjp_truth(truth_path, sample.q.entries(),
                                sample.init.probs());
    std::cout << data_path.string() << " (" << sample.q.num_states()
              << " states, " << sample.observations.num_paths() << " paths)\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(zsinfer::kToolkitName) +
               " - inference benchmarks for event sequences and jump processes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(zsinfer::kToolkitVersion));

  BenchmarkConfig cfg;
  try {
    const std::string config_path = find_config_path(argc, argv);
    if (!config_path.empty()) apply_config_file(config_path, cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }

  // tpp
  auto* tpp = app.add_subcommand("tpp", "Score next-event prediction rollouts");
  tpp->add_option("--context", cfg.context, "Dataset the statistics are built from");
  tpp->add_option("--data", cfg.data, "Test dataset (one file)");
  tpp->add_option("--variant", cfg.variant, "evil or synthetic-prior");
  tpp->add_option("--horizon", cfg.horizon, "Events predicted per sequence");
  tpp->add_option("--otd-del-cost", cfg.otd_del_cost,
                  "Deletion cost of the transport distance");
  tpp->add_option("--prefix-policy", cfg.prefix_policy, "suffix or window");
  tpp->add_option("--window-length", cfg.window_length,
                  "History cap under the window policy");
  add_common_flags(tpp, cfg);

  // mjp
  auto* mjp = app.add_subcommand("mjp", "Estimate jump-process generators");
  mjp->add_option("--data", cfg.data, "Observation datasets (one per sample)");
  mjp->add_option("--truth", cfg.truth,
                  "Explicit truth file (single dataset only)");
  std::vector<double> sim_args;
  mjp->add_option("--simulate-dfr", sim_args,
                  "V r b paths obs: run the simulated ratchet benchmark")
      ->expected(5);
  mjp->add_option("--dfr-horizon", cfg.dfr_horizon, "Simulated time horizon");
  mjp->add_option("--dfr-grid", cfg.dfr_grid, "irregular or regular");
  mjp->add_option("--dfr-corruption", cfg.dfr_corruption,
                  "Observation corruption probability");
  mjp->add_option("--hellinger-target", cfg.hellinger_target,
                  "Held-out observation file for the Hellinger protocol");
  mjp->add_option("--hellinger-target-paths", cfg.hellinger_target_paths,
                  "Held-out path count in simulated mode (0 = same as paths)");
  mjp->add_option("--hellinger-paths", cfg.hellinger_paths,
                  "Model paths per repetition");
  mjp->add_option("--hellinger-reps", cfg.hellinger_reps,
                  "Hellinger repetitions");
  mjp->add_flag("--skip-hellinger", cfg.skip_hellinger,
                "Skip the Hellinger protocol");
  add_common_flags(mjp, cfg);

  // simulate-dfr
  auto* sim = app.add_subcommand(
      "simulate-dfr", "Simulated ratchet benchmark with explicit parameters");
  sim->add_option("--v", cfg.dfr_v, "Potential depth");
  sim->add_option("--r", cfg.dfr_r, "Switching rate");
  sim->add_option("--b", cfg.dfr_b, "Off-sector hop rate");
  sim->add_option("--paths", cfg.dfr_paths, "Estimation paths");
  sim->add_option("--obs", cfg.dfr_obs, "Observation times per path");
  sim->add_option("--horizon", cfg.dfr_horizon, "Time horizon");
  sim->add_option("--grid", cfg.dfr_grid, "irregular or regular");
  sim->add_option("--corruption", cfg.dfr_corruption,
                  "Observation corruption probability");
  sim->add_option("--hellinger-target-paths", cfg.hellinger_target_paths,
                  "Held-out path count (0 = same as --paths)");
  sim->add_option("--hellinger-paths", cfg.hellinger_paths,
                  "Model paths per repetition");
  sim->add_option("--hellinger-reps", cfg.hellinger_reps,
                  "Hellinger repetitions");
  sim->add_flag("--skip-hellinger", cfg.skip_hellinger,
                "Skip the Hellinger protocol");
  add_common_flags(sim, cfg);

  // impute
  auto* imp = app.add_subcommand("impute", "Score panel imputation");
  imp->add_option("--data", cfg.data, "Panel datasets");
  imp->add_option("--holdout-fraction", cfg.holdout_fraction,
                  "Fraction of cells or steps held out");
  imp->add_option("--holdout-mode", cfg.holdout_mode,
                  "pointwise, window, or provided");
  add_common_flags(imp, cfg);

  // generate-mjp
  auto* gen = app.add_subcommand(
      "generate-mjp", "Write synthetic jump-process datasets with truth files");
  zsinfer::SyntheticMjpConfig gen_cfg;
  std::string out_dir = "mjp-data";
  int gen_count = 10;
  std::string gen_grid = "irregular";
  std::string gen_init = "stationary";
  gen->add_option("--count", gen_count, "Number of datasets");
  gen->add_option("--out-dir", out_dir, "Output directory");
  gen->add_option("--paths", gen_cfg.paths_per_process, "Paths per dataset");
  gen->add_option("--k-min", gen_cfg.k_min, "Smallest state count");
  gen->add_option("--k-max", gen_cfg.k_max, "Largest state count");
  gen->add_option("--horizon", gen_cfg.horizon, "Time horizon");
  gen->add_option("--grid", gen_grid, "irregular or regular");
  gen->add_option("--min-grid-points", gen_cfg.min_grid_points,
                  "Smallest grid length");
  gen->add_option("--max-grid-points", gen_cfg.max_grid_points,
                  "Largest grid length");
  gen->add_option("--init", gen_init, "stationary or dirichlet");
  gen->add_option("--corruption", gen_cfg.corruption,
                  "Observation corruption probability");
  gen->add_option("--extra-edge-prob", gen_cfg.extra_edge_prob,
                  "Extra edge probability on top of the spanning tree");
  gen->add_option("--rate-scale", gen_cfg.rate_scale, "Rate magnitude scale");
  std::uint64_t gen_seed = 0;
  gen->add_option("--seed", gen_seed, "Base random seed");

  // score
  auto* score = app.add_subcommand(
      "score", "Recompute a stored report's metrics from its predictions");
  std::string report_path;
  score->add_option("report", report_path, "Report JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (tpp->parsed()) {
      cfg.task = "tpp";
      emit(zsinfer::run_tpp_benchmark(cfg), cfg);
    } else if (mjp->parsed()) {
      cfg.task = "mjp";
      if (!sim_args.empty()) {
        cfg.simulate_dfr = true;
        cfg.dfr_v = sim_args[0];
        cfg.dfr_r = sim_args[1];
        cfg.dfr_b = sim_args[2];
        cfg.dfr_paths = static_cast<int>(sim_args[3]);
        cfg.dfr_obs = static_cast<int>(sim_args[4]);
      }
      emit(zsinfer::run_mjp_benchmark(cfg), cfg);
    } else if (sim->parsed()) {
      cfg.task = "mjp";
      cfg.simulate_dfr = true;
      emit(zsinfer::run_mjp_benchmark(cfg), cfg);
    } else if (imp->parsed()) {
      cfg.task = "imputation";
      emit(zsinfer::run_imputation_benchmark(cfg), cfg);
    } else if (gen->parsed()) {
      if (gen_grid == "regular")
        gen_cfg.grid_mode = zsinfer::GridMode::kRegular;
      else if (gen_grid == "irregular")
        gen_cfg.grid_mode = zsinfer::GridMode::kIrregular;
      else
        throw ConfigError("unknown grid mode '" + gen_grid + "'");
      if (gen_init == "stationary")
        gen_cfg.init_mode = zsinfer::InitMode::kStationary;
      else if (gen_init == "dirichlet")
        gen_cfg.init_mode = zsinfer::InitMode::kDirichlet;
      else
        throw ConfigError("unknown init mode '" + gen_init + "'");
      return run_generate(out_dir, gen_count, gen_cfg, gen_seed);
    } else if (score->parsed()) {
      std::cout << zsinfer::score_report(report_path);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

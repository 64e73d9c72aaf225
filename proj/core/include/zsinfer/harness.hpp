#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "zsinfer/mjp_simulation.hpp"
#include "zsinfer/types.hpp"

namespace zsinfer {

// One benchmark run's settings. Which fields matter depends on the task;
// the CLI fills this from flags layered over an optional JSON config file.
struct BenchmarkConfig {
  std::string task;                      // "tpp" | "mjp" | "imputation"
  std::vector<std::string> data;         // dataset files
  std::string context;                   // tpp: split the statistics are built from
  std::string truth;                     // mjp: explicit truth sidecar (single dataset only)
  int horizon = 5;                       // tpp: events predicted per sequence
  std::string variant = "evil";          // tpp: "evil" | "synthetic-prior"
  double otd_del_cost = 1.0;
  std::string prefix_policy = "suffix";  // "suffix" | "window"
  int window_length = 64;                // history cap under the window policy
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out;                       // report file; empty prints the JSON instead
  bool emit_timings = false;             // timings go into the JSON only on request

  // imputation
  double holdout_fraction = 0.5;
  std::string holdout_mode = "pointwise";  // "pointwise" | "window" | "provided"

  // mjp
  bool simulate_dfr = false;  // generate the ratchet benchmark instead of reading files
  double dfr_v = 1.0;
  double dfr_r = 1.0;
  double dfr_b = 1.0;
  int dfr_paths = 5000;
  int dfr_obs = 50;
  double dfr_horizon = 3.0;
  std::string dfr_grid = "irregular";  // "irregular" | "regular"
  double dfr_corruption = 0.0;
  std::string hellinger_target;    // file mode: held-out observation file
  int hellinger_target_paths = 0;  // simulate mode: held-out path count (0 = dfr_paths)
  int hellinger_paths = 10000;     // model paths per repetition
  int hellinger_reps = 100;
  bool skip_hellinger = false;
};

// json_text is the canonical machine-readable document (what --out writes);
// rendered is the human-readable summary printed to stdout. Only the
// rendered form carries timing unless timings were requested explicitly, so
// the document is byte-identical across reruns with one seed.
struct BenchmarkReport {
  std::string json_text;
  std::string rendered;
};

BenchmarkReport run_tpp_benchmark(const BenchmarkConfig& cfg);
BenchmarkReport run_mjp_benchmark(const BenchmarkConfig& cfg);
BenchmarkReport run_imputation_benchmark(const BenchmarkConfig& cfg);

// Selection score used when tuning the event-sequence heuristic.
double tpp_fitness(double acc, double rmse_dt, double lambda = 1.0);

// Selection score for imputation: the negated mean MAE across datasets.
double imputation_fitness(std::span<const double> maes);

// Re-derives every recomputable metric of a stored report from the
// predictions persisted inside it and checks them against the stored values.
// Metrics that need fresh simulation (the Hellinger protocol) are listed as
// skipped. Any mismatch is an error. Returns a rendered comparison.
std::string score_report(const std::string& report_path);

// Ratchet benchmark data: exact generator, its stationary distribution, and
// `paths` trajectories recorded on one shared grid (sorted uniform draws
// with t=0 first, or a regular grid). Process-level draws use the rng stream
// stream_base and path i uses stream_base + 1 + i, mirroring
// generate_synthetic_mjp. Generate estimation and held-out paths in one call
// (they share the grid) and split with slice_paths.
SyntheticMjp simulate_dfr_dataset(double v, double r, double b, int paths,
                                  int obs_count, double horizon,
                                  GridMode grid_mode, double corruption,
                                  std::uint64_t seed, std::uint64_t stream_base);

// Rows [begin, end) of an observation set as their own set.
MjpObservationSet slice_paths(const MjpObservationSet& obs, Eigen::Index begin,
                              Eigen::Index end);

}  // namespace zsinfer

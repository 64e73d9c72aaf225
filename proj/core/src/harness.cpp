#include "zsinfer/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <utility>

#include "zsinfer/errors.hpp"
#include "zsinfer/hellinger.hpp"
#include "zsinfer/imputation.hpp"
#include "zsinfer/io.hpp"
#include "zsinfer/mjp_estimator.hpp"
#include "zsinfer/parallel.hpp"
#include "zsinfer/tpp.hpp"
#include "zsinfer/tpp_metrics.hpp"
#include "zsinfer/version.hpp"

namespace zsinfer {

namespace {

using js = nlohmann::ordered_json;

// Model-path simulation streams sit far above the per-path data streams so
// the two families never collide.
constexpr std::uint64_t kHellingerStreamBase = std::uint64_t{1} << 32;

js tool_block() {
  return js{{"name", kToolkitName}, {"version", kToolkitVersion}};
}

js matrix_to_json(const Eigen::MatrixXd& m) {
  js rows = js::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    js row = js::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const js& j) {
  if (!j.is_array() || j.empty())
    throw DataError("report field is not a matrix");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols)
      throw DataError("report matrix is ragged");
    for (Eigen::Index c = 0; c < cols; ++c)
      m(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

js vector_to_json(const Eigen::VectorXd& v) {
  js out = js::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from_json(const js& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v(i) = j.at(static_cast<std::size_t>(i)).get<double>();
  return v;
}

void write_report_file(const std::string& path, const std::string& text) {
  if (path.empty()) return;
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot open report path for writing: " + path);
  f << text << '\n';
  if (!f) throw ConfigError("failed writing report to " + path);
}

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

std::string render_value(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

void finish_report(const BenchmarkConfig& cfg, js& doc, double seconds,
                   std::ostringstream& text, BenchmarkReport& out) {
  if (cfg.emit_timings) doc["timings"] = js{{"inference_seconds", seconds}};
  text << "inference seconds: " << render_value(seconds) << "\n";
  out.json_text = doc.dump(2);
  out.rendered = text.str();
  write_report_file(cfg.out, out.json_text);
}

// ---------------------------------------------------------------------------
// Event-sequence benchmark
// ---------------------------------------------------------------------------

struct TppMetricValues {
  double acc = 0.0;
  double rmse_e = 0.0;
  double rmse_dt = 0.0;
  double smape_dt = 0.0;
  double otd = 0.0;
  double fitness = 0.0;
};

TppMetricValues compute_tpp_metrics(
    const std::vector<EventSequence>& preds,
    const std::vector<EventSequence>& truths,
    const std::vector<double>& anchors, int num_marks, double del_cost) {
  std::vector<std::vector<int>> pred_marks, truth_marks;
  std::vector<std::vector<double>> pred_times, truth_times;
  pred_marks.reserve(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    pred_marks.push_back(preds[i].marks);
    truth_marks.push_back(truths[i].marks);
    pred_times.push_back(preds[i].times);
    truth_times.push_back(truths[i].times);
  }
  TppMetricValues m;
  m.acc = accuracy(pred_marks, truth_marks);
  m.rmse_e = rmse_counts(pred_marks, truth_marks, num_marks);
  m.rmse_dt = rmse_dt(pred_times, truth_times, anchors);
  m.smape_dt = smape_dt(pred_times, truth_times, anchors);
  m.otd = mean_otd(preds, truths, del_cost);
  m.fitness = tpp_fitness(m.acc, m.rmse_dt, 1.0);
  return m;
}

js tpp_metrics_json(const TppMetricValues& m) {
  return js{{"acc", m.acc},         {"rmse_e", m.rmse_e},
            {"rmse_dt", m.rmse_dt}, {"smape_dt", m.smape_dt},
            {"otd", m.otd},         {"fitness", m.fitness}};
}

}  // namespace

double tpp_fitness(double acc, double rmse_dt, double lambda) {
  return acc - lambda * rmse_dt;
}

double imputation_fitness(std::span<const double> maes) {
  if (maes.empty()) throw DataError("no MAE values to aggregate");
  double total = 0.0;
  for (double m : maes) total += m;
  return -(total / static_cast<double>(maes.size()));
}

BenchmarkReport run_tpp_benchmark(const BenchmarkConfig& cfg) {
  if (cfg.variant != "evil" && cfg.variant != "synthetic-prior")
    throw ConfigError("unknown variant '" + cfg.variant +
                      "' (expected evil or synthetic-prior)");
  if (cfg.horizon < 1) throw ConfigError("horizon must be at least 1");
  if (cfg.prefix_policy != "suffix" && cfg.prefix_policy != "window")
    throw ConfigError("unknown prefix policy '" + cfg.prefix_policy +
                      "' (expected suffix or window)");
  if (cfg.prefix_policy == "window" && cfg.window_length < 0)
    throw ConfigError("window length must be nonnegative");
  if (cfg.context.empty())
    throw ConfigError("the event benchmark needs a context dataset");
  if (cfg.data.size() != 1)
    throw ConfigError("the event benchmark expects exactly one test dataset");

  const EventDataset context_ds = io::load_event_dataset(cfg.context);
  const EventDataset test_ds = io::load_event_dataset(cfg.data[0]);
  if (context_ds.num_marks != test_ds.num_marks)
    throw DataError("context and test datasets disagree on the mark count (" +
                    std::to_string(context_ds.num_marks) + " vs " +
                    std::to_string(test_ds.num_marks) + ")");
  const int k = test_ds.num_marks;
  const int n = cfg.horizon;

  const auto t0 = std::chrono::steady_clock::now();
  std::optional<tpp::ContextStats> cs;
  std::optional<tpp::SyntheticPriorStats> sp;
  if (cfg.variant == "evil")
    cs = tpp::build_context_stats(context_ds.sequences, k);
  else
    sp = tpp::build_synthetic_prior_stats(context_ds.sequences, k);

  std::vector<EventSequence> histories, truths;
  std::vector<double> anchors;
  int skipped = 0;
  for (const auto& seq : test_ds.sequences) {
    const auto len = static_cast<int>(seq.size());
    if (len < n) {
      ++skipped;
      continue;
    }
    const int cut = len - n;
    int begin = 0;
    if (cfg.prefix_policy == "window") begin = std::max(0, cut - cfg.window_length);
    EventSequence hist;
    hist.times.assign(seq.times.begin() + begin, seq.times.begin() + cut);
    hist.marks.assign(seq.marks.begin() + begin, seq.marks.begin() + cut);
    EventSequence truth;
    truth.times.assign(seq.times.begin() + cut, seq.times.end());
    truth.marks.assign(seq.marks.begin() + cut, seq.marks.end());
    anchors.push_back(hist.empty() ? 0.0 : hist.times.back());
    histories.push_back(std::move(hist));
    truths.push_back(std::move(truth));
  }
  if (histories.empty())
    throw DataError("no test sequence is long enough for horizon " +
                    std::to_string(n));

  std::vector<EventSequence> preds(histories.size());
  parallel_for(histories.size(), cfg.threads, [&](std::size_t i) {
    preds[i] = cs ? tpp::rollout(histories[i], *cs, n)
                  : tpp::rollout(histories[i], *sp, n);
  });
  const double seconds = elapsed_seconds(t0);

  const TppMetricValues m =
      compute_tpp_metrics(preds, truths, anchors, k, cfg.otd_del_cost);

  js doc;
  doc["tool"] = tool_block();
  doc["task"] = "tpp";
  doc["config"] = js{{"variant", cfg.variant},
                     {"horizon", cfg.horizon},
                     {"otd_del_cost", cfg.otd_del_cost},
                     {"prefix_policy", cfg.prefix_policy},
                     {"window_length", cfg.window_length},
                     {"context", cfg.context},
                     {"data", cfg.data[0]},
                     {"num_marks", k},
                     {"seed", cfg.seed}};
  doc["results"] = js{{"m", static_cast<int>(histories.size())},
                      {"skipped", skipped},
                      {"metrics", tpp_metrics_json(m)}};
  js pred_list = js::array(), truth_list = js::array();
  for (std::size_t i = 0; i < preds.size(); ++i) {
    pred_list.push_back(js{{"times", preds[i].times}, {"marks", preds[i].marks}});
    truth_list.push_back(
        js{{"times", truths[i].times}, {"marks", truths[i].marks}});
  }
  doc["predictions"] =
      js{{"anchors", anchors}, {"predicted", std::move(pred_list)},
         {"truth", std::move(truth_list)}};

  std::ostringstream text;
  text << "== event-sequence benchmark ==\n"
       << "variant:           " << cfg.variant << "\n"
       << "horizon:           " << n << "\n"
       << "test dataset:      " << cfg.data[0] << " (" << histories.size()
       << " scored, " << skipped << " skipped)\n"
       << "acc:               " << render_value(m.acc) << "\n"
       << "rmse_e:            " << render_value(m.rmse_e) << "\n"
       << "rmse_dt:           " << render_value(m.rmse_dt) << "\n"
       << "smape_dt:          " << render_value(m.smape_dt) << "\n"
       << "otd:               " << render_value(m.otd) << "\n"
       << "fitness:           " << render_value(m.fitness) << "\n";
  BenchmarkReport report;
  finish_report(cfg, doc, seconds, text, report);
  return report;
}

// ---------------------------------------------------------------------------
// Markov-jump-process benchmark
// ---------------------------------------------------------------------------

namespace {

struct MjpSample {
  std::string label;
  MjpObservationSet obs;
  bool has_truth = false;
  Eigen::MatrixXd truth_q;
  Eigen::VectorXd truth_init;
};

struct MjpSampleResult {
  MjpEstimate est{RateMatrix(Eigen::MatrixXd::Zero(1, 1)), ProbVector::uniform(1),
                  1.0};
  double ce = 0.0;
  double rmse_q = 0.0;
  double fitness = 0.0;
  double entropy_est = 0.0;
  double entropy_true = 0.0;
  bool has_dfr = false;
  DfrParameters dfr{};
  std::string dfr_note;
};

double offdiag_rmse(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const auto k = a.rows();
  double sq = 0.0;
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) {
      if (i == j) continue;
      const double d = a(i, j) - b(i, j);
      sq += d * d;
    }
  const auto off = k * (k - 1);
  return off > 0 ? std::sqrt(sq / static_cast<double>(off)) : 0.0;
}

MjpSampleResult evaluate_mjp_sample(const MjpSample& sample) {
  MjpSampleResult r;
  r.est = estimate_mjp_parameters(sample.obs);
  r.entropy_est = entropy_production_rate(
      r.est.q, stationary_distribution(r.est.q), ZeroFluxPolicy::kFloor);
  if (sample.has_truth) {
    r.ce = cross_entropy(sample.truth_init, r.est.init.probs());
    r.rmse_q = offdiag_rmse(r.est.q.entries(), sample.truth_q);
    r.fitness = -(r.ce + r.rmse_q);
    RateMatrix truth(sample.truth_q);
    r.entropy_true = entropy_production_rate(
        truth, stationary_distribution(truth), ZeroFluxPolicy::kFloor);
  }
  if (r.est.q.num_states() == 6) {
    try {
      r.dfr = extract_dfr_parameters(r.est.q);
      r.has_dfr = true;
    } catch (const DataError& e) {
      r.dfr_note = e.what();
    }
  }
  return r;
}

}  // namespace

SyntheticMjp simulate_dfr_dataset(double v, double r, double b, int paths,
                                  int obs_count, double horizon,
                                  GridMode grid_mode, double corruption,
                                  std::uint64_t seed, std::uint64_t stream_base) {
  if (paths < 1) throw ConfigError("need at least one path");
  if (obs_count < 2) throw ConfigError("need at least two observation times");
  if (!(horizon > 0.0)) throw ConfigError("horizon must be positive");
  RateMatrix q = dfr_generator(v, r, b);
  ProbVector init = stationary_distribution(q);

  Pcg32 rng(seed, stream_base);
  Eigen::VectorXd grid(obs_count);
  if (grid_mode == GridMode::kRegular) {
    for (int i = 0; i < obs_count; ++i)
      grid(i) =
          horizon * static_cast<double>(i) / static_cast<double>(obs_count - 1);
  } else {
    grid(0) = 0.0;
    std::vector<double> draws(static_cast<std::size_t>(obs_count - 1));
    for (auto& d : draws) d = horizon * rng.next_double();
    std::sort(draws.begin(), draws.end());
    for (int i = 1; i < obs_count; ++i)
      grid(i) = draws[static_cast<std::size_t>(i - 1)];
  }
  MjpObservationSet obs = sample_observation_set(q, init, grid, horizon, paths,
                                                 corruption, seed, stream_base);
  return {std::move(q), std::move(init), std::move(obs)};
}

MjpObservationSet slice_paths(const MjpObservationSet& obs, Eigen::Index begin,
                              Eigen::Index end) {
  if (begin < 0 || end < begin || end > obs.num_paths())
    throw ConfigError("path slice out of range");
  MjpObservationSet out;
  out.n_states = obs.n_states;
  out.grid = obs.grid.middleRows(begin, end - begin);
  out.values = obs.values.middleRows(begin, end - begin);
  out.seq_lengths = obs.seq_lengths.segment(begin, end - begin);
  return out;
}

BenchmarkReport run_mjp_benchmark(const BenchmarkConfig& cfg) {
  std::vector<MjpSample> samples;
  std::optional<MjpObservationSet> hellinger_target;
  std::string hellinger_skip_reason;
  js config_echo;
  config_echo["seed"] = cfg.seed;

  if (cfg.simulate_dfr) {
    if (!cfg.data.empty())
      throw ConfigError("pass either datasets or the simulated benchmark, not both");
    GridMode mode;
    if (cfg.dfr_grid == "irregular")
      mode = GridMode::kIrregular;
    else if (cfg.dfr_grid == "regular")
      mode = GridMode::kRegular;
    else
      throw ConfigError("unknown grid mode '" + cfg.dfr_grid + "'");
    const int target_paths = cfg.skip_hellinger ? 0
                             : cfg.hellinger_target_paths > 0
                                 ? cfg.hellinger_target_paths
                                 : cfg.dfr_paths;
    SyntheticMjp sim = simulate_dfr_dataset(
        cfg.dfr_v, cfg.dfr_r, cfg.dfr_b, cfg.dfr_paths + target_paths,
        cfg.dfr_obs, cfg.dfr_horizon, mode, cfg.dfr_corruption, cfg.seed, 0);
    MjpSample s;
    s.label = "simulated-dfr";
    s.obs = slice_paths(sim.observations, 0, cfg.dfr_paths);
    s.has_truth = true;
    s.truth_q = sim.q.entries();
    s.truth_init = sim.init.probs();
    samples.push_back(std::move(s));
    if (target_paths > 0)
      hellinger_target = slice_paths(sim.observations, cfg.dfr_paths,
                                     cfg.dfr_paths + target_paths);
    else
      hellinger_skip_reason = "disabled by configuration";
    config_echo["simulate_dfr"] = js{{"v", cfg.dfr_v},
                                     {"r", cfg.dfr_r},
                                     {"b", cfg.dfr_b},
                                     {"paths", cfg.dfr_paths},
                                     {"obs", cfg.dfr_obs},
                                     {"horizon", cfg.dfr_horizon},
                                     {"grid", cfg.dfr_grid},
                                     {"corruption", cfg.dfr_corruption},
                                     {"held_out_paths", target_paths}};
  } else {
    if (cfg.data.empty())
      throw ConfigError(
          "the jump-process benchmark needs datasets or the simulated mode");
    if (!cfg.truth.empty() && cfg.data.size() != 1)
      throw ConfigError("an explicit truth file requires exactly one dataset");
    for (const auto& path : cfg.data) {
      MjpSample s;
      s.label = path;
      s.obs = io::load_mjp_dataset(path);
      std::filesystem::path sidecar =
          !cfg.truth.empty() ? std::filesystem::path(cfg.truth)
                             : std::filesystem::path(path).replace_extension(
                                   ".truth.json");
      if (std::filesystem::exists(sidecar)) {
        io::MjpTruth truth = io::load_mjp_truth(sidecar);
        if (truth.q.rows() != s.obs.n_states)
          throw DataError("truth file " + sidecar.string() + " has " +
                          std::to_string(truth.q.rows()) +
                          " states but the dataset has " +
                          std::to_string(s.obs.n_states));
        s.has_truth = true;
        s.truth_q = std::move(truth.q);
        s.truth_init = std::move(truth.pi0);
      } else if (!cfg.truth.empty()) {
        throw ConfigError("truth file does not exist: " + cfg.truth);
      }
      samples.push_back(std::move(s));
    }
    if (!cfg.hellinger_target.empty()) {
      if (samples.size() != 1)
        throw ConfigError(
            "the Hellinger protocol requires exactly one dataset");
      hellinger_target = io::load_mjp_dataset(cfg.hellinger_target);
      config_echo["hellinger_target"] = cfg.hellinger_target;
    } else {
      hellinger_skip_reason = "no held-out target supplied";
    }
    config_echo["data"] = cfg.data;
    if (!cfg.truth.empty()) config_echo["truth"] = cfg.truth;
  }
  if (cfg.skip_hellinger) {
    hellinger_target.reset();
    hellinger_skip_reason = "disabled by configuration";
  }
  if (hellinger_target) {
    config_echo["hellinger"] =
        js{{"paths", cfg.hellinger_paths}, {"repetitions", cfg.hellinger_reps}};
  }

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<MjpSampleResult> results(samples.size());
  parallel_for(samples.size(), cfg.threads,
               [&](std::size_t i) { results[i] = evaluate_mjp_sample(samples[i]); });

  std::optional<HellingerSummary> hellinger_summary;
  if (hellinger_target) {
    HellingerProtocol protocol;
    protocol.model_paths = cfg.hellinger_paths;
    protocol.repetitions = cfg.hellinger_reps;
    protocol.seed = cfg.seed;
    protocol.stream_base = kHellingerStreamBase;
    protocol.threads = cfg.threads;
    hellinger_summary = time_averaged_hellinger(
        *hellinger_target, results[0].est.q, results[0].est.init, protocol);
  }
  const double seconds = elapsed_seconds(t0);

  js sample_list = js::array(), pred_list = js::array();
  double fitness_total = 0.0;
  int fitness_count = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    const auto& r = results[i];
    js entry;
    entry["label"] = s.label;
    entry["n_states"] = s.obs.n_states;
    entry["typical_dt"] = r.est.typical_dt;
    entry["entropy_rate_estimated"] = r.entropy_est;
    if (s.has_truth) {
      entry["cross_entropy"] = r.ce;
      entry["rmse_q"] = r.rmse_q;
      entry["fitness"] = r.fitness;
      entry["entropy_rate_true"] = r.entropy_true;
      fitness_total += r.fitness;
      ++fitness_count;
    }
    if (s.obs.n_states == 6) {
      if (r.has_dfr) {
        js dfr = js{{"v", r.dfr.v}, {"r", r.dfr.r}, {"b", r.dfr.b}};
        if (cfg.simulate_dfr) {
          dfr["v_ratio"] = r.dfr.v / cfg.dfr_v;
          dfr["r_ratio"] = r.dfr.r / cfg.dfr_r;
          dfr["b_ratio"] = r.dfr.b / cfg.dfr_b;
        } else if (s.has_truth) {
          const DfrParameters true_dfr =
              extract_dfr_parameters(RateMatrix(s.truth_q));
          dfr["v_ratio"] = r.dfr.v / true_dfr.v;
          dfr["r_ratio"] = r.dfr.r / true_dfr.r;
          dfr["b_ratio"] = r.dfr.b / true_dfr.b;
        }
        entry["dfr"] = std::move(dfr);
      } else {
        entry["dfr"] = js{{"skipped", r.dfr_note}};
      }
    }
    sample_list.push_back(std::move(entry));

    js pred;
    pred["q"] = matrix_to_json(r.est.q.entries());
    pred["init"] = vector_to_json(r.est.init.probs());
    pred["typical_dt"] = r.est.typical_dt;
    if (s.has_truth) {
      pred["truth_q"] = matrix_to_json(s.truth_q);
      pred["truth_init"] = vector_to_json(s.truth_init);
    }
    pred_list.push_back(std::move(pred));
  }

  js results_block;
  results_block["samples"] = std::move(sample_list);
  if (fitness_count > 0)
    results_block["mean_fitness"] =
        fitness_total / static_cast<double>(fitness_count);
  if (hellinger_summary) {
    results_block["hellinger"] = js{{"mean", hellinger_summary->mean},
                                    {"stddev", hellinger_summary->stddev},
                                    {"repetitions", hellinger_summary->repetitions}};
  } else {
    results_block["hellinger"] = js{{"skipped", hellinger_skip_reason}};
  }

  js doc;
  doc["tool"] = tool_block();
  doc["task"] = "mjp";
  doc["config"] = std::move(config_echo);
  doc["results"] = std::move(results_block);
  doc["predictions"] = js{{"samples", std::move(pred_list)}};

  std::ostringstream text;
  text << "== jump-process benchmark ==\n"
       << "samples:           " << samples.size() << "\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& r = results[i];
    text << "[" << samples[i].label << "] states=" << samples[i].obs.n_states
         << " typical_dt=" << render_value(r.est.typical_dt);
    if (samples[i].has_truth)
      text << " fitness=" << render_value(r.fitness)
           << " ce=" << render_value(r.ce)
           << " rmse_q=" << render_value(r.rmse_q);
    if (r.has_dfr)
      text << " dfr=(" << render_value(r.dfr.v) << ", " << render_value(r.dfr.r)
           << ", " << render_value(r.dfr.b) << ")";
    text << "\n";
  }
  if (fitness_count > 0)
    text << "mean fitness:      "
         << render_value(fitness_total / static_cast<double>(fitness_count))
         << "\n";
  if (hellinger_summary)
    text << "hellinger:         " << render_value(hellinger_summary->mean)
         << " +/- " << render_value(hellinger_summary->stddev) << " over "
         << hellinger_summary->repetitions << " repetitions\n";
  else
    text << "hellinger:         skipped (" << hellinger_skip_reason << ")\n";

  BenchmarkReport report;
  finish_report(cfg, doc, seconds, text, report);
  return report;
}

// ---------------------------------------------------------------------------
// Imputation benchmark
// ---------------------------------------------------------------------------

namespace {

struct PanelCells {
  std::vector<int> rows, cols;
  std::vector<double> pred, baseline, truth;
};

PanelCells evaluate_panel(const TimeSeriesPanel& panel,
                          const BenchmarkConfig& cfg, std::uint64_t stream) {
  const auto t = panel.values.rows();
  const auto d = panel.values.cols();
  BoolGrid holdout;
  if (cfg.holdout_mode == "pointwise") {
    Pcg32 rng(cfg.seed, stream);
    holdout = pointwise_mask(t, d, cfg.holdout_fraction, rng);
  } else if (cfg.holdout_mode == "window") {
    const IndexRange range = window_mask(t, cfg.holdout_fraction);
    holdout = BoolGrid::Constant(t, d, false);
    for (Eigen::Index i = range.begin; i < range.end; ++i)
      for (Eigen::Index j = 0; j < d; ++j) holdout(i, j) = true;
  } else if (cfg.holdout_mode == "provided") {
    holdout = panel.mask;
  } else {
    throw ConfigError("unknown holdout mode '" + cfg.holdout_mode +
                      "' (expected pointwise, window, or provided)");
  }

  TimeSeriesPanel working = panel;
  for (Eigen::Index i = 0; i < t; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      if (holdout(i, j)) working.values(i, j) = std::nan("");

  const Eigen::MatrixXd imputed = impute_panel(working);
  ImputerConfig interp_only;
  interp_only.large_gap_threshold = std::numeric_limits<int>::max();
  const Eigen::MatrixXd baseline = impute_panel(working, interp_only);

  PanelCells cells;
  for (Eigen::Index i = 0; i < t; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      if (!holdout(i, j) || !std::isfinite(panel.values(i, j))) continue;
      cells.rows.push_back(static_cast<int>(i));
      cells.cols.push_back(static_cast<int>(j));
      cells.pred.push_back(imputed(i, j));
      cells.baseline.push_back(baseline(i, j));
      cells.truth.push_back(panel.values(i, j));
    }
  return cells;
}

}  // namespace

BenchmarkReport run_imputation_benchmark(const BenchmarkConfig& cfg) {
  if (cfg.data.empty())
    throw ConfigError("the imputation benchmark needs at least one dataset");
  if (cfg.holdout_mode == "pointwise" &&
      (cfg.holdout_fraction < 0.0 || cfg.holdout_fraction >= 1.0))
    throw ConfigError("pointwise holdout fraction must lie in [0, 1)");
  if (cfg.holdout_mode == "window" &&
      !(cfg.holdout_fraction > 0.0 && cfg.holdout_fraction < 1.0))
    throw ConfigError("window holdout fraction must lie in (0, 1)");

  struct Task {
    std::size_t dataset;
    std::size_t panel;
    std::uint64_t stream;
  };
  std::vector<std::vector<TimeSeriesPanel>> datasets;
  std::vector<Task> tasks;
  for (std::size_t d = 0; d < cfg.data.size(); ++d) {
    datasets.push_back(io::load_panels(cfg.data[d]));
    for (std::size_t p = 0; p < datasets.back().size(); ++p)
      tasks.push_back({d, p, static_cast<std::uint64_t>(tasks.size())});
  }

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<PanelCells> cells(tasks.size());
  parallel_for(tasks.size(), cfg.threads, [&](std::size_t i) {
    cells[i] =
        evaluate_panel(datasets[tasks[i].dataset][tasks[i].panel], cfg,
                       tasks[i].stream);
  });
  const double seconds = elapsed_seconds(t0);

  js dataset_results = js::array(), dataset_preds = js::array();
  std::vector<double> maes, baseline_maes;
  for (std::size_t d = 0; d < cfg.data.size(); ++d) {
    double err = 0.0, base_err = 0.0;
    std::size_t count = 0;
    js panel_idx = js::array(), rows = js::array(), cols = js::array(),
       pred = js::array(), base = js::array(), truth = js::array();
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      if (tasks[i].dataset != d) continue;
      const auto& c = cells[i];
      for (std::size_t m = 0; m < c.rows.size(); ++m) {
        err += std::abs(c.pred[m] - c.truth[m]);
        base_err += std::abs(c.baseline[m] - c.truth[m]);
        panel_idx.push_back(static_cast<int>(tasks[i].panel));
        rows.push_back(c.rows[m]);
        cols.push_back(c.cols[m]);
        pred.push_back(c.pred[m]);
        base.push_back(c.baseline[m]);
        truth.push_back(c.truth[m]);
      }
      count += c.rows.size();
    }
    if (count == 0)
      throw DataError("nothing to score in dataset " + cfg.data[d]);
    const double mae = err / static_cast<double>(count);
    const double base_mae = base_err / static_cast<double>(count);
    maes.push_back(mae);
    baseline_maes.push_back(base_mae);
    dataset_results.push_back(js{{"path", cfg.data[d]},
                                 {"panels", datasets[d].size()},
                                 {"cells_scored", count},
                                 {"mae", mae},
                                 {"baseline_mae", base_mae}});
    dataset_preds.push_back(js{{"path", cfg.data[d]},
                               {"panel", std::move(panel_idx)},
                               {"row", std::move(rows)},
                               {"col", std::move(cols)},
                               {"pred", std::move(pred)},
                               {"baseline", std::move(base)},
                               {"truth", std::move(truth)}});
  }
  const double fitness = imputation_fitness(maes);
  double base_total = 0.0;
  for (double b : baseline_maes) base_total += b;
  const double base_mean = base_total / static_cast<double>(baseline_maes.size());

  js doc;
  doc["tool"] = tool_block();
  doc["task"] = "imputation";
  doc["config"] = js{{"data", cfg.data},
                     {"holdout_mode", cfg.holdout_mode},
                     {"holdout_fraction", cfg.holdout_fraction},
                     {"seed", cfg.seed}};
  doc["results"] = js{{"datasets", std::move(dataset_results)},
                      {"mean_mae", -fitness},
                      {"baseline_mean_mae", base_mean},
                      {"fitness", fitness}};
  doc["predictions"] = js{{"datasets", std::move(dataset_preds)}};

  std::ostringstream text;
  text << "== imputation benchmark ==\n"
       << "holdout:           " << cfg.holdout_mode << " "
       << render_value(cfg.holdout_fraction) << "\n";
  for (std::size_t d = 0; d < cfg.data.size(); ++d)
    text << "[" << cfg.data[d] << "] mae=" << render_value(maes[d])
         << " baseline=" << render_value(baseline_maes[d]) << "\n";
  text << "mean mae:          " << render_value(-fitness) << "\n"
       << "fitness:           " << render_value(fitness) << "\n";

  BenchmarkReport report;
  finish_report(cfg, doc, seconds, text, report);
  return report;
}

// ---------------------------------------------------------------------------
// Report rescoring
// ---------------------------------------------------------------------------

namespace {

struct ScoreCheck {
  std::vector<std::string> lines;
  std::vector<std::string> mismatches;

  void compare(const std::string& name, double stored, double recomputed) {
    if (stored == recomputed) {
      lines.push_back(name + ": ok (" + render_value(stored) + ")");
    } else {
      mismatches.push_back(name + ": stored " + render_value(stored) +
                           " recomputed " + render_value(recomputed));
    }
  }

  void skip(const std::string& name, const std::string& why) {
    lines.push_back(name + ": skipped (" + why + ")");
  }
};

void score_tpp(const js& doc, ScoreCheck& check) {
  const int num_marks = doc.at("config").at("num_marks").get<int>();
  const double del_cost = doc.at("config").at("otd_del_cost").get<double>();
  const auto& preds_j = doc.at("predictions");
  std::vector<EventSequence> preds, truths;
  std::vector<double> anchors =
      preds_j.at("anchors").get<std::vector<double>>();
  for (const auto& p : preds_j.at("predicted")) {
    EventSequence s;
    s.times = p.at("times").get<std::vector<double>>();
    s.marks = p.at("marks").get<std::vector<int>>();
    preds.push_back(std::move(s));
  }
  for (const auto& p : preds_j.at("truth")) {
    EventSequence s;
    s.times = p.at("times").get<std::vector<double>>();
    s.marks = p.at("marks").get<std::vector<int>>();
    truths.push_back(std::move(s));
  }
  if (preds.size() != truths.size() || preds.size() != anchors.size())
    throw DataError("report predictions are inconsistently sized");
  const TppMetricValues m =
      compute_tpp_metrics(preds, truths, anchors, num_marks, del_cost);
  const auto& stored = doc.at("results").at("metrics");
  check.compare("acc", stored.at("acc").get<double>(), m.acc);
  check.compare("rmse_e", stored.at("rmse_e").get<double>(), m.rmse_e);
  check.compare("rmse_dt", stored.at("rmse_dt").get<double>(), m.rmse_dt);
  check.compare("smape_dt", stored.at("smape_dt").get<double>(), m.smape_dt);
  check.compare("otd", stored.at("otd").get<double>(), m.otd);
  check.compare("fitness", stored.at("fitness").get<double>(), m.fitness);
}

void score_mjp(const js& doc, ScoreCheck& check) {
  const auto& samples = doc.at("results").at("samples");
  const auto& preds = doc.at("predictions").at("samples");
  if (samples.size() != preds.size())
    throw DataError("report predictions are inconsistently sized");
  double fitness_total = 0.0;
  int fitness_count = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& stored = samples.at(i);
    const auto& pred = preds.at(i);
    const std::string tag = "sample " + std::to_string(i) + " ";
    const RateMatrix q(matrix_from_json(pred.at("q")));
    const ProbVector init(vector_from_json(pred.at("init")));
    check.compare(tag + "entropy_rate_estimated",
                  stored.at("entropy_rate_estimated").get<double>(),
                  entropy_production_rate(q, stationary_distribution(q),
                                          ZeroFluxPolicy::kFloor));
    if (pred.contains("truth_q")) {
      const Eigen::MatrixXd truth_q = matrix_from_json(pred.at("truth_q"));
      const Eigen::VectorXd truth_init = vector_from_json(pred.at("truth_init"));
      const double ce = cross_entropy(truth_init, init.probs());
      const double rq = offdiag_rmse(q.entries(), truth_q);
      check.compare(tag + "cross_entropy", stored.at("cross_entropy").get<double>(),
                    ce);
      check.compare(tag + "rmse_q", stored.at("rmse_q").get<double>(), rq);
      check.compare(tag + "fitness", stored.at("fitness").get<double>(),
                    -(ce + rq));
      const RateMatrix truth(truth_q);
      check.compare(tag + "entropy_rate_true",
                    stored.at("entropy_rate_true").get<double>(),
                    entropy_production_rate(truth, stationary_distribution(truth),
                                            ZeroFluxPolicy::kFloor));
      fitness_total += -(ce + rq);
      ++fitness_count;
    }
    if (stored.contains("dfr") && !stored.at("dfr").contains("skipped")) {
      const DfrParameters dfr = extract_dfr_parameters(q);
      check.compare(tag + "dfr.v", stored.at("dfr").at("v").get<double>(), dfr.v);
      check.compare(tag + "dfr.r", stored.at("dfr").at("r").get<double>(), dfr.r);
      check.compare(tag + "dfr.b", stored.at("dfr").at("b").get<double>(), dfr.b);
    }
  }
  if (doc.at("results").contains("mean_fitness") && fitness_count > 0)
    check.compare("mean_fitness",
                  doc.at("results").at("mean_fitness").get<double>(),
                  fitness_total / static_cast<double>(fitness_count));
  const auto& hell = doc.at("results").at("hellinger");
  if (hell.contains("mean"))
    check.skip("hellinger", "requires fresh simulation; not recomputable from "
                            "persisted predictions");
}

void score_imputation(const js& doc, ScoreCheck& check) {
  const auto& datasets = doc.at("results").at("datasets");
  const auto& preds = doc.at("predictions").at("datasets");
  if (datasets.size() != preds.size())
    throw DataError("report predictions are inconsistently sized");
  std::vector<double> maes;
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    const auto pred = preds.at(d).at("pred").get<std::vector<double>>();
    const auto base = preds.at(d).at("baseline").get<std::vector<double>>();
    const auto truth = preds.at(d).at("truth").get<std::vector<double>>();
    if (pred.size() != truth.size() || base.size() != truth.size() ||
        pred.empty())
      throw DataError("report predictions are inconsistently sized");
    double err = 0.0, base_err = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      err += std::abs(pred[i] - truth[i]);
      base_err += std::abs(base[i] - truth[i]);
    }
    const double mae = err / static_cast<double>(pred.size());
    const double base_mae = base_err / static_cast<double>(pred.size());
    const std::string tag = "dataset " + std::to_string(d) + " ";
    check.compare(tag + "mae", datasets.at(d).at("mae").get<double>(), mae);
    check.compare(tag + "baseline_mae",
                  datasets.at(d).at("baseline_mae").get<double>(), base_mae);
    maes.push_back(mae);
  }
  const double fitness = imputation_fitness(maes);
  check.compare("mean_mae", doc.at("results").at("mean_mae").get<double>(),
                -fitness);
  check.compare("fitness", doc.at("results").at("fitness").get<double>(), fitness);
}

}  // namespace

std::string score_report(const std::string& report_path) {
  std::ifstream f(report_path, std::ios::binary);
  if (!f) throw DataError("cannot open report: " + report_path);
  js doc;
  try {
    doc = js::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed report " + report_path + ": " + e.what());
  }
  ScoreCheck check;
  try {
    const std::string task = doc.at("task").get<std::string>();
    if (task == "tpp")
      score_tpp(doc, check);
    else if (task == "mjp")
      score_mjp(doc, check);
    else if (task == "imputation")
      score_imputation(doc, check);
    else
      throw DataError("unknown task '" + task + "' in report");
  } catch (const nlohmann::json::exception& e) {
    throw DataError("report " + report_path +
                    " is missing required fields: " + e.what());
  }

  std::ostringstream text;
  text << "== rescore of " << report_path << " ==\n";
  for (const auto& line : check.lines) text << line << "\n";
  if (!check.mismatches.empty()) {
    for (const auto& line : check.mismatches) text << "MISMATCH " << line << "\n";
    throw DataError("report metrics do not match recomputation:\n" + text.str());
  }
  text << "all stored metrics match their recomputation\n";
  return text.str();
}

}  // namespace zsinfer

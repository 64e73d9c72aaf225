// End-to-end acceptance checks. Each numbered criterion prints exactly one
// PASS or FAIL line; the process exits nonzero when any criterion fails.
// argv[1] is the path to the command-line tool, used by the spawning checks.

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "test_util.hpp"
#include "zsinfer/errors.hpp"
#include "zsinfer/harness.hpp"
#include "zsinfer/hellinger.hpp"
#include "zsinfer/imputation.hpp"
#include "zsinfer/io.hpp"
#include "zsinfer/mjp_estimator.hpp"
#include "zsinfer/mjp_simulation.hpp"
#include "zsinfer/rng.hpp"
#include "zsinfer/tpp.hpp"
#include "zsinfer/tpp_metrics.hpp"
#include "zsinfer/types.hpp"

using namespace zsinfer;
using nlohmann::json;

namespace {

int failures = 0;

void line(int n, bool ok, const std::string& detail) {
  std::printf("%s criterion %2d: %s\n", ok ? "PASS" : "FAIL", n, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

template <typename F>
void criterion(int n, F&& body) {
  try {
    body();
  } catch (const std::exception& e) {
    line(n, false, std::string("unexpected exception: ") + e.what());
  }
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

int run_cli(const std::string& cmd) {
  return std::system((cmd + " > /dev/null 2>&1").c_str());
}

EventDataset alternating_dataset(int k, int sequences, int length, double gap) {
  EventDataset ds;
  ds.num_marks = k;
  for (int s = 0; s < sequences; ++s) {
    EventSequence seq;
    int m = s % k;
    double t = 0.0;
    for (int i = 0; i < length; ++i) {
      t += gap;
      seq.times.push_back(t);
      seq.marks.push_back(m);
      m = (m + 1) % k;
    }
    ds.sequences.push_back(std::move(seq));
  }
  return ds;
}

EventDataset random_dataset(int k, int sequences, int length,
                            std::uint64_t seed) {
  Pcg32 rng(seed, 900);
  EventDataset ds;
  ds.num_marks = k;
  for (int s = 0; s < sequences; ++s) {
    EventSequence seq;
    double t = 0.0;
    for (int i = 0; i < length; ++i) {
      t += 0.05 + rng.next_double();
      seq.times.push_back(t);
      seq.marks.push_back(static_cast<int>(rng.uniform_int(
          static_cast<std::uint64_t>(k))));
    }
    ds.sequences.push_back(std::move(seq));
  }
  return ds;
}

// Exhaustive minimum over every injective same-mark matching; unmatched
// events on either side cost del each.
double exhaustive_mark(const std::vector<double>& a, const std::vector<double>& b,
                       std::size_t i, std::vector<bool>& used, double del) {
  if (i == a.size()) {
    double cost = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j)
      if (!used[j]) cost += del;
    return cost;
  }
  double best = del + exhaustive_mark(a, b, i + 1, used, del);
  for (std::size_t j = 0; j < b.size(); ++j) {
    if (used[j]) continue;
    used[j] = true;
    best = std::min(best,
                    std::abs(a[i] - b[j]) + exhaustive_mark(a, b, i + 1, used, del));
    used[j] = false;
  }
  return best;
}

double exhaustive_otd(const EventSequence& pred, const EventSequence& truth,
                      double del) {
  int max_mark = -1;
  for (int m : pred.marks) max_mark = std::max(max_mark, m);
  for (int m : truth.marks) max_mark = std::max(max_mark, m);
  double total = 0.0;
  for (int k = 0; k <= max_mark; ++k) {
    std::vector<double> a, b;
    for (std::size_t i = 0; i < pred.size(); ++i)
      if (pred.marks[i] == k) a.push_back(pred.times[i]);
    for (std::size_t i = 0; i < truth.size(); ++i)
      if (truth.marks[i] == k) b.push_back(truth.times[i]);
    std::vector<bool> used(b.size(), false);
    total += exhaustive_mark(a, b, 0, used, del);
  }
  return total;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";

  // 1. Ratchet parameter recovery from 5000 irregularly observed paths.
  criterion(1, [&] {
    const auto t0 = std::chrono::steady_clock::now();
    const SyntheticMjp sim = simulate_dfr_dataset(
        1.0, 1.0, 1.0, 5000, 50, 3.0, GridMode::kIrregular, 0.0, 42, 0);
    const MjpEstimate est = estimate_mjp_parameters(sim.observations);
    const DfrParameters p = extract_dfr_parameters(est.q);
    const double secs = seconds_since(t0);
    const bool ok = std::abs(p.v - 1.0) <= 0.15 && std::abs(p.r - 1.0) <= 0.15 &&
                    std::abs(p.b - 1.0) <= 0.15 && secs < 60.0;
    line(1, ok,
         "parameter ratios (" + fmt(p.v) + ", " + fmt(p.r) + ", " + fmt(p.b) +
             ") within 1 +/- 0.15 in " + fmt(secs) + " s single-threaded");
  });

  // 2. Time-averaged Hellinger of the estimated model against held-out paths.
  criterion(2, [&] {
    const auto t0 = std::chrono::steady_clock::now();
    BenchmarkConfig cfg;
    cfg.task = "mjp";
    cfg.simulate_dfr = true;
    cfg.dfr_paths = 5000;
    cfg.dfr_obs = 50;
    cfg.seed = 42;
    cfg.threads = 1;
    cfg.hellinger_target_paths = 100000;
    cfg.hellinger_paths = 100000;
    cfg.hellinger_reps = 100;
    const BenchmarkReport report = run_mjp_benchmark(cfg);
    const double secs = seconds_since(t0);
    const json doc = json::parse(report.json_text);
    const double mean = doc.at("results").at("hellinger").at("mean").get<double>();
    const int reps =
        doc.at("results").at("hellinger").at("repetitions").get<int>();
    const bool ok = mean <= 0.01 && reps == 100 && secs < 300.0;
    line(2, ok,
         "held-out Hellinger mean " + fmt(mean) + " <= 0.01 over " +
             std::to_string(reps) + " repetitions in " + fmt(secs) + " s");
  });

  // 3. Entropy production: zero under detailed balance, positive and
  //    quadrature-convergent for the driven ratchet.
  criterion(3, [&] {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4, 4);
    const double up[3] = {1.3, 0.7, 2.2};
    const double down[3] = {0.9, 1.8, 0.4};
    for (int i = 0; i < 3; ++i) {
      m(i, i + 1) = up[i];
      m(i + 1, i) = down[i];
    }
    for (int i = 0; i < 4; ++i) m(i, i) = -m.row(i).sum();
    const RateMatrix chain(m);
    const double balanced =
        entropy_production_rate(chain, stationary_distribution(chain));

    const RateMatrix ratchet = dfr_generator(1.0, 1.0, 1.0);
    const ProbVector uniform6(Eigen::VectorXd::Constant(6, 1.0 / 6.0));
    const double total_201 = total_entropy_production(ratchet, uniform6, 3.0, 201);
    const double total_401 = total_entropy_production(ratchet, uniform6, 3.0, 401);
    const double rel = std::abs(total_401 - total_201) / std::abs(total_401);

    const bool ok = std::abs(balanced) <= 1e-12 && total_201 > 0.0 && rel < 1e-6;
    line(3, ok,
         "balanced-chain rate " + fmt(balanced) + " within 1e-12, ratchet total " +
             fmt(total_401) + " > 0, step-halving change " + fmt(rel) + " < 1e-6");
  });

  // 4. Sampled occupancies match the master-equation solution.
  criterion(4, [&] {
    struct Case {
      const char* label;
      RateMatrix q;
      ProbVector init;
      std::uint64_t seed;
    };
    Eigen::MatrixXd two(2, 2);
    two << -1.0, 1.0, 1.0, -1.0;
    Eigen::VectorXd start2(2);
    start2 << 1.0, 0.0;
    const std::vector<Case> cases = {
        {"ratchet", dfr_generator(1.0, 1.0, 1.0),
         ProbVector(Eigen::VectorXd::Constant(6, 1.0 / 6.0)), 406},
        {"symmetric-2-state", RateMatrix(two), ProbVector(start2), 403},
    };
    const int n_paths = 10000;
    Eigen::VectorXd grid(10);
    for (int g = 0; g < 10; ++g) grid(g) = 0.3 * (g + 1);

    bool ok = true;
    double worst = 0.0;
    for (const auto& c : cases) {
      const MjpObservationSet obs = sample_observation_set(
          c.q, c.init, grid, 3.0, n_paths, 0.0, c.seed, 0);
      for (int g = 0; g < 10; ++g) {
        const ProbVector p = solve_master_equation(c.q, c.init, grid(g));
        Eigen::VectorXd counts = Eigen::VectorXd::Zero(c.q.num_states());
        for (Eigen::Index path = 0; path < obs.num_paths(); ++path)
          counts(obs.values(path, g)) += 1.0;
        for (int s = 0; s < c.q.num_states(); ++s) {
          const double expect = p.probs()(s);
          const double emp = counts(s) / n_paths;
          const double se = std::sqrt(expect * (1.0 - expect) / n_paths);
          const double z = se > 0.0 ? std::abs(emp - expect) / se
                                    : (emp == expect ? 0.0 : 1e9);
          worst = std::max(worst, z);
          if (z > 3.0) ok = false;
        }
      }
    }
    line(4, ok,
         "10^4-path occupancy within 3 binomial SE at 10 grid times for both "
         "chains (worst z = " + fmt(worst) + ")");
  });

  // 5. Alignment DP equals exhaustive matching. Times and costs live on a
  //    1/64 lattice so every sum is exact and equality is bitwise.
  criterion(5, [&] {
    Pcg32 rng(505, 0);
    bool ok = true;
    for (int trial = 0; trial < 200 && ok; ++trial) {
      const int k = 1 + static_cast<int>(rng.uniform_int(3));
      auto draw = [&](EventSequence& seq) {
        std::vector<std::pair<double, int>> events;
        for (int m = 0; m < k; ++m) {
          const int count = static_cast<int>(rng.uniform_int(5));
          for (int i = 0; i < count; ++i)
            events.emplace_back(
                static_cast<double>(rng.uniform_int(512)) / 64.0, m);
        }
        std::sort(events.begin(), events.end());
        for (const auto& [t, m] : events) {
          seq.times.push_back(t);
          seq.marks.push_back(m);
        }
      };
      EventSequence pred, truth;
      draw(pred);
      draw(truth);
      const double del = static_cast<double>(16 + rng.uniform_int(112)) / 64.0;
      if (otd(pred, truth, del) != exhaustive_otd(pred, truth, del)) ok = false;
    }
    line(5, ok, "DP alignment equals exhaustive matching on 200 random pairs");
  });

  // 6. Hand-trace vectors for the two-observation estimate and the
  //    empty-history prediction.
  criterion(6, [&] {
    MjpObservationSet obs;
    obs.grid.resize(1, 2);
    obs.grid << 0.0, 1.0;
    obs.values.resize(1, 2);
    obs.values << 0, 1;
    obs.seq_lengths.resize(1);
    obs.seq_lengths << 2;
    obs.n_states = 2;
    const MjpEstimate est = estimate_mjp_parameters(obs);
    Eigen::MatrixXd expected_q(2, 2);
    expected_q << -0.88, 0.88, 2.0 / 15.0, -2.0 / 15.0;
    Eigen::VectorXd expected_init(2);
    expected_init << 4.0 / 7.0, 3.0 / 7.0;
    const double q_err =
        (est.q.entries() - expected_q).cwiseAbs().maxCoeff();
    const double init_err =
        (est.init.probs() - expected_init).cwiseAbs().maxCoeff();

    const tpp::ContextStats stats = tpp::build_context_stats({}, 3);
    const tpp::EventPrediction ep = tpp::predict_next(EventSequence{}, stats);
    const tpp::SyntheticPriorStats sp = tpp::build_synthetic_prior_stats({}, 3);
    const tpp::EventPrediction sp_pred =
        tpp::predict_next(EventSequence{}, sp);

    const bool ok = q_err <= 1e-9 && init_err <= 1e-9 &&
                    std::abs(ep.time - 1.0) <= 1e-9 && ep.mark == 0 &&
                    std::abs(sp_pred.time - 1.0) <= 1e-9 && sp_pred.mark == 0;
    line(6, ok,
         "two-observation estimate off by " + fmt(std::max(q_err, init_err)) +
             " and empty-history prediction (" + fmt(ep.time) + ", " +
             std::to_string(ep.mark) + ") match to 1e-9");
  });

  // 7. Imputation: interpolation exactness, motif recovery, and fuzzed
  //    totality, preservation, and idempotence.
  criterion(7, [&] {
    // (a) interpolation on an affine signal
    const int t_len = 50;
    TimeSeriesPanel affine;
    affine.values.resize(t_len, 2);
    double t = 0.0;
    for (int i = 0; i < t_len; ++i) {
      t += 0.3 + 0.05 * (i % 3);
      affine.times.push_back(t);
      for (int j = 0; j < 2; ++j)
        affine.values(i, j) = (1.5 + j) * t - 2.0 * j;
    }
    affine.mask = BoolGrid::Constant(t_len, 2, false);
    const Eigen::MatrixXd truth_values = affine.values;
    const int holes[8] = {5, 6, 7, 8, 20, 33, 34, 35};
    for (int h : holes)
      for (int j = 0; j < 2; ++j)
        affine.values(h, j) = std::numeric_limits<double>::quiet_NaN();
    ImputerConfig interp_only;
    interp_only.large_gap_threshold = 1 << 20;
    const Eigen::MatrixXd filled = impute_panel(affine, interp_only);
    double mae = 0.0;
    for (int h : holes)
      for (int j = 0; j < 2; ++j)
        mae += std::abs(filled(h, j) - truth_values(h, j));
    mae /= 16.0;

    // (b) motif recovery on a periodic sawtooth
    TimeSeriesPanel saw;
    saw.values.resize(48, 1);
    for (int i = 0; i < 48; ++i) {
      saw.times.push_back(static_cast<double>(i));
      saw.values(i, 0) = static_cast<double>(i % 8);
    }
    saw.mask = BoolGrid::Constant(48, 1, false);
    for (int i = 32; i < 40; ++i)
      saw.values(i, 0) = std::numeric_limits<double>::quiet_NaN();
    const Eigen::MatrixXd saw_filled = impute_panel(saw, ImputerConfig{});
    double motif_err = 0.0;
    for (int i = 32; i < 40; ++i)
      motif_err =
          std::max(motif_err, std::abs(saw_filled(i, 0) - static_cast<double>(i % 8)));

    // (c) fuzzed panels
    Pcg32 rng(707, 0);
    bool fuzz_ok = true;
    for (int trial = 0; trial < 500 && fuzz_ok; ++trial) {
      const int rows = 4 + static_cast<int>(rng.uniform_int(33));
      const int cols = 1 + static_cast<int>(rng.uniform_int(3));
      TimeSeriesPanel panel;
      panel.values.resize(rows, cols);
      double tt = 0.0;
      for (int i = 0; i < rows; ++i) {
        tt += 0.1 + rng.next_double();
        panel.times.push_back(tt);
        for (int j = 0; j < cols; ++j)
          panel.values(i, j) = rng.next_double() * 10.0 - 5.0;
      }
      panel.mask = BoolGrid::Constant(rows, cols, false);
      for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
          if (rng.next_double() < 0.35)
            panel.values(i, j) = std::numeric_limits<double>::quiet_NaN();
      const Eigen::MatrixXd out = impute_panel(panel, ImputerConfig{});
      for (int i = 0; i < rows && fuzz_ok; ++i)
        for (int j = 0; j < cols && fuzz_ok; ++j) {
          if (!std::isfinite(out(i, j))) fuzz_ok = false;
          if (std::isfinite(panel.values(i, j)) &&
              out(i, j) != panel.values(i, j))
            fuzz_ok = false;
        }
      TimeSeriesPanel complete = panel;
      complete.values = out;
      const Eigen::MatrixXd again = impute_panel(complete, ImputerConfig{});
      if (!(again == out)) fuzz_ok = false;
    }

    const bool ok = mae < 1e-12 && motif_err == 0.0 && fuzz_ok;
    line(7, ok,
         "affine MAE " + fmt(mae) + " < 1e-12, motif error " + fmt(motif_err) +
             ", 500 fuzzed panels total/preserving/idempotent");
  });

  // 8. Estimates beat the zero-generator uniform baseline on synthetic
  //    processes.
  criterion(8, [&] {
    SyntheticMjpConfig cfg;
    int wins = 0;
    const int samples = 200;
    for (int i = 0; i < samples; ++i) {
      const std::uint64_t stream =
          static_cast<std::uint64_t>(i) *
          static_cast<std::uint64_t>(cfg.paths_per_process + 16);
      const SyntheticMjp s = generate_synthetic_mjp(cfg, 7, stream);
      const MjpEstimate est = estimate_mjp_parameters(s.observations);
      const int k = s.q.num_states();
      const MjpEstimate baseline{RateMatrix(Eigen::MatrixXd::Zero(k, k)),
                                 ProbVector::uniform(k), 1.0};
      const double f_est = mjp_fitness(est, s.q.entries(), s.init.probs());
      const double f_base = mjp_fitness(baseline, s.q.entries(), s.init.probs());
      if (f_est > f_base) ++wins;
    }
    const bool ok = wins >= 190;
    line(8, ok,
         "estimate beats the zero/uniform baseline on " + std::to_string(wins) +
             "/200 synthetic processes (need >= 190)");
  });

  // 9. Byte-identical reports across reruns and parallelism degrees.
  criterion(9, [&] {
    if (cli.empty()) {
      line(9, false, "tool path was not supplied on the command line");
      return;
    }
    testutil::TempDir tmp;
    io::save_event_dataset(tmp.file("ctx.jsonl"),
                           alternating_dataset(3, 6, 40, 1.0));
    io::save_event_dataset(tmp.file("test.jsonl"),
                           random_dataset(3, 8, 25, 31));
    TimeSeriesPanel p1;
    p1.values.resize(40, 2);
    for (int i = 0; i < 40; ++i) {
      p1.times.push_back(0.25 * (i + 1));
      p1.values(i, 0) = 1.5 * i + 2.0;
      p1.values(i, 1) = static_cast<double>(i % 8);
    }
    p1.mask = BoolGrid::Constant(40, 2, false);
    io::save_panels(tmp.file("panels.jsonl"), {p1});

    struct Cmd {
      const char* name;
      std::string args;
    };
    const std::vector<Cmd> cmds = {
        {"tpp", "tpp --context " + tmp.file("ctx.jsonl").string() + " --data " +
                    tmp.file("test.jsonl").string() + " --horizon 4"},
        {"mjp", "mjp --simulate-dfr 1 1 1 300 25 --hellinger-target-paths 200 "
                "--hellinger-paths 200 --hellinger-reps 4"},
        {"simulate-dfr",
         "simulate-dfr --v 1 --r 1 --b 1 --paths 200 --obs 20 "
         "--hellinger-target-paths 150 --hellinger-paths 150 --hellinger-reps 3"},
        {"impute", "impute --data " + tmp.file("panels.jsonl").string() +
                       " --holdout-mode pointwise --holdout-fraction 0.4"},
    };
    bool ok = true;
    std::string detail = "byte-identical reports for";
    for (const auto& c : cmds) {
      const auto out1 = tmp.file(std::string(c.name) + "_t1.json");
      const auto out8 = tmp.file(std::string(c.name) + "_t8.json");
      const auto out8b = tmp.file(std::string(c.name) + "_t8b.json");
      const std::string base = cli + " " + c.args + " --seed 11 ";
      if (run_cli(base + "--threads 1 --out " + out1.string()) != 0 ||
          run_cli(base + "--threads 8 --out " + out8.string()) != 0 ||
          run_cli(base + "--threads 8 --out " + out8b.string()) != 0) {
        ok = false;
        detail = std::string(c.name) + " exited nonzero";
        break;
      }
      const std::string b1 = read_bytes(out1);
      if (b1.empty() || b1 != read_bytes(out8) || b1 != read_bytes(out8b)) {
        ok = false;
        detail = std::string(c.name) + " reports differ";
        break;
      }
      detail += std::string(" ") + c.name;
    }
    line(9, ok, detail + " across reruns and thread degrees 1 and 8");
  });

  // 10. A corpus in the documented format runs the full protocol: all five
  //     metrics are emitted, the stored report rescores cleanly, and scoring
  //     the truth against itself is exact.
  criterion(10, [&] {
    if (cli.empty()) {
      line(10, false, "tool path was not supplied on the command line");
      return;
    }
    testutil::TempDir tmp;
    io::save_event_dataset(tmp.file("ctx.jsonl"), random_dataset(4, 10, 30, 808));
    io::save_event_dataset(tmp.file("test.jsonl"), random_dataset(4, 12, 28, 809));
    const auto report_path = tmp.file("report.json");
    const int rc = run_cli(cli + " tpp --context " + tmp.file("ctx.jsonl").string() +
                           " --data " + tmp.file("test.jsonl").string() +
                           " --horizon 5 --out " + report_path.string());
    bool ok = rc == 0;
    std::string missing;
    if (ok) {
      const json doc = json::parse(read_bytes(report_path));
      for (const char* key : {"acc", "rmse_e", "rmse_dt", "smape_dt", "otd"})
        if (!doc.at("results").at("metrics").contains(key)) missing = key;
      ok = missing.empty();
      if (ok) ok = run_cli(cli + " score " + report_path.string()) == 0;
    }

    // Self-consistency: the truth scored as its own prediction.
    bool self_ok = false;
    if (ok) {
      const EventDataset truth = random_dataset(4, 12, 6, 810);
      std::vector<std::vector<int>> marks;
      std::vector<std::vector<double>> times;
      std::vector<EventSequence> seqs;
      std::vector<double> anchors;
      for (const auto& s : truth.sequences) {
        marks.push_back(s.marks);
        times.push_back(s.times);
        seqs.push_back(s);
        anchors.push_back(0.0);
      }
      self_ok = accuracy(marks, marks) == 1.0 &&
                rmse_counts(marks, marks, 4) == 0.0 &&
                rmse_dt(times, times, anchors) == 0.0 &&
                smape_dt(times, times, anchors) == 0.0 &&
                mean_otd(seqs, seqs, 1.0) == 0.0;
    }
    ok = ok && self_ok;
    line(10, ok,
         ok ? "documented-format corpus emits all five metrics, rescoring "
              "passes, and truth scored against itself is exact"
            : (missing.empty() ? "self-consistency or tool run failed"
                               : "metric missing: " + missing));
  });

  if (failures == 0) std::printf("all acceptance criteria passed\n");
  return failures == 0 ? 0 : 1;
}

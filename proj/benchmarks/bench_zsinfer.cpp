#include <benchmark/benchmark.h>

#include <cmath>
#include <limits>
#include <vector>

#include "zsinfer/harness.hpp"
#include "zsinfer/imputation.hpp"
#include "zsinfer/mjp_estimator.hpp"
#include "zsinfer/mjp_simulation.hpp"
#include "zsinfer/rng.hpp"
#include "zsinfer/tpp.hpp"
#include "zsinfer/types.hpp"

using namespace zsinfer;

namespace {

std::vector<EventSequence> synthetic_context(int sequences, int length, int k) {
  Pcg32 rng(1, 0);
  std::vector<EventSequence> out;
  out.reserve(static_cast<std::size_t>(sequences));
  for (int s = 0; s < sequences; ++s) {
    EventSequence seq;
    double t = 0.0;
    for (int i = 0; i < length; ++i) {
      t += 0.05 + rng.next_double();
      seq.times.push_back(t);
      seq.marks.push_back(
          static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(k))));
    }
    out.push_back(std::move(seq));
  }
  return out;
}

const MjpObservationSet& ratchet_observations() {
  static const MjpObservationSet obs =
      simulate_dfr_dataset(1.0, 1.0, 1.0, 5000, 50, 3.0, GridMode::kIrregular,
                           0.0, 42, 0)
          .observations;
  return obs;
}

TimeSeriesPanel holey_panel(int rows, int cols) {
  Pcg32 rng(9, 0);
  TimeSeriesPanel p;
  p.values.resize(rows, cols);
  double t = 0.0;
  for (int i = 0; i < rows; ++i) {
    t += 0.1 + rng.next_double();
    p.times.push_back(t);
    for (int j = 0; j < cols; ++j)
      p.values(i, j) = rng.next_double() < 0.3
                           ? std::numeric_limits<double>::quiet_NaN()
                           : std::sin(0.37 * i + j) * 5.0;
  }
  p.mask = BoolGrid::Constant(rows, cols, false);
  return p;
}

void BM_BuildContextStats(benchmark::State& state) {
  const auto context =
      synthetic_context(static_cast<int>(state.range(0)), 100, 10);
  for (auto _ : state)
    benchmark::DoNotOptimize(tpp::build_context_stats(context, 10));
}
BENCHMARK(BM_BuildContextStats)->Arg(25)->Arg(200);

void BM_Rollout(benchmark::State& state) {
  const auto context = synthetic_context(50, 100, 10);
  const tpp::ContextStats stats = tpp::build_context_stats(context, 10);
  const auto test = synthetic_context(1, 200, 10);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        tpp::rollout(test[0], stats, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_Rollout)->Arg(5)->Arg(50);

void BM_EstimateGenerator(benchmark::State& state) {
  const MjpObservationSet& obs = ratchet_observations();
  for (auto _ : state) benchmark::DoNotOptimize(estimate_mjp_parameters(obs));
}
BENCHMARK(BM_EstimateGenerator)->Unit(benchmark::kMillisecond);

void BM_GillespiePath(benchmark::State& state) {
  const RateMatrix q = dfr_generator(1.0, 1.0, 1.0);
  const ProbVector init = stationary_distribution(q);
  Pcg32 rng(3, 1);
  for (auto _ : state)
    benchmark::DoNotOptimize(gillespie_sample(q, init, 3.0, rng));
}
BENCHMARK(BM_GillespiePath);

void BM_MasterEquation(benchmark::State& state) {
  const RateMatrix q = dfr_generator(1.0, 1.0, 1.0);
  const ProbVector init = ProbVector::uniform(6);
  const double t = 0.5 * static_cast<double>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(solve_master_equation(q, init, t));
}
BENCHMARK(BM_MasterEquation)->Arg(1)->Arg(6);

void BM_ImputePanel(benchmark::State& state) {
  const TimeSeriesPanel panel =
      holey_panel(static_cast<int>(state.range(0)), 4);
  const ImputerConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(impute_panel(panel, cfg));
}
BENCHMARK(BM_ImputePanel)->Arg(100)->Arg(500);

}  // namespace

BENCHMARK_MAIN();

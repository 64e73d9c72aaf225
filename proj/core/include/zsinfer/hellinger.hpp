#pragma once

#include <cstdint>
#include <span>

#include "zsinfer/types.hpp"

namespace zsinfer {

// Hellinger distance sqrt(sum_i (sqrt(p_i) - sqrt(q_i))^2) / sqrt(2),
// a metric on distributions with values in [0, 1].
double hellinger(std::span<const double> p, std::span<const double> q);
double hellinger(const ProbVector& p, const ProbVector& q);

struct HellingerSummary {
  double mean = 0.0;
  double stddev = 0.0;
  int repetitions = 0;
};

// Protocol knobs for time_averaged_hellinger. Repetition r samples its paths
// from rng streams [stream_base + r*model_paths, stream_base + (r+1)*model_paths),
// so results do not depend on the thread count.
struct HellingerProtocol {
  int model_paths = 10000;
  int repetitions = 100;
  std::uint64_t seed = 0;
  std::uint64_t stream_base = 0;
  int threads = 1;
};

// Compares observed paths against a model by state-occupancy histograms.
// The target observations are grouped by exact grid time; each distinct time
// gets a histogram over the entries recorded at it. Every repetition samples
// model_paths fresh trajectories from (model_q, model_init), observes them at
// all pooled times, and averages the per-time Hellinger distance; the summary
// holds the mean and population standard deviation over repetitions.
HellingerSummary time_averaged_hellinger(const MjpObservationSet& target,
                                         const RateMatrix& model_q,
                                         const ProbVector& model_init,
                                         const HellingerProtocol& protocol);

}  // namespace zsinfer

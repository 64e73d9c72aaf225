#include "zsinfer/hellinger.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "zsinfer/errors.hpp"
#include "zsinfer/mjp_simulation.hpp"
#include "zsinfer/parallel.hpp"
#include "zsinfer/rng.hpp"

namespace zsinfer {

double hellinger(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size())
    throw DataError("distributions have lengths " + std::to_string(p.size()) +
                    " and " + std::to_string(q.size()));
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = std::sqrt(p[i]) - std::sqrt(q[i]);
    sum += d * d;
  }
  return std::min(1.0, std::sqrt(0.5 * sum));
}

double hellinger(const ProbVector& p, const ProbVector& q) {
  return hellinger(
      std::span<const double>(p.probs().data(),
                              static_cast<std::size_t>(p.probs().size())),
      std::span<const double>(q.probs().data(),
                              static_cast<std::size_t>(q.probs().size())));
}

HellingerSummary time_averaged_hellinger(const MjpObservationSet& target,
                                         const RateMatrix& model_q,
                                         const ProbVector& model_init,
                                         const HellingerProtocol& protocol) {
  if (protocol.model_paths < 1)
    throw ConfigError("need at least one model path per repetition");
  if (protocol.repetitions < 1)
    throw ConfigError("need at least one repetition");
  const int k = target.n_states;
  if (model_q.num_states() != k)
    throw DataError("model has " + std::to_string(model_q.num_states()) +
                    " states but the target observations have " +
                    std::to_string(k));

  // Pool target entries by exact grid time and histogram each group.
  std::map<double, std::vector<double>> by_time;
  for (Eigen::Index p = 0; p < target.num_paths(); ++p)
    for (int j = 0; j < target.seq_lengths(p); ++j) {
      auto& hist = by_time[target.grid(p, j)];
      if (hist.empty()) hist.assign(static_cast<std::size_t>(k), 0.0);
      hist[static_cast<std::size_t>(target.values(p, j))] += 1.0;
    }
  if (by_time.empty())
    throw DataError("target observation set contains no recorded times");

  std::vector<double> times;
  std::vector<std::vector<double>> target_hists;
  times.reserve(by_time.size());
  for (auto& [t, hist] : by_time) {
    double total = 0.0;
    for (double c : hist) total += c;
    for (double& c : hist) c /= total;
    times.push_back(t);
    target_hists.push_back(std::move(hist));
  }
  const std::size_t n_times = times.size();
  const double max_time = times.back();
  const double sim_horizon = max_time > 0.0 ? max_time : 1.0;

  const auto paths = static_cast<std::uint64_t>(protocol.model_paths);
  std::vector<double> rep_means(static_cast<std::size_t>(protocol.repetitions));
  parallel_for(
      rep_means.size(), protocol.threads, [&](std::size_t rep) {
        std::vector<std::vector<double>> counts(
            n_times, std::vector<double>(static_cast<std::size_t>(k), 0.0));
        const std::uint64_t base =
            protocol.stream_base + static_cast<std::uint64_t>(rep) * paths;
        for (std::uint64_t p = 0; p < paths; ++p) {
          Pcg32 rng(protocol.seed, base + p);
          const Trajectory traj =
              gillespie_sample(model_q, model_init, sim_horizon, rng);
          const auto states = observe_on_grid(traj, times);
          for (std::size_t ell = 0; ell < n_times; ++ell)
            counts[ell][static_cast<std::size_t>(states[ell])] += 1.0;
        }
        double total = 0.0;
        for (std::size_t ell = 0; ell < n_times; ++ell) {
          for (double& c : counts[ell]) c /= static_cast<double>(paths);
          total += hellinger(counts[ell], target_hists[ell]);
        }
        rep_means[rep] = total / static_cast<double>(n_times);
      });

  double mean = 0.0;
  for (double m : rep_means) mean += m;
  mean /= static_cast<double>(rep_means.size());
  double var = 0.0;
  for (double m : rep_means) var += (m - mean) * (m - mean);
  var /= static_cast<double>(rep_means.size());
  return {mean, std::sqrt(var), protocol.repetitions};
}

}  // namespace zsinfer

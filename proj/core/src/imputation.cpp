#include "zsinfer/imputation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "zsinfer/errors.hpp"

namespace zsinfer {

namespace {

void check_config(const ImputerConfig& cfg) {
  if (cfg.large_gap_threshold < 1 || cfg.context_size < 1)
    throw ConfigError("imputer thresholds must be at least 1");
}

// Linear interpolation of the missing positions against the timestamps,
// using the currently finite entries as breakpoints. Queries outside the
// observed time range clamp to the nearest observed value; a query equal to
// an observed time takes that point's value.
void interpolate_missing(std::vector<double>& out,
                         std::span<const double> times) {
  std::vector<std::size_t> obs;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (std::isfinite(out[i])) obs.push_back(i);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (std::isfinite(out[i])) continue;
    const double x = times[i];
    // Last observed breakpoint with time <= x.
    const auto it = std::upper_bound(
        obs.begin(), obs.end(), x,
        [&](double query, std::size_t idx) { return query < times[idx]; });
    if (it == obs.begin()) {
      out[i] = out[obs.front()];
      continue;
    }
    const auto lo = static_cast<std::size_t>(it - obs.begin()) - 1;
    if (times[obs[lo]] == x || lo + 1 == obs.size()) {
      out[i] = out[obs[lo]];
      continue;
    }
    const std::size_t a = obs[lo], b = obs[lo + 1];
    const double frac = (x - times[a]) / (times[b] - times[a]);
    out[i] = out[a] + frac * (out[b] - out[a]);
  }
}

void impute_1d(std::vector<double>& out, std::span<const double> times,
               const ImputerConfig& cfg) {
  const std::size_t n = out.size();
  if (n == 0) return;
  std::unique_ptr<bool[]> valid(new bool[n]);
  std::size_t n_valid = 0;
  for (std::size_t i = 0; i < n; ++i) {
    valid[i] = std::isfinite(out[i]);
    if (valid[i]) ++n_valid;
  }
  if (n_valid == 0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  if (n_valid == n) return;

  const auto ctx = static_cast<std::size_t>(cfg.context_size);
  std::unique_ptr<bool[]> missing(new bool[n]);
  for (std::size_t i = 0; i < n; ++i) missing[i] = !valid[i];
  for (const auto& block :
       detect_missing_blocks(std::span<const bool>(missing.get(), n))) {
    const auto s = static_cast<std::size_t>(block.begin);
    const auto e = static_cast<std::size_t>(block.end);
    const std::size_t gap_len = e - s;
    if (gap_len < static_cast<std::size_t>(cfg.large_gap_threshold) || s < ctx)
      continue;
    bool context_ok = true;
    for (std::size_t i = s - ctx; i < s; ++i)
      if (!valid[i]) context_ok = false;
    if (!context_ok) continue;

    // Candidate windows of context plus continuation, entirely before the
    // gap. A window may reuse the gap's own context region.
    const std::size_t req_len = ctx + gap_len;
    if (s < req_len) continue;
    const std::size_t search_end = s - req_len + 1;

    double best_dist = std::numeric_limits<double>::infinity();
    std::size_t best = n;
    for (std::size_t idx = 0; idx < search_end; ++idx) {
      bool window_ok = true;
      for (std::size_t i = idx; i < idx + req_len; ++i)
        if (!valid[i]) {
          window_ok = false;
          break;
        }
      if (!window_ok) continue;
      double dist = 0.0;
      for (std::size_t i = 0; i < ctx; ++i) {
        const double d = out[idx + i] - out[s - ctx + i];
        dist += d * d;
      }
      if (dist < best_dist) {
        best_dist = dist;
        best = idx;
      }
    }
    if (best == n) continue;

    const double shift = out[s - 1] - out[best + ctx - 1];
    for (std::size_t i = 0; i < gap_len; ++i) out[s + i] = out[best + ctx + i] + shift;
    for (std::size_t i = s; i < e; ++i) valid[i] = true;
  }

  interpolate_missing(out, times);
}

}  // namespace

std::vector<IndexRange> detect_missing_blocks(std::span<const bool> missing) {
  std::vector<IndexRange> blocks;
  std::size_t i = 0;
  while (i < missing.size()) {
    if (!missing[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < missing.size() && missing[j]) ++j;
    blocks.push_back({static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)});
    i = j;
  }
  return blocks;
}

std::vector<double> impute_channel(std::span<const double> values,
                                   std::span<const double> times,
                                   const ImputerConfig& cfg) {
  check_config(cfg);
  if (values.size() != times.size())
    throw DataError("channel has " + std::to_string(values.size()) +
                    " values but " + std::to_string(times.size()) + " times");
  std::vector<double> out(values.begin(), values.end());
  impute_1d(out, times, cfg);
  return out;
}

Eigen::MatrixXd impute_panel(const TimeSeriesPanel& panel,
                             const ImputerConfig& cfg) {
  check_config(cfg);
  const auto t = panel.values.rows();
  const auto d = panel.values.cols();
  Eigen::MatrixXd filled(t, d);
  std::vector<double> col(static_cast<std::size_t>(t));
  const std::span<const double> times(panel.times.data(),
                                      static_cast<std::size_t>(panel.times.size()));
  for (Eigen::Index c = 0; c < d; ++c) {
    for (Eigen::Index r = 0; r < t; ++r)
      col[static_cast<std::size_t>(r)] = panel.values(r, c);
    impute_1d(col, times, cfg);
    for (Eigen::Index r = 0; r < t; ++r)
      filled(r, c) = col[static_cast<std::size_t>(r)];
  }
  return filled;
}

BoolGrid pointwise_mask(Eigen::Index t, Eigen::Index d, double fraction,
                        Pcg32& rng) {
  if (t < 0 || d < 0) throw ConfigError("mask dimensions must be nonnegative");
  if (fraction < 0.0 || fraction >= 1.0)
    throw ConfigError("pointwise mask fraction must lie in [0, 1)");
  const auto cells = static_cast<std::size_t>(t * d);
  const auto want = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(cells)));
  std::vector<std::size_t> pool(cells);
  for (std::size_t i = 0; i < cells; ++i) pool[i] = i;
  BoolGrid mask = BoolGrid::Constant(t, d, false);
  for (std::size_t i = 0; i < want; ++i) {
    const auto pick =
        i + static_cast<std::size_t>(rng.uniform_int(
                static_cast<std::int64_t>(cells - i)));
    std::swap(pool[i], pool[pick]);
    const auto cell = pool[i];
    mask(static_cast<Eigen::Index>(cell / static_cast<std::size_t>(d)),
         static_cast<Eigen::Index>(cell % static_cast<std::size_t>(d))) = true;
  }
  return mask;
}

IndexRange window_mask(Eigen::Index t, double fraction) {
  if (t < 1) throw ConfigError("window mask needs at least one time step");
  if (!(fraction > 0.0) || !(fraction < 1.0))
    throw ConfigError("window mask fraction must lie in (0, 1)");
  const auto len = std::max<Eigen::Index>(
      1, static_cast<Eigen::Index>(std::llround(fraction * static_cast<double>(t))));
  const Eigen::Index start = (t - len) / 2;
  return {start, start + len};
}

double mae_on_mask(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth,
                   const BoolGrid& mask) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols() ||
      pred.rows() != mask.rows() || pred.cols() != mask.cols())
    throw DataError("prediction, truth, and mask shapes disagree");
  double total = 0.0;
  std::size_t count = 0;
  for (Eigen::Index j = 0; j < mask.cols(); ++j)
    for (Eigen::Index i = 0; i < mask.rows(); ++i)
      if (mask(i, j)) {
        total += std::abs(pred(i, j) - truth(i, j));
        ++count;
      }
  if (count == 0) throw DataError("nothing to score: mask selects no cells");
  return total / static_cast<double>(count);
}

}  // namespace zsinfer

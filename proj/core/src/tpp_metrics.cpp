#include "zsinfer/tpp_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "zsinfer/errors.hpp"

namespace zsinfer {

namespace {

void check_paired(std::size_t pred_count, std::size_t truth_count) {
  if (pred_count != truth_count)
    throw DataError("metric inputs pair " + std::to_string(pred_count) +
                    " predicted sequences with " + std::to_string(truth_count) +
                    " true sequences");
  if (pred_count == 0) throw DataError("metric inputs contain no sequences");
}

template <typename T>
void check_pair_lengths(const std::vector<T>& pred, const std::vector<T>& truth,
                        std::size_t index) {
  if (pred.size() != truth.size())
    throw DataError("sequence " + std::to_string(index) + " pairs " +
                    std::to_string(pred.size()) + " predicted events with " +
                    std::to_string(truth.size()) + " true events");
  if (pred.empty())
    throw DataError("sequence " + std::to_string(index) +
                    " has an empty prediction window");
}

// Gaps between consecutive times, with the first gap taken from the anchor.
std::vector<double> gaps_from(const std::vector<double>& times, double anchor) {
  std::vector<double> out(times.size());
  double prev = anchor;
  for (std::size_t i = 0; i < times.size(); ++i) {
    out[i] = times[i] - prev;
    prev = times[i];
  }
  return out;
}

// Minimum-cost non-crossing alignment of two sorted time lists where a match
// costs the absolute time difference and an unmatched entry costs del_cost.
double align_times(const std::vector<double>& a, const std::vector<double>& b,
                   double del_cost) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<double> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = static_cast<double>(j) * del_cost;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<double>(i) * del_cost;
    for (std::size_t j = 1; j <= m; ++j) {
      const double match = prev[j - 1] + std::abs(a[i - 1] - b[j - 1]);
      cur[j] = std::min({prev[j] + del_cost, cur[j - 1] + del_cost, match});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

}  // namespace

double accuracy(std::span<const std::vector<int>> pred_marks,
                std::span<const std::vector<int>> truth_marks) {
  check_paired(pred_marks.size(), truth_marks.size());
  double total = 0.0;
  for (std::size_t s = 0; s < pred_marks.size(); ++s) {
    check_pair_lengths(pred_marks[s], truth_marks[s], s);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred_marks[s].size(); ++i)
      if (pred_marks[s][i] == truth_marks[s][i]) ++hits;
    total += static_cast<double>(hits) / static_cast<double>(pred_marks[s].size());
  }
  return total / static_cast<double>(pred_marks.size());
}

double rmse_counts(std::span<const std::vector<int>> pred_marks,
                   std::span<const std::vector<int>> truth_marks,
                   int num_marks) {
  check_paired(pred_marks.size(), truth_marks.size());
  if (num_marks < 1) throw ConfigError("num_marks must be at least 1");
  std::vector<int> cp(static_cast<std::size_t>(num_marks));
  std::vector<int> ct(static_cast<std::size_t>(num_marks));
  double total = 0.0;
  for (std::size_t s = 0; s < pred_marks.size(); ++s) {
    if (pred_marks[s].empty() || truth_marks[s].empty())
      throw DataError("sequence " + std::to_string(s) +
                      " has an empty prediction window");
    std::fill(cp.begin(), cp.end(), 0);
    std::fill(ct.begin(), ct.end(), 0);
    for (int m : pred_marks[s]) {
      if (m < 0 || m >= num_marks)
        throw DataError("sequence " + std::to_string(s) +
                        " contains mark " + std::to_string(m) +
                        " outside [0, " + std::to_string(num_marks) + ")");
      ++cp[static_cast<std::size_t>(m)];
    }
    for (int m : truth_marks[s]) {
      if (m < 0 || m >= num_marks)
        throw DataError("sequence " + std::to_string(s) +
                        " contains mark " + std::to_string(m) +
                        " outside [0, " + std::to_string(num_marks) + ")");
      ++ct[static_cast<std::size_t>(m)];
    }
    for (int k = 0; k < num_marks; ++k) {
      const double d = static_cast<double>(cp[static_cast<std::size_t>(k)] -
                                           ct[static_cast<std::size_t>(k)]);
      total += d * d;
    }
  }
  return std::sqrt(total / static_cast<double>(pred_marks.size()));
}

double rmse_dt(std::span<const std::vector<double>> pred_times,
               std::span<const std::vector<double>> truth_times,
               std::span<const double> history_last_times) {
  check_paired(pred_times.size(), truth_times.size());
  if (history_last_times.size() != pred_times.size())
    throw DataError("history anchor list length " +
                    std::to_string(history_last_times.size()) +
                    " does not match sequence count " +
                    std::to_string(pred_times.size()));
  double total = 0.0;
  for (std::size_t s = 0; s < pred_times.size(); ++s) {
    check_pair_lengths(pred_times[s], truth_times[s], s);
    const auto dp = gaps_from(pred_times[s], history_last_times[s]);
    const auto dt = gaps_from(truth_times[s], history_last_times[s]);
    double sq = 0.0;
    for (std::size_t i = 0; i < dp.size(); ++i) {
      const double e = dt[i] - dp[i];
      sq += e * e;
    }
    total += sq / static_cast<double>(dp.size());
  }
  return std::sqrt(total / static_cast<double>(pred_times.size()));
}

double smape_dt(std::span<const std::vector<double>> pred_times,
                std::span<const std::vector<double>> truth_times,
                std::span<const double> history_last_times) {
  check_paired(pred_times.size(), truth_times.size());
  if (history_last_times.size() != pred_times.size())
    throw DataError("history anchor list length " +
                    std::to_string(history_last_times.size()) +
                    " does not match sequence count " +
                    std::to_string(pred_times.size()));
  double total = 0.0;
  for (std::size_t s = 0; s < pred_times.size(); ++s) {
    check_pair_lengths(pred_times[s], truth_times[s], s);
    const auto dp = gaps_from(pred_times[s], history_last_times[s]);
    const auto dt = gaps_from(truth_times[s], history_last_times[s]);
    double acc = 0.0;
    for (std::size_t i = 0; i < dp.size(); ++i) {
      const double denom = std::abs(dt[i]) + std::abs(dp[i]);
      if (denom > 0.0) acc += 2.0 * std::abs(dt[i] - dp[i]) / denom;
    }
    total += acc / static_cast<double>(dp.size());
  }
  return 100.0 * total / static_cast<double>(pred_times.size());
}

double otd(const EventSequence& pred, const EventSequence& truth,
           double del_cost) {
  if (!(del_cost > 0.0)) throw ConfigError("otd deletion cost must be positive");
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
    if (a.empty() && b.empty()) continue;
    total += align_times(a, b, del_cost);
  }
  return total;
}

double mean_otd(std::span<const EventSequence> pred,
                std::span<const EventSequence> truth, double del_cost) {
  check_paired(pred.size(), truth.size());
  double total = 0.0;
  for (std::size_t s = 0; s < pred.size(); ++s)
    total += otd(pred[s], truth[s], del_cost);
  return total / static_cast<double>(pred.size());
}

}  // namespace zsinfer

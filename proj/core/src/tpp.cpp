#include "zsinfer/tpp.hpp"

#include <algorithm>
#include <cmath>

namespace zsinfer::tpp {

namespace {

double median(std::vector<double> v) {
  // even count: midpoint of the two central order statistics
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// first index of the maximum
template <typename Vec>
int argmax(const Vec& v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

// n equally spaced values from -1 to 0 inclusive
std::vector<double> recency_grid(int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  if (n == 1) {
    v[0] = -1.0;
    return v;
  }
  double step = 1.0 / static_cast<double>(n - 1);
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = -1.0 + step * i;
  v[static_cast<std::size_t>(n - 1)] = 0.0;
  return v;
}

}  // namespace

ContextStats build_context_stats(std::span<const EventSequence> context, int num_marks) {
  ContextStats s;
  s.num_marks = num_marks;
  s.mean_gap_by_prev = Eigen::VectorXd::Zero(num_marks);
  s.gap_count_by_prev = Eigen::VectorXi::Zero(num_marks);
  s.mark_counts = Eigen::VectorXd::Zero(num_marks);
  Eigen::VectorXd gap_sum = Eigen::VectorXd::Zero(num_marks);
  Eigen::MatrixXd trans = Eigen::MatrixXd::Zero(num_marks, num_marks);

  std::vector<double> gaps;
  for (const auto& seq : context) {
    const auto& t = seq.times;
    const auto& m = seq.marks;
    if (t.size() >= 2) {
      for (std::size_t j = 0; j + 1 < t.size(); ++j) {
        double d = t[j + 1] - t[j];
        gaps.push_back(d);
        int prev = m[j];
        if (prev >= 0 && prev < num_marks) {
          gap_sum(prev) += d;
          s.gap_count_by_prev(prev) += 1;
        }
      }
    }
    for (int mk : m)
      if (mk >= 0 && mk < num_marks) s.mark_counts(mk) += 1.0;
    for (std::size_t j = 0; j + 1 < m.size(); ++j) {
      int a = m[j];
      int b = m[j + 1];
      if (a >= 0 && a < num_marks && b >= 0 && b < num_marks) trans(a, b) += 1.0;
    }
  }

  s.global_gap = gaps.empty() ? 1.0 : median(gaps);
  s.majority_mark = s.mark_counts.sum() > 0 ? argmax(s.mark_counts) : 0;

  s.smoothed_transitions = trans.array() + 1.0;
  for (int i = 0; i < num_marks; ++i) {
    double denom = s.smoothed_transitions.row(i).sum() + 1e-12;
    s.smoothed_transitions.row(i) /= denom;
  }

  s.mean_gap_by_prev.setConstant(s.global_gap);
  for (int k = 0; k < num_marks; ++k)
    if (s.gap_count_by_prev(k) > 0) s.mean_gap_by_prev(k) = gap_sum(k) / s.gap_count_by_prev(k);
  return s;
}

Eigen::VectorXd mark_scores(const EventSequence& history, const ContextStats& stats) {
  int num_marks = stats.num_marks;
  Eigen::VectorXd scores = Eigen::VectorXd::Zero(num_marks);
  const auto& m = history.marks;
  if (m.empty()) return scores;
  int last_m = m.back();

  if (m.size() >= 2) {
    for (std::size_t j = 0; j + 1 < m.size(); ++j)
      if (m[j] == last_m) scores(m[j + 1]) += 1.0;
  }
  for (int mk : m) scores(mk) += 0.25;
  if (last_m >= 0 && last_m < num_marks) {
    scores += 2.0 * stats.smoothed_transitions.row(last_m).transpose();
  } else {
    scores += 0.5 * (stats.mark_counts.array() + 1.0).matrix();
  }
  return scores;
}

EventPrediction predict_next(const EventSequence& history, const ContextStats& stats) {
  const auto& t = history.times;
  const auto& m = history.marks;
  std::size_t n = t.size();
  if (n == 0) return {stats.global_gap, stats.majority_mark};

  double last_t = t.back();
  int last_m = m.back();
  int num_marks = stats.num_marks;
  double predicted_time;

  if (n >= 2) {
    // recency-weighted mean of up to the last five gaps
    std::size_t n_gaps = n - 1;
    std::size_t lr = std::min<std::size_t>(5, n_gaps);
    auto grid = recency_grid(static_cast<int>(lr));
    double wsum = 0.0;
    for (double g : grid) wsum += std::exp(g);
    double rec_est = 0.0;
    for (std::size_t k = 0; k < lr; ++k) {
      double gap = t[n_gaps - lr + k + 1] - t[n_gaps - lr + k];
      rec_est += gap * (std::exp(grid[k]) / (wsum + 1e-12));
    }
    double base;
    if (last_m >= 0 && last_m < num_marks && stats.gap_count_by_prev(last_m) > 0)
      base = 0.6 * rec_est + 0.4 * stats.mean_gap_by_prev(last_m);
    else
      base = 0.75 * rec_est + 0.25 * stats.global_gap;
    base = std::max(base, 1e-6);
    double cap = 20.0 * std::max(rec_est > 0 ? rec_est : stats.global_gap, stats.global_gap);
    base = std::min(base, cap);
    predicted_time = last_t + base;
  } else {
    double delta = (last_m >= 0 && last_m < num_marks && stats.gap_count_by_prev(last_m) > 0)
                       ? stats.mean_gap_by_prev(last_m)
                       : stats.global_gap;
    predicted_time = last_t + std::max(delta, 1e-6);
  }

  Eigen::VectorXd scores = mark_scores(history, stats);
  int predicted_mark = scores.sum() <= 0 ? stats.majority_mark : argmax(scores);
  return {predicted_time, predicted_mark};
}

SyntheticPriorStats build_synthetic_prior_stats(std::span<const EventSequence> context, int num_marks) {
  SyntheticPriorStats s;
  s.num_marks = num_marks;
  Eigen::MatrixXi trans = Eigen::MatrixXi::Zero(num_marks, num_marks);
  std::vector<std::vector<double>> per_prev(static_cast<std::size_t>(num_marks));
  std::vector<std::vector<double>> per_next(static_cast<std::size_t>(num_marks));
  std::map<std::pair<int, int>, std::vector<double>> edge_gaps;
  std::vector<double> all_gaps;
  Eigen::VectorXd all_mark_counts = Eigen::VectorXd::Zero(num_marks);
  bool any_mark = false;

  for (const auto& seq : context) {
    const auto& t = seq.times;
    const auto& m = seq.marks;
    std::size_t lm = m.size();
    if (t.size() > 1) {
      std::size_t n_gaps = t.size() - 1;
      for (std::size_t j = 0; j < n_gaps; ++j) all_gaps.push_back(t[j + 1] - t[j]);
      std::size_t l = lm > 0 ? std::min(n_gaps, lm - 1) : 0;
      for (std::size_t j = 0; j < l; ++j) {
        double d = t[j + 1] - t[j];
        int a = m[j];
        int b = m[j + 1];
        per_prev[static_cast<std::size_t>(a)].push_back(d);
        per_next[static_cast<std::size_t>(b)].push_back(d);
        trans(a, b) += 1;
        edge_gaps[{a, b}].push_back(d);
      }
      if (lm > 2) {
        for (std::size_t j = 0; j + 2 < lm; ++j) {
          auto key = std::make_pair(m[j], m[j + 1]);
          auto [it, inserted] = s.pair_next.try_emplace(key, Eigen::VectorXi::Zero(num_marks));
          it->second(m[j + 2]) += 1;
        }
      }
    }
    if (lm > 0) {
      any_mark = true;
      for (int mk : m) all_mark_counts(mk) += 1.0;
    }
  }

  s.global_gap = all_gaps.empty() ? 1.0 : median(all_gaps);
  s.majority_mark = any_mark ? argmax(all_mark_counts) : 0;
  s.outgoing_gap = Eigen::VectorXd::Constant(num_marks, s.global_gap);
  s.incoming_gap = Eigen::VectorXd::Constant(num_marks, s.global_gap);
  for (int c = 0; c < num_marks; ++c) {
    if (!per_prev[static_cast<std::size_t>(c)].empty()) s.outgoing_gap(c) = median(per_prev[static_cast<std::size_t>(c)]);
    if (!per_next[static_cast<std::size_t>(c)].empty()) s.incoming_gap(c) = median(per_next[static_cast<std::size_t>(c)]);
  }
  s.next_by_prev = Eigen::VectorXi::Zero(num_marks);
  s.row_counts = Eigen::VectorXi::Zero(num_marks);
  for (int i = 0; i < num_marks; ++i) {
    int best = 0;
    for (int j = 1; j < num_marks; ++j)
      if (trans(i, j) > trans(i, best)) best = j;
    s.next_by_prev(i) = best;
    s.row_counts(i) = trans.row(i).sum();
  }
  for (auto& [key, gaps] : edge_gaps) s.edge_gap[key] = median(std::move(gaps));
  return s;
}

EventPrediction predict_next(const EventSequence& history, const SyntheticPriorStats& stats) {
  const auto& th = history.times;
  const auto& mh = history.marks;
  int num_marks = stats.num_marks;
  std::size_t ln = mh.size();
  int lm = ln > 0 ? mh.back() : -1;

  int nm;
  if (ln >= 2) {
    auto key = std::make_pair(mh[ln - 2], lm);
    auto it = stats.pair_next.find(key);
    if (it != stats.pair_next.end() && it->second.sum() > 0)
      nm = argmax(it->second);
    else if (lm >= 0 && lm < num_marks && stats.row_counts(lm) > 0)
      nm = stats.next_by_prev(lm);
    else
      nm = stats.majority_mark;
  } else if (ln == 1) {
    nm = (lm >= 0 && lm < num_marks && stats.row_counts(lm) > 0) ? stats.next_by_prev(lm)
                                                                 : stats.majority_mark;
  } else {
    nm = stats.majority_mark;
  }

  double predicted_time;
  if (!th.empty()) {
    double base = th.back();
    double dref;
    if (ln > 0 && lm >= 0 && lm < num_marks && nm >= 0 && nm < num_marks) {
      auto it = stats.edge_gap.find({lm, nm});
      dref = it != stats.edge_gap.end() ? it->second
                                        : 0.5 * (stats.outgoing_gap(lm) + stats.incoming_gap(nm));
    } else {
      dref = stats.global_gap;
    }
    if (th.size() > 1) {
      std::size_t k = std::min<std::size_t>(5, th.size());
      std::vector<double> local;
      for (std::size_t j = th.size() - k; j + 1 < th.size(); ++j) local.push_back(th[j + 1] - th[j]);
      double dloc = median(std::move(local));
      double alpha = th.size() >= 3 ? 0.65 : 0.5;
      predicted_time = base + alpha * dloc + (1.0 - alpha) * dref;
    } else {
      predicted_time = base + dref;
    }
  } else {
    predicted_time = stats.global_gap;
  }
  return {predicted_time, nm};
}

}  // namespace zsinfer::tpp

#include "zsinfer/mjp_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "zsinfer/errors.hpp"

namespace zsinfer {

namespace {

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  std::sort(v.begin(), v.end());
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

MjpEstimate estimate_mjp_parameters(const MjpObservationSet& obs) {
  const int k = obs.n_states;
  const int paths = static_cast<int>(obs.num_paths());

  bool any_valid = false;
  for (int p = 0; p < paths; ++p)
    if (obs.seq_lengths(p) > 0) any_valid = true;
  if (!any_valid) {
    return {RateMatrix(Eigen::MatrixXd::Zero(k, k)), ProbVector::uniform(k), 1.0};
  }

  // Initial distribution: first observations with a uniform pseudo-count,
  // second observations at half weight.
  Eigen::VectorXd counts = Eigen::VectorXd::Ones(k);
  for (int p = 0; p < paths; ++p)
    if (obs.seq_lengths(p) > 0) counts(obs.values(p, 0)) += 1.0;
  for (int p = 0; p < paths; ++p)
    if (obs.seq_lengths(p) > 1) counts(obs.values(p, 1)) += 0.5;
  const Eigen::VectorXd init = counts / counts.sum();

  // Typical observation spacing: median of the positive grid differences.
  std::vector<double> pos_dts;
  for (int p = 0; p < paths; ++p)
    for (int j = 0; j + 1 < obs.seq_lengths(p); ++j) {
      const double dt = obs.grid(p, j + 1) - obs.grid(p, j);
      if (dt > 0.0) pos_dts.push_back(dt);
    }
  double typical_dt = pos_dts.empty() ? 1.0 : median_of(std::move(pos_dts));
  typical_dt = std::max(1e-8, typical_dt);

  // Exposure per state (interval lengths capped at 2*typical_dt, plus a
  // right-censoring half spacing for each path's final state) and filtered
  // change counts with recency-weighted destinations.
  Eigen::VectorXd exposure = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd changes = Eigen::VectorXd::Zero(k);
  Eigen::MatrixXd dest = Eigen::MatrixXd::Zero(k, k);
  for (int p = 0; p < paths; ++p) {
    const int len = obs.seq_lengths(p);
    for (int j = 0; j + 1 < len; ++j) {
      const int cur = obs.values(p, j);
      const int nxt = obs.values(p, j + 1);
      const double dt = obs.grid(p, j + 1) - obs.grid(p, j);
      exposure(cur) += std::min(dt, 2.0 * typical_dt);
      if (cur != nxt && dt > 0.02 * typical_dt) {
        changes(cur) += 1.0;
        dest(cur, nxt) += std::exp(-dt / typical_dt);
      }
    }
    if (len > 0) exposure(obs.values(p, len - 1)) += 0.5 * typical_dt;
  }

  // Exit hazards, clipped to a sane range in units of 1/typical_dt.
  Eigen::VectorXd alpha(k);
  for (int i = 0; i < k; ++i) {
    double a = (changes(i) + 0.1) / (exposure(i) + 0.25 * typical_dt);
    a = std::min(std::max(a, 1e-8 / typical_dt), 10.0 / typical_dt);
    alpha(i) = a;
  }

  // Destination probabilities: smoothed counts, zero diagonal, rows
  // normalized (a zero row stays zero).
  Eigen::MatrixXd p_off =
      dest.array() + 0.05 / static_cast<double>(std::max(1, k - 1));
  p_off.diagonal().setZero();
  for (int i = 0; i < k; ++i) {
    const double row_sum = p_off.row(i).sum();
    if (row_sum != 0.0) p_off.row(i) /= row_sum;
  }

  Eigen::MatrixXd q = alpha.asDiagonal() * p_off;
  q.diagonal().setZero();
  q.diagonal() = -q.rowwise().sum();

  return {RateMatrix(std::move(q)), ProbVector(init), typical_dt};
}

DfrParameters extract_dfr_parameters(const RateMatrix& q) {
  if (q.num_states() != 6)
    throw DataError("flashing-ratchet extraction requires a 6-state generator, got " +
                    std::to_string(q.num_states()));

  // No-intercept least squares of -2*ln(q(i,j)) against (j - i) over the
  // on-sector off-diagonals.
  double sxy = 0.0, sxx = 0.0;
  int used = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      const double entry = q(i, j);
      if (!(entry > 0.0)) continue;
      const double x = static_cast<double>(j - i);
      sxy += x * (-2.0 * std::log(entry));
      sxx += x * x;
      ++used;
    }
  if (used == 0) throw DataError("degenerate on-sector");

  double r_sum = 0.0;
  for (int i = 0; i < 3; ++i) r_sum += q(i, i + 3) + q(i + 3, i);

  double b_sum = 0.0;
  for (int i = 3; i < 6; ++i)
    for (int j = 3; j < 6; ++j)
      if (i != j) b_sum += q(i, j);

  return {sxy / sxx, r_sum / 6.0, b_sum / 6.0};
}

double cross_entropy(const Eigen::VectorXd& p_true, const Eigen::VectorXd& p_pred) {
  if (p_true.size() != p_pred.size())
    throw DataError("cross-entropy inputs have lengths " +
                    std::to_string(p_true.size()) + " and " +
                    std::to_string(p_pred.size()));
  double ce = 0.0;
  for (Eigen::Index i = 0; i < p_true.size(); ++i)
    ce -= p_true(i) * std::log(std::max(p_pred(i), 1e-12));
  return ce;
}

double mjp_fitness(const MjpEstimate& pred, const Eigen::MatrixXd& truth_q,
                   const Eigen::VectorXd& truth_init) {
  const int k = pred.q.num_states();
  if (truth_q.rows() != k || truth_q.cols() != k || truth_init.size() != k)
    throw DataError("fitness inputs disagree on the number of states");
  const double ce = cross_entropy(truth_init, pred.init.probs());
  double sq = 0.0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      if (i == j) continue;
      const double d = pred.q(i, j) - truth_q(i, j);
      sq += d * d;
    }
  const int off_count = k * (k - 1);
  const double rmse = off_count > 0 ? std::sqrt(sq / off_count) : 0.0;
  return -(ce + rmse);
}

}  // namespace zsinfer

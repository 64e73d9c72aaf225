#pragma once

#include <Eigen/Dense>

#include "zsinfer/types.hpp"

namespace zsinfer {

// Result of the single-pass generator estimator. typical_dt is the time
// scale inferred from the observation grid (median positive spacing) and is
// kept as a diagnostic.
struct MjpEstimate {
  RateMatrix q;
  ProbVector init;
  double typical_dt = 1.0;
};

// Estimates a generator matrix and initial distribution from discretely
// observed paths of a continuous-time Markov jump process.
//
// The initial distribution blends first-observation counts (with a uniform
// pseudo-count of 1 per state) and half-weighted second-observation counts.
// Exit hazards divide smoothed change counts by smoothed state exposure,
// where each interval's exposure is capped at twice the typical spacing and
// each path's final state earns half a typical spacing of right-censoring
// exposure. Destination probabilities are recency-weighted transition counts,
// smoothed and row-normalized with zero diagonal. A batch with no nonempty
// path yields the zero generator and the uniform distribution.
MjpEstimate estimate_mjp_parameters(const MjpObservationSet& obs);

// Potential depth, switching rate, and off-sector hop rate of a flashing
// ratchet generator.
struct DfrParameters {
  double v = 0.0;
  double r = 0.0;
  double b = 0.0;
};

// Recovers (V, r, b) from a 6-state generator laid out with the three
// potential-on states first and the three potential-off states last.
// V comes from a no-intercept least-squares fit of -2*ln(q(i,j)) against
// (j - i) over the on-sector off-diagonals (nonpositive entries are excluded
// from the fit; all six excluded is an error). r and b are the means of the
// six switching entries and the six off-sector off-diagonals.
DfrParameters extract_dfr_parameters(const RateMatrix& q);

// Cross-entropy -sum_i p_true[i] * ln(max(p_pred[i], 1e-12)), natural log.
double cross_entropy(const Eigen::VectorXd& p_true, const Eigen::VectorXd& p_pred);

// Estimation quality score: the negated sum of the initial-distribution
// cross-entropy and the RMSE over the K(K-1) off-diagonal generator entries.
// Higher is better; exact recovery of a deterministic-start process scores 0.
double mjp_fitness(const MjpEstimate& pred, const Eigen::MatrixXd& truth_q,
                   const Eigen::VectorXd& truth_init);

}  // namespace zsinfer

#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace zsinfer {

// Outcome of checking a value against its type invariants. Violations are
// data, not exceptions; callers that require validity raise DataError.
struct ValidationResult {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

using BoolGrid = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// One marked event sequence: strictly increasing times with integer marks.
struct EventSequence {
  std::vector<double> times;
  std::vector<int> marks;

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }
};

// A set of sequences over a shared mark alphabet [0, num_marks).
struct EventDataset {
  int num_marks = 0;
  std::vector<EventSequence> sequences;
};

// Discretely observed jump-process paths. Row p of grid/values holds the
// observation times and states of path p; only the first seq_lengths[p]
// entries are valid. Times are nondecreasing within each valid prefix and
// states lie in [0, n_states).
struct MjpObservationSet {
  Eigen::MatrixXd grid;        // paths x max_len
  Eigen::MatrixXi values;      // paths x max_len
  Eigen::VectorXi seq_lengths; // valid prefix length per path
  int n_states = 0;

  Eigen::Index num_paths() const { return grid.rows(); }
  Eigen::Index max_len() const { return grid.cols(); }
};

// Infinitesimal generator of a continuous-time Markov chain. Construction
// enforces: square, finite entries, off-diagonals >= 0, row sums within
// 1e-9 * K * max|entry| of zero.
class RateMatrix {
 public:
  explicit RateMatrix(Eigen::MatrixXd entries);

  int num_states() const { return static_cast<int>(entries_.rows()); }
  const Eigen::MatrixXd& entries() const { return entries_; }
  double operator()(int i, int j) const { return entries_(i, j); }

 private:
  Eigen::MatrixXd entries_;
};

// Probability vector: entries >= 0 summing to 1 within 1e-9. Construction
// clamps negative round-off above -1e-12 to zero.
class ProbVector {
 public:
  explicit ProbVector(Eigen::VectorXd probs);
  static ProbVector uniform(int k);

  int size() const { return static_cast<int>(probs_.size()); }
  const Eigen::VectorXd& probs() const { return probs_; }
  double operator[](int i) const { return probs_(i); }

 private:
  Eigen::VectorXd probs_;
};

// Piecewise-constant sample path. states[i] holds on [jump_times[i],
// jump_times[i+1]), with jump_times[0] == 0; the final state holds to the
// horizon.
struct Trajectory {
  std::vector<double> jump_times;
  std::vector<int> states;
  double horizon = 0.0;
};

// Multichannel series on a shared nondecreasing time grid. values uses NaN
// as the in-memory missing sentinel; mask is true where a value is missing
// or held out for scoring.
struct TimeSeriesPanel {
  std::vector<double> times;  // length T
  Eigen::MatrixXd values;     // T x D
  BoolGrid mask;              // T x D

  Eigen::Index num_steps() const { return values.rows(); }
  Eigen::Index num_channels() const { return values.cols(); }
};

ValidationResult validate_event_sequence(const EventSequence& seq, int num_marks);
ValidationResult validate_observation_set(const MjpObservationSet& obs);
ValidationResult validate_generator(const Eigen::MatrixXd& q);
ValidationResult validate_probability(const Eigen::VectorXd& p);
ValidationResult validate_panel(const TimeSeriesPanel& panel);

}  // namespace zsinfer

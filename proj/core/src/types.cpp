#include "zsinfer/types.hpp"

#include <cmath>
#include <sstream>

#include "zsinfer/errors.hpp"

namespace zsinfer {

namespace {

std::string at_index(const char* what, Eigen::Index i) {
  std::ostringstream os;
  os << what << " at index " << i;
  return os.str();
}

void throw_if_invalid(const ValidationResult& r, const char* type_name) {
  if (r.ok()) return;
  std::ostringstream os;
  os << type_name << " invariant violated:";
  for (const auto& v : r.violations) os << " [" << v << "]";
  throw DataError(os.str());
}

}  // namespace

ValidationResult validate_event_sequence(const EventSequence& seq, int num_marks) {
  ValidationResult r;
  if (seq.times.size() != seq.marks.size()) {
    r.violations.push_back("times and marks differ in length");
    return r;
  }
  for (std::size_t i = 0; i < seq.times.size(); ++i) {
    if (!std::isfinite(seq.times[i])) r.violations.push_back(at_index("non-finite time", static_cast<Eigen::Index>(i)));
    if (i > 0 && !(seq.times[i] > seq.times[i - 1]))
      r.violations.push_back(at_index("times not strictly increasing", static_cast<Eigen::Index>(i)));
    if (seq.marks[i] < 0 || seq.marks[i] >= num_marks)
      r.violations.push_back(at_index("mark outside [0, num_marks)", static_cast<Eigen::Index>(i)));
  }
  return r;
}

ValidationResult validate_observation_set(const MjpObservationSet& obs) {
  ValidationResult r;
  if (obs.n_states < 1) r.violations.push_back("n_states must be at least 1");
  if (obs.values.rows() != obs.grid.rows() || obs.values.cols() != obs.grid.cols())
    r.violations.push_back("grid and values shapes differ");
  if (obs.seq_lengths.size() != obs.grid.rows())
    r.violations.push_back("seq_lengths does not match the number of paths");
  if (!r.ok()) return r;
  for (Eigen::Index p = 0; p < obs.grid.rows(); ++p) {
    int len = obs.seq_lengths(p);
    if (len < 0 || len > obs.grid.cols()) {
      r.violations.push_back(at_index("seq_length outside [0, max_len]", p));
      continue;
    }
    for (int j = 0; j < len; ++j) {
      if (!std::isfinite(obs.grid(p, j))) r.violations.push_back(at_index("non-finite observation time in path", p));
      if (j > 0 && obs.grid(p, j) < obs.grid(p, j - 1))
        r.violations.push_back(at_index("observation times decrease in path", p));
      if (obs.values(p, j) < 0 || obs.values(p, j) >= obs.n_states)
        r.violations.push_back(at_index("state outside [0, n_states) in path", p));
    }
  }
  return r;
}

ValidationResult validate_generator(const Eigen::MatrixXd& q) {
  ValidationResult r;
  if (q.rows() != q.cols()) {
    r.violations.push_back("matrix is not square");
    return r;
  }
  if (q.rows() == 0) {
    r.violations.push_back("matrix is empty");
    return r;
  }
  double max_abs = 0.0;
  for (Eigen::Index i = 0; i < q.rows(); ++i)
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
      if (!std::isfinite(q(i, j))) {
        r.violations.push_back("non-finite entry");
        return r;
      }
      max_abs = std::max(max_abs, std::abs(q(i, j)));
    }
  double tol = 1e-9 * static_cast<double>(q.rows()) * std::max(max_abs, 1.0);
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    for (Eigen::Index j = 0; j < q.cols(); ++j)
      if (i != j && q(i, j) < 0.0) r.violations.push_back(at_index("negative off-diagonal in row", i));
    double row_sum = q.row(i).sum();
    if (std::abs(row_sum) > tol) r.violations.push_back(at_index("row sum not zero within tolerance, row", i));
  }
  return r;
}

ValidationResult validate_probability(const Eigen::VectorXd& p) {
  ValidationResult r;
  if (p.size() == 0) {
    r.violations.push_back("vector is empty");
    return r;
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p(i))) {
      r.violations.push_back(at_index("non-finite entry", i));
      return r;
    }
    if (p(i) < -1e-12) r.violations.push_back(at_index("negative entry", i));
    sum += p(i);
  }
  if (std::abs(sum - 1.0) > 1e-9) r.violations.push_back("entries do not sum to 1 within 1e-9");
  return r;
}

ValidationResult validate_panel(const TimeSeriesPanel& panel) {
  ValidationResult r;
  if (static_cast<Eigen::Index>(panel.times.size()) != panel.values.rows())
    r.violations.push_back("times length does not match the number of rows");
  if (panel.mask.rows() != panel.values.rows() || panel.mask.cols() != panel.values.cols())
    r.violations.push_back("mask shape does not match values");
  for (std::size_t i = 0; i < panel.times.size(); ++i) {
    if (!std::isfinite(panel.times[i])) r.violations.push_back(at_index("non-finite time", static_cast<Eigen::Index>(i)));
    if (i > 0 && panel.times[i] < panel.times[i - 1])
      r.violations.push_back(at_index("times decrease", static_cast<Eigen::Index>(i)));
  }
  return r;
}

RateMatrix::RateMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
  throw_if_invalid(validate_generator(entries_), "RateMatrix");
}

ProbVector::ProbVector(Eigen::VectorXd probs) : probs_(std::move(probs)) {
  throw_if_invalid(validate_probability(probs_), "ProbVector");
  for (Eigen::Index i = 0; i < probs_.size(); ++i)
    if (probs_(i) < 0.0) probs_(i) = 0.0;
}

ProbVector ProbVector::uniform(int k) {
  return ProbVector(Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k)));
}

}  // namespace zsinfer

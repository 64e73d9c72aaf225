#pragma once

#include <Eigen/Dense>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "zsinfer/types.hpp"

namespace zsinfer::tpp {

// Context summary for the recency-mixture predictor ("evil" variant).
struct ContextStats {
  int num_marks = 0;
  double global_gap = 1.0;                // median inter-event gap, 1.0 when no gaps exist
  int majority_mark = 0;
  Eigen::VectorXd mean_gap_by_prev;       // mean gap after each mark, global_gap where unseen
  Eigen::VectorXi gap_count_by_prev;      // number of gaps behind each mean
  Eigen::VectorXd mark_counts;            // total mark occurrences in the context pool
  Eigen::MatrixXd smoothed_transitions;   // add-one transition rows, normalized
};

// Context summary for the transition-hierarchy predictor ("synthetic-prior"
// variant): first- and second-order mark transitions plus gap medians per
// mark and per directed edge.
struct SyntheticPriorStats {
  int num_marks = 0;
  double global_gap = 1.0;
  int majority_mark = 0;
  Eigen::VectorXd outgoing_gap;           // median gap leaving each mark
  Eigen::VectorXd incoming_gap;           // median gap arriving at each mark
  Eigen::VectorXi next_by_prev;           // add-one argmax of each transition row
  Eigen::VectorXi row_counts;             // outgoing transition counts per mark
  std::map<std::pair<int, int>, double> edge_gap;
  std::map<std::pair<int, int>, Eigen::VectorXi> pair_next;
};

ContextStats build_context_stats(std::span<const EventSequence> context, int num_marks);
SyntheticPriorStats build_synthetic_prior_stats(std::span<const EventSequence> context, int num_marks);

struct EventPrediction {
  double time = 0.0;
  int mark = 0;
};

// Predict the next event after the given history. An empty history yields
// the global gap as the absolute next time. Histories must be valid event
// sequences over the stats' mark alphabet.
EventPrediction predict_next(const EventSequence& history, const ContextStats& stats);
EventPrediction predict_next(const EventSequence& history, const SyntheticPriorStats& stats);

// Unnormalized mark scores behind predict_next for the recency-mixture
// variant. The predicted mark is the first argmax of this vector.
Eigen::VectorXd mark_scores(const EventSequence& history, const ContextStats& stats);

// Closed-loop rollout: predict one event, append it to the working history,
// repeat horizon times. Returns only the appended events.
template <typename Stats>
EventSequence rollout(const EventSequence& prefix, const Stats& stats, int horizon) {
  EventSequence working = prefix;
  EventSequence out;
  out.times.reserve(static_cast<std::size_t>(horizon));
  out.marks.reserve(static_cast<std::size_t>(horizon));
  for (int i = 0; i < horizon; ++i) {
    EventPrediction p = predict_next(working, stats);
    out.times.push_back(p.time);
    out.marks.push_back(p.mark);
    working.times.push_back(p.time);
    working.marks.push_back(p.mark);
  }
  return out;
}

}  // namespace zsinfer::tpp

#pragma once

#include <span>
#include <vector>

#include "zsinfer/types.hpp"

namespace zsinfer {

// Mark-prediction accuracy: per-sequence fraction of positions whose
// predicted mark equals the true mark, averaged over sequences.
// pred[j] and truth[j] must have equal, nonzero length.
double accuracy(std::span<const std::vector<int>> pred_marks,
                std::span<const std::vector<int>> truth_marks);

// RMSE over per-mark event counts: for each sequence the predicted and true
// mark-count vectors (length num_marks) are compared; the squared differences
// are summed per sequence, averaged over sequences, then rooted. The paired
// windows must both be nonempty but may differ in length.
double rmse_counts(std::span<const std::vector<int>> pred_marks,
                   std::span<const std::vector<int>> truth_marks,
                   int num_marks);

// RMSE over inter-event gaps. Gap i of a sequence is times[i] - times[i-1];
// the first gap is anchored at the corresponding entry of history_last_times
// (the last observed time before the prediction window, 0.0 for an empty
// history). Per-sequence mean squared gap error, averaged over sequences,
// then rooted.
double rmse_dt(std::span<const std::vector<double>> pred_times,
               std::span<const std::vector<double>> truth_times,
               std::span<const double> history_last_times);

// Symmetric mean absolute percentage error on inter-event gaps, in percent.
// Each position contributes 2|d - d_hat| / (|d| + |d_hat|); a position whose
// denominator is zero contributes 0. Anchoring as in rmse_dt. Result lies in
// [0, 200].
double smape_dt(std::span<const std::vector<double>> pred_times,
                std::span<const std::vector<double>> truth_times,
                std::span<const double> history_last_times);

// Alignment distance between two event sequences. Events may be matched only
// within the same mark, matchings are non-crossing in time order, a matched
// pair costs |t_i - t_hat_j|, and every unmatched event costs del_cost.
// Computed independently per mark by dynamic programming and summed.
// del_cost must be positive.
double otd(const EventSequence& pred, const EventSequence& truth,
           double del_cost);

// Mean of otd over paired sequence lists.
double mean_otd(std::span<const EventSequence> pred,
                std::span<const EventSequence> truth, double del_cost);

}  // namespace zsinfer

#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "zsinfer/rng.hpp"
#include "zsinfer/types.hpp"

namespace zsinfer {

// Knobs for the hybrid imputer: gaps of at least large_gap_threshold missing
// steps attempt motif retrieval with a fully observed window of context_size
// points immediately before the gap; everything else falls back to
// interpolation. Both values must be at least 1.
struct ImputerConfig {
  int large_gap_threshold = 4;
  int context_size = 8;
};

struct IndexRange {
  Eigen::Index begin = 0;
  Eigen::Index end = 0;
};

// Maximal runs of true flags as half-open index ranges, ascending.
std::vector<IndexRange> detect_missing_blocks(std::span<const bool> missing);

// Fills every non-finite entry of one channel. An entirely missing channel
// becomes zeros. Qualifying gaps are filled by the earlier window whose
// context best matches the gap's own context in summed squared difference
// (ties keep the earliest start), level-shifted so the junction is exact;
// blocks are processed left to right and earlier fills are visible to later
// searches. Remaining missing entries are linearly interpolated against the
// timestamps, clamped to the nearest observed value beyond the observed
// range. Finite input entries are returned unchanged.
std::vector<double> impute_channel(std::span<const double> values,
                                   std::span<const double> times,
                                   const ImputerConfig& cfg = {});

// Applies impute_channel to each column of the panel independently.
Eigen::MatrixXd impute_panel(const TimeSeriesPanel& panel,
                             const ImputerConfig& cfg = {});

// Exactly round(fraction * T * D) cells chosen uniformly without
// replacement. fraction must lie in [0, 1).
BoolGrid pointwise_mask(Eigen::Index t, Eigen::Index d, double fraction,
                        Pcg32& rng);

// Centered contiguous block of round(fraction * T) indices (at least 1):
// start = floor((T - len) / 2). fraction must lie in (0, 1).
IndexRange window_mask(Eigen::Index t, double fraction);

// Mean absolute error over the cells where mask is true. An all-false mask
// leaves nothing to score and is an error.
double mae_on_mask(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth,
                   const BoolGrid& mask);

}  // namespace zsinfer

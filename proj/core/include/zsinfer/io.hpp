#pragma once

#include <filesystem>
#include <vector>

#include "zsinfer/types.hpp"

namespace zsinfer::io {

// Event datasets are JSON Lines: a header {"num_marks": K} followed by one
// {"times": [...], "marks": [...]} object per sequence. Loaders reject
// sequences that violate the EventSequence invariants, naming the line.
EventDataset load_event_dataset(const std::filesystem::path& path);
void save_event_dataset(const std::filesystem::path& path, const EventDataset& dataset);

// Jump-process datasets are JSON Lines: a header {"n_states": K} followed by
// one {"grid": [...], "states": [...]} object per path. Rows are padded to
// the longest path on load; writers emit only the valid prefix.
MjpObservationSet load_mjp_dataset(const std::filesystem::path& path);
void save_mjp_dataset(const std::filesystem::path& path, const MjpObservationSet& obs);

// Ground-truth sidecar for synthetic jump processes.
struct MjpTruth {
  Eigen::MatrixXd q;
  Eigen::VectorXd pi0;
};
MjpTruth load_mjp_truth(const std::filesystem::path& path);
void save_mjp_truth(const std::filesystem::path& path, const Eigen::MatrixXd& q, const Eigen::VectorXd& pi0);

// Panel files are JSON Lines with one panel per line:
// {"times": [...], "values": [[...]], "mask": [[...]]}. Missing values are
// null on disk and NaN in memory.
std::vector<TimeSeriesPanel> load_panels(const std::filesystem::path& path);
void save_panels(const std::filesystem::path& path, const std::vector<TimeSeriesPanel>& panels);

}  // namespace zsinfer::io

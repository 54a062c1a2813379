#pragma once

#include <span>
#include <vector>

#include "gnids/baselines/decision_tree.hpp"
#include "gnids/flow_ingest.hpp"
#include "gnids/graph_builder.hpp"

namespace gnids {

/// Records with their class indices, partitioned into windows.
struct LabeledRecords {
  std::vector<RawFlowRecord> records;
  std::vector<int> labels;
  std::vector<WindowRange> windows;
  std::vector<int> window_ids;  ///< original window index of each entry in `windows`
};

/// Copies the selected windows into a fresh LabeledRecords with rebased ranges.
LabeledRecords select_windows(const LabeledRecords& all, std::span<const std::size_t> which);

/// One GraphSample per window, flows vectorized with `vectorize`.
std::vector<GraphSample> build_samples(const LabeledRecords& data, const Vectorizer& vectorize);

/// Every flow of every sample, in sample then flow order.
LabeledVectors flow_vectors(std::span<const GraphSample> samples, std::size_t class_count);

}  // namespace gnids

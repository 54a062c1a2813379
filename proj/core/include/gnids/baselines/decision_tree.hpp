#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gnids/gnn_model.hpp"
#include "gnids/rng.hpp"
#include "gnids/schema.hpp"

namespace gnids {

struct Id3Config {
  int max_depth = 20;
  std::size_t min_leaf = 5;
};

/// Flat node array; node 0 is the root. Internal nodes send x[feature] <=
/// threshold to `left`.
struct TreeNode {
  int feature = -1;  ///< -1 for a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<double> distribution;  ///< leaves only, sums to 1
  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

class DecisionTree {
 public:
  std::size_t class_count = 0;
  std::size_t feature_count = 0;
  std::vector<TreeNode> nodes;

  std::size_t leaf_index(std::span<const double> x) const;
  Prediction predict(std::span<const double> x) const;
  int depth() const;
  bool operator==(const DecisionTree&) const = default;
};

/// Training input: row-major vectors with integer labels in [0, classes).
struct LabeledVectors {
  std::vector<FlowFeatureVector> x;
  std::vector<int> y;
  std::size_t class_count = 0;
  std::size_t size() const { return y.size(); }
};

/// Information-gain tree over midpoint thresholds. Ties go to the lowest
/// feature index, then the lowest threshold.
DecisionTree train_id3(const LabeledVectors& data, const Id3Config& config);

/// Shared builder. `rows` may repeat (bootstrap). When `features_per_split`
/// is below the feature count, each split draws that many candidate features
/// from `rng`.
DecisionTree grow_tree(const LabeledVectors& data, std::vector<std::size_t> rows,
                       const Id3Config& config, std::size_t features_per_split, Rng* rng);

/// Entropy-based gain of splitting labels at `threshold` on feature `f`.
double information_gain(const LabeledVectors& data, std::span<const std::size_t> rows,
                        std::size_t f, double threshold);

nlohmann::json to_json(const DecisionTree& tree);
DecisionTree decision_tree_from_json(const nlohmann::json& j);

void save_tree(const DecisionTree& tree, const std::string& path);
DecisionTree load_tree(const std::string& path);

}  // namespace gnids

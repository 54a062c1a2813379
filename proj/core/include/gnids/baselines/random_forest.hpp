#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gnids/baselines/decision_tree.hpp"

namespace gnids {

struct ForestConfig {
  std::size_t tree_count = 50;
  /// Fraction of features drawn per split; <= 0 selects sqrt(F)/F.
  double feature_fraction = 0.0;
  bool bootstrap = true;
  Id3Config tree;
};

struct ForestModel {
  std::vector<DecisionTree> trees;
  std::vector<std::uint64_t> tree_seeds;
  double feature_fraction = 1.0;

  /// Majority vote of tree argmaxes; probabilities are vote shares, ties go
  /// to the lowest class index.
  Prediction predict(std::span<const double> x) const;
  bool operator==(const ForestModel&) const = default;
};

/// Features considered per split for a given fraction (at least 1).
std::size_t features_per_split(std::size_t feature_count, double fraction);

ForestModel train_random_forest(const LabeledVectors& data, const ForestConfig& config, Rng& rng);

void save_forest(const ForestModel& forest, const std::string& path);
ForestModel load_forest(const std::string& path);

}  // namespace gnids

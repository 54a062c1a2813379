#include "gnids/baselines/random_forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "gnids/error.hpp"
#include "gnids/model_io.hpp"

namespace gnids {

std::size_t features_per_split(std::size_t feature_count, double fraction) {
  if (fraction <= 0.0) fraction = std::sqrt(static_cast<double>(feature_count)) /
                                  static_cast<double>(feature_count);
  const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(feature_count)));
  return std::clamp<std::size_t>(k, 1, feature_count);
}

ForestModel train_random_forest(const LabeledVectors& data, const ForestConfig& config, Rng& rng) {
  if (config.tree_count < 1) throw UsageError("forest tree count must be >= 1");
  if (data.size() == 0) throw UsageError("cannot train on an empty dataset");
  const std::size_t f = data.x.front().size();
  ForestModel forest;
  forest.feature_fraction =
      config.feature_fraction > 0.0 ? config.feature_fraction
                                    : std::sqrt(static_cast<double>(f)) / static_cast<double>(f);
  const std::size_t per_split = features_per_split(f, forest.feature_fraction);
  for (std::size_t t = 0; t < config.tree_count; ++t) forest.tree_seeds.push_back(rng());

  for (std::size_t t = 0; t < config.tree_count; ++t) {
    Rng tree_rng(forest.tree_seeds[t]);
    std::vector<std::size_t> rows(data.size());
    if (config.bootstrap) {
      for (auto& r : rows) r = uniform_index(tree_rng, data.size());
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    forest.trees.push_back(grow_tree(data, std::move(rows), config.tree, per_split, &tree_rng));
  }
  return forest;
}

Prediction ForestModel::predict(std::span<const double> x) const {
  if (trees.empty()) throw UsageError("random forest is untrained");
  std::vector<double> votes(trees.front().class_count, 0.0);
  for (const auto& t : trees) votes[static_cast<std::size_t>(t.predict(x).label)] += 1.0;
  for (double& v : votes) v /= static_cast<double>(trees.size());
  return {argmax(votes), votes};
}

void save_forest(const ForestModel& forest, const std::string& path) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : forest.trees) trees.push_back(to_json(t));
  write_envelope(path, "random_forest",
                 {{"feature_fraction", forest.feature_fraction},
                  {"tree_seeds", forest.tree_seeds},
                  {"trees", std::move(trees)}});
}

ForestModel load_forest(const std::string& path) {
  auto doc = read_envelope(path, "random_forest");
  try {
    ForestModel f;
    f.feature_fraction = doc.at("feature_fraction").get<double>();
    f.tree_seeds = doc.at("tree_seeds").get<std::vector<std::uint64_t>>();
    for (const auto& t : doc.at("trees")) f.trees.push_back(decision_tree_from_json(t));
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw ChecksumError(path + ": malformed forest: " + e.what());
  }
}

}  // namespace gnids

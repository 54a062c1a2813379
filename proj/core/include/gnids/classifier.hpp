#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gnids/baselines/decision_tree.hpp"
#include "gnids/baselines/mlp.hpp"
#include "gnids/baselines/random_forest.hpp"
#include "gnids/gnn_model.hpp"
#include "gnids/metrics.hpp"

namespace gnids {

/// Per-flow classification of a whole graph. Flow-level baselines ignore
/// the topology and classify each flow from its own vector.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual std::string kind() const = 0;  ///< gnn, id3, rf, mlp
  virtual std::vector<Prediction> predict(const HostConnectionGraph& graph) const = 0;
  virtual void save(const std::string& path) const = 0;
};

class GnnClassifier final : public Classifier {
 public:
  explicit GnnClassifier(GnnModel model) : model_(std::move(model)) {}
  std::string kind() const override { return "gnn"; }
  std::vector<Prediction> predict(const HostConnectionGraph& graph) const override;
  void save(const std::string& path) const override { save_model(model_, path); }
  const GnnModel& model() const { return model_; }

 private:
  GnnModel model_;
};

class TreeClassifier final : public Classifier {
 public:
  explicit TreeClassifier(DecisionTree tree) : tree_(std::move(tree)) {}
  std::string kind() const override { return "id3"; }
  std::vector<Prediction> predict(const HostConnectionGraph& graph) const override;
  void save(const std::string& path) const override { save_tree(tree_, path); }
  const DecisionTree& tree() const { return tree_; }

 private:
  DecisionTree tree_;
};

class ForestClassifier final : public Classifier {
 public:
  explicit ForestClassifier(ForestModel forest) : forest_(std::move(forest)) {}
  std::string kind() const override { return "rf"; }
  std::vector<Prediction> predict(const HostConnectionGraph& graph) const override;
  void save(const std::string& path) const override { save_forest(forest_, path); }
  const ForestModel& forest() const { return forest_; }

 private:
  ForestModel forest_;
};

class MlpClassifier final : public Classifier {
 public:
  explicit MlpClassifier(MlpModel model) : model_(std::move(model)) {}
  std::string kind() const override { return "mlp"; }
  std::vector<Prediction> predict(const HostConnectionGraph& graph) const override;
  void save(const std::string& path) const override { save_mlp(model_, path); }
  const MlpModel& model() const { return model_; }

 private:
  MlpModel model_;
};

/// Dispatches on the envelope's kind field.
std::unique_ptr<Classifier> load_classifier(const std::string& path);

/// Flows pooled across samples into one confusion matrix. `loss` is the mean
/// of -log p(true class). Throws UsageError for an empty sample list.
Metrics evaluate(const Classifier& model, std::span<const GraphSample> samples,
                 std::size_t class_count);

}  // namespace gnids

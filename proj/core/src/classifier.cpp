#include "gnids/classifier.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "gnids/error.hpp"

namespace gnids {

std::vector<Prediction> GnnClassifier::predict(const HostConnectionGraph& graph) const {
  return gnids::predict(graph, model_);
}

std::vector<Prediction> TreeClassifier::predict(const HostConnectionGraph& graph) const {
  std::vector<Prediction> out;
  out.reserve(graph.flow_count());
  for (const auto& f : graph.flows) out.push_back(tree_.predict(f.features));
  return out;
}

std::vector<Prediction> ForestClassifier::predict(const HostConnectionGraph& graph) const {
  std::vector<Prediction> out;
  out.reserve(graph.flow_count());
  for (const auto& f : graph.flows) out.push_back(forest_.predict(f.features));
  return out;
}

std::vector<Prediction> MlpClassifier::predict(const HostConnectionGraph& graph) const {
  std::vector<FlowFeatureVector> xs;
  xs.reserve(graph.flow_count());
  for (const auto& f : graph.flows) xs.push_back(f.features);
  return model_.predict_batch(xs);
}

std::unique_ptr<Classifier> load_classifier(const std::string& path) {
  std::string kind;
  {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    try {
      kind = nlohmann::json::parse(in).value("kind", std::string());
    } catch (const nlohmann::json::parse_error& e) {
      throw ChecksumError(path + ": corrupted model file (" + e.what() + ")");
    }
  }
  if (kind == "gnn") return std::make_unique<GnnClassifier>(load_model(path));
  if (kind == "id3") return std::make_unique<TreeClassifier>(load_tree(path));
  if (kind == "random_forest") return std::make_unique<ForestClassifier>(load_forest(path));
  if (kind == "mlp") return std::make_unique<MlpClassifier>(load_mlp(path));
  throw UsageError(path + ": unknown model kind '" + kind + "'");
}

Metrics evaluate(const Classifier& model, std::span<const GraphSample> samples,
                 std::size_t class_count) {
  if (samples.empty()) throw UsageError("evaluate: no samples");
  ConfusionMatrix cm(class_count);
  double loss = 0.0;
  for (const auto& s : samples) {
    const auto preds = model.predict(s.graph);
    for (std::size_t i = 0; i < preds.size(); ++i) {
      const int y = s.graph.flows[i].label;
      cm.add(y, preds[i].label);
      loss -= std::log(std::max(preds[i].probabilities[static_cast<std::size_t>(y)], 1e-300));
    }
  }
  Metrics m = compute_metrics(cm);
  if (cm.total() > 0) m.loss = loss / static_cast<double>(cm.total());
  return m;
}

}  // namespace gnids

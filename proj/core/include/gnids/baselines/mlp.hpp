#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gnids/baselines/decision_tree.hpp"
#include "gnids/optim.hpp"

namespace gnids {

struct MlpConfig {
  std::size_t hidden1 = 128;
  std::size_t hidden2 = 64;
  int epochs = 20;
  std::size_t batch_size = 256;
  AdamConfig adam;
};

/// in -> hidden1 -> hidden2 -> C, ReLU on the hidden layers.
struct MlpModel {
  std::size_t feature_count = 0;
  std::size_t class_count = 0;
  ParameterStore params;  ///< group "mlp": w1 b1 w2 b2 w3 b3

  Var logits(Tape& tape, const std::vector<Var>& vars, const Tensor& x) const;
  Tensor logits(const Tensor& x) const;
  Prediction predict(std::span<const double> x) const;
  std::vector<Prediction> predict_batch(const std::vector<FlowFeatureVector>& xs) const;
  bool operator==(const MlpModel&) const = default;
};

MlpModel make_mlp(std::size_t feature_count, std::size_t class_count, const MlpConfig& config,
                  Rng& rng);

/// Shuffled mini-batches, mean cross-entropy, Adam. `history` receives the
/// mean training loss of each epoch. Non-finite values raise TrainingDiverged.
MlpModel train_mlp(const LabeledVectors& data, const MlpConfig& config, Rng& rng,
                   std::vector<double>* history = nullptr);

/// Rows of `xs` stacked into a [n x F] tensor.
Tensor stack_rows(const std::vector<FlowFeatureVector>& xs);

void save_mlp(const MlpModel& model, const std::string& path);
MlpModel load_mlp(const std::string& path);

}  // namespace gnids

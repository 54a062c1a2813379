#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gnids/graph_builder.hpp"
#include "gnids/layers.hpp"
#include "gnids/rng.hpp"
#include "gnids/tape.hpp"

namespace gnids {

struct GnnConfig {
  std::size_t feature_count = 0;  ///< k+1, length of every flow feature vector
  std::size_t hidden_dim = 128;   ///< n
  int iterations = 8;             ///< T
  std::size_t message_hidden = 128;
  std::size_t readout_hidden1 = 128;
  std::size_t readout_hidden2 = 64;
  std::size_t class_count = 0;

  /// Throws ConfigError listing every violated field.
  void validate() const;
  bool operator==(const GnnConfig&) const = default;
};

nlohmann::json to_json(const GnnConfig& c);
GnnConfig gnn_config_from_json(const nlohmann::json& j);

struct GnnModel {
  GnnConfig config;
  ParameterStore params;  ///< groups msg_sf, msg_fd, upd_h, upd_f, readout
};

/// Glorot-uniform weights, zero biases.
GnnModel make_gnn_model(const GnnConfig& config, Rng& rng);

/// Index lists derived from a graph once and reused by every iteration.
struct MessagePlan {
  std::size_t host_count = 0;
  std::size_t node_count = 0;
  // Per edge type, one entry per message direction (two per edge).
  std::vector<std::uint32_t> sf_receiver, sf_sender;
  std::vector<std::uint32_t> fd_receiver, fd_sender;
  /// Reorders [sf messages; fd messages] by (receiver, sender).
  std::vector<std::uint32_t> order;
  std::vector<std::uint32_t> segment;  ///< receiver of each reordered message
};

MessagePlan make_message_plan(const HostConnectionGraph& graph);

struct HiddenStates {
  Tensor states;  ///< [node_count x n], canonical node order
  int t = 0;
};

/// Flows get their features zero-padded to n, hosts get all ones. Throws
/// ConfigError when a feature vector is longer than n.
HiddenStates init_hidden_states(const HostConnectionGraph& graph, const GnnConfig& config);

/// One message-passing iteration. Throws UsageError when states.t >= T.
HiddenStates message_pass(const HiddenStates& states, const HostConnectionGraph& graph,
                          const GnnModel& model);

/// Taped building blocks; `params` are the store entries bound on `tape`.
Var message_pass(Tape& tape, Var states, const MessagePlan& plan, const std::vector<Var>& params,
                 const GnnConfig& config);
Var forward_logits(Tape& tape, const HostConnectionGraph& graph, const std::vector<Var>& params,
                   const GnnConfig& config);

/// Per-flow logits [flow_count x C].
Tensor forward(const HostConnectionGraph& graph, const GnnModel& model);

struct Prediction {
  int label = 0;
  std::vector<double> probabilities;
};

/// Argmax of each row, ties to the lowest index.
int argmax(std::span<const double> row);
std::vector<Prediction> predictions_from_logits(const Tensor& logits);
std::vector<Prediction> predict(const HostConnectionGraph& graph, const GnnModel& model);

/// Versioned, checksummed JSON envelope; bit-exact parameter round trip.
void save_model(const GnnModel& model, const std::string& path);
GnnModel load_model(const std::string& path);

}  // namespace gnids

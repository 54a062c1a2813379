#include "gnids/gnn_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "gnids/error.hpp"
#include "gnids/model_io.hpp"

namespace gnids {

namespace {

// Store layout; make_gnn_model adds parameters in exactly this order.
constexpr std::size_t kMsgSf = 0;
constexpr std::size_t kMsgFd = 4;
constexpr std::size_t kUpdH = 8;
constexpr std::size_t kUpdF = 17;
constexpr std::size_t kReadout = 26;
constexpr std::size_t kParamCount = 32;

Tensor glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t(fan_in, fan_out);
  for (double& v : t.data()) v = (2.0 * uniform01(rng) - 1.0) * limit;
  return t;
}

void add_gru(ParameterStore& p, const std::string& group, std::size_t in, std::size_t n,
             Rng& rng) {
  for (const char* gate : {"z", "r", "c"}) {
    p.add(group, std::string("w_") + gate, glorot(in, n, rng));
    p.add(group, std::string("u_") + gate, glorot(n, n, rng));
    p.add(group, std::string("b_") + gate, Tensor(std::vector<std::size_t>{n}, 0.0));
  }
}

GruWeights gru_at(const std::vector<Var>& v, std::size_t base) {
  return {v[base], v[base + 1], v[base + 2], v[base + 3], v[base + 4],
          v[base + 5], v[base + 6], v[base + 7], v[base + 8]};
}

Var typed_messages(Var h, const std::vector<Var>& v, std::size_t base, std::size_t n,
                   const std::vector<std::uint32_t>& receiver,
                   const std::vector<std::uint32_t>& sender) {
  // [h_recv || h_send] W1 == h_recv W1[:n] + h_send W1[n:]
  Var w1 = v[base];
  Var p = matmul(h, slice_rows(w1, 0, n));
  Var q = matmul(h, slice_rows(w1, n, 2 * n));
  Var pre = add(gather_rows(p, receiver), gather_rows(q, sender));
  Var hidden = relu(add_bias(pre, v[base + 1]));
  return dense(hidden, v[base + 2], v[base + 3], Activation::ReLU);
}

}  // namespace

void GnnConfig::validate() const {
  std::vector<std::string> bad;
  if (feature_count < 1) bad.push_back("gnn.feature_count must be >= 1");
  if (hidden_dim < 1) bad.push_back("gnn.hidden_dim must be >= 1");
  if (feature_count > hidden_dim) {
    bad.push_back("gnn.hidden_dim (" + std::to_string(hidden_dim) +
                  ") must be >= feature count (" + std::to_string(feature_count) + ")");
  }
  if (iterations < 1) bad.push_back("gnn.iterations must be >= 1");
  if (message_hidden < 1) bad.push_back("gnn.message_hidden must be >= 1");
  if (readout_hidden1 < 1) bad.push_back("gnn.readout_hidden1 must be >= 1");
  if (readout_hidden2 < 1) bad.push_back("gnn.readout_hidden2 must be >= 1");
  if (class_count < 1) bad.push_back("gnn.class_count must be >= 1");
  if (!bad.empty()) throw ConfigError(std::move(bad));
}

nlohmann::json to_json(const GnnConfig& c) {
  return {{"feature_count", c.feature_count},     {"hidden_dim", c.hidden_dim},
          {"iterations", c.iterations},           {"message_hidden", c.message_hidden},
          {"readout_hidden1", c.readout_hidden1}, {"readout_hidden2", c.readout_hidden2},
          {"class_count", c.class_count}};
}

GnnConfig gnn_config_from_json(const nlohmann::json& j) {
  GnnConfig c;
  c.feature_count = j.at("feature_count").get<std::size_t>();
  c.hidden_dim = j.at("hidden_dim").get<std::size_t>();
  c.iterations = j.at("iterations").get<int>();
  c.message_hidden = j.at("message_hidden").get<std::size_t>();
  c.readout_hidden1 = j.at("readout_hidden1").get<std::size_t>();
  c.readout_hidden2 = j.at("readout_hidden2").get<std::size_t>();
  c.class_count = j.at("class_count").get<std::size_t>();
  c.validate();
  return c;
}

GnnModel make_gnn_model(const GnnConfig& config, Rng& rng) {
  config.validate();
  GnnModel m;
  m.config = config;
  const std::size_t n = config.hidden_dim;
  const std::size_t mh = config.message_hidden;
  for (const char* group : {"msg_sf", "msg_fd"}) {
    m.params.add(group, "w1", glorot(2 * n, mh, rng));
    m.params.add(group, "b1", Tensor(std::vector<std::size_t>{mh}, 0.0));
    m.params.add(group, "w2", glorot(mh, n, rng));
    m.params.add(group, "b2", Tensor(std::vector<std::size_t>{n}, 0.0));
  }
  add_gru(m.params, "upd_h", n, n, rng);
  add_gru(m.params, "upd_f", n, n, rng);
  m.params.add("readout", "w1", glorot(n, config.readout_hidden1, rng));
  m.params.add("readout", "b1", Tensor(std::vector<std::size_t>{config.readout_hidden1}, 0.0));
  m.params.add("readout", "w2", glorot(config.readout_hidden1, config.readout_hidden2, rng));
  m.params.add("readout", "b2", Tensor(std::vector<std::size_t>{config.readout_hidden2}, 0.0));
  m.params.add("readout", "w3", glorot(config.readout_hidden2, config.class_count, rng));
  m.params.add("readout", "b3", Tensor(std::vector<std::size_t>{config.class_count}, 0.0));
  return m;
}

MessagePlan make_message_plan(const HostConnectionGraph& graph) {
  MessagePlan plan;
  plan.host_count = graph.host_count();
  plan.node_count = graph.node_count();
  for (const auto& e : graph.edges) {
    auto& recv = e.type == EdgeType::SrcToFlow ? plan.sf_receiver : plan.fd_receiver;
    auto& send = e.type == EdgeType::SrcToFlow ? plan.sf_sender : plan.fd_sender;
    recv.push_back(e.a);
    send.push_back(e.b);
    recv.push_back(e.b);
    send.push_back(e.a);
  }
  std::vector<std::uint32_t> recv = plan.sf_receiver;
  recv.insert(recv.end(), plan.fd_receiver.begin(), plan.fd_receiver.end());
  std::vector<std::uint32_t> send = plan.sf_sender;
  send.insert(send.end(), plan.fd_sender.begin(), plan.fd_sender.end());
  plan.order.resize(recv.size());
  std::iota(plan.order.begin(), plan.order.end(), 0u);
  std::stable_sort(plan.order.begin(), plan.order.end(), [&](std::uint32_t x, std::uint32_t y) {
    return recv[x] != recv[y] ? recv[x] < recv[y] : send[x] < send[y];
  });
  plan.segment.reserve(plan.order.size());
  for (auto i : plan.order) plan.segment.push_back(recv[i]);
  return plan;
}

HiddenStates init_hidden_states(const HostConnectionGraph& graph, const GnnConfig& config) {
  const std::size_t n = config.hidden_dim;
  Tensor h(graph.node_count(), n, 0.0);
  for (std::size_t i = 0; i < graph.host_count(); ++i) {
    std::fill(h.row(i).begin(), h.row(i).end(), 1.0);
  }
  for (std::size_t f = 0; f < graph.flow_count(); ++f) {
    const auto& x = graph.flows[f].features;
    if (x.size() > n) {
      throw ConfigError({"gnn.hidden_dim (" + std::to_string(n) + ") is smaller than flow " +
                         std::to_string(f) + "'s feature length " + std::to_string(x.size())});
    }
    std::copy(x.begin(), x.end(), h.row(graph.flow_node(f)).begin());
  }
  return {std::move(h), 0};
}

Var message_pass(Tape& tape, Var states, const MessagePlan& plan, const std::vector<Var>& v,
                 const GnnConfig& config) {
  (void)tape;
  if (v.size() != kParamCount) throw UsageError("message_pass: unexpected parameter count");
  const std::size_t n = config.hidden_dim;
  Var m_sf = typed_messages(states, v, kMsgSf, n, plan.sf_receiver, plan.sf_sender);
  Var m_fd = typed_messages(states, v, kMsgFd, n, plan.fd_receiver, plan.fd_sender);
  const Var parts[] = {m_sf, m_fd};
  Var ordered = gather_rows(concat_rows(parts), plan.order);
  Var agg = segment_mean(ordered, plan.segment, plan.node_count);

  Var h_host = slice_rows(states, 0, plan.host_count);
  Var h_flow = slice_rows(states, plan.host_count, plan.node_count);
  Var a_host = slice_rows(agg, 0, plan.host_count);
  Var a_flow = slice_rows(agg, plan.host_count, plan.node_count);
  const Var next[] = {gru_cell(h_host, a_host, gru_at(v, kUpdH)),
                      gru_cell(h_flow, a_flow, gru_at(v, kUpdF))};
  return concat_rows(next);
}

Var forward_logits(Tape& tape, const HostConnectionGraph& graph, const std::vector<Var>& v,
                   const GnnConfig& config) {
  if (v.size() != kParamCount) throw UsageError("forward: unexpected parameter count");
  for (const auto& f : graph.flows) {
    if (f.features.size() != config.feature_count) {
      throw ShapeError("flow feature length " + std::to_string(f.features.size()) +
                       " does not match model feature count " +
                       std::to_string(config.feature_count));
    }
  }
  const MessagePlan plan = make_message_plan(graph);
  Var h = tape.constant(init_hidden_states(graph, config).states);
  for (int t = 0; t < config.iterations; ++t) h = message_pass(tape, h, plan, v, config);
  Var flows = slice_rows(h, plan.host_count, plan.node_count);
  Var r1 = dense(flows, v[kReadout], v[kReadout + 1], Activation::ReLU);
  Var r2 = dense(r1, v[kReadout + 2], v[kReadout + 3], Activation::ReLU);
  return dense(r2, v[kReadout + 4], v[kReadout + 5], Activation::None);
}

HiddenStates message_pass(const HiddenStates& states, const HostConnectionGraph& graph,
                          const GnnModel& model) {
  if (states.t >= model.config.iterations) {
    throw UsageError("message_pass: iteration " + std::to_string(states.t + 1) +
                     " exceeds T = " + std::to_string(model.config.iterations));
  }
  Tape tape(false);
  auto vars = bind(tape, model.params);
  Var h = tape.constant(states.states);
  Var out = message_pass(tape, h, make_message_plan(graph), vars, model.config);
  return {out.value(), states.t + 1};
}

Tensor forward(const HostConnectionGraph& graph, const GnnModel& model) {
  Tape tape(false);
  auto vars = bind(tape, model.params);
  return forward_logits(tape, graph, vars, model.config).value();
}

int argmax(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < row.size(); ++j) {
    if (row[j] > row[best]) best = j;
  }
  return static_cast<int>(best);
}

std::vector<Prediction> predictions_from_logits(const Tensor& logits) {
  Tensor probs = softmax_rows(logits);
  std::vector<Prediction> out;
  out.reserve(probs.rows());
  for (std::size_t r = 0; r < probs.rows(); ++r) {
    auto row = probs.row(r);
    out.push_back({argmax(logits.row(r)), {row.begin(), row.end()}});
  }
  return out;
}

std::vector<Prediction> predict(const HostConnectionGraph& graph, const GnnModel& model) {
  return predictions_from_logits(forward(graph, model));
}

void save_model(const GnnModel& model, const std::string& path) {
  write_envelope(path, "gnn",
                 {{"config", to_json(model.config)}, {"parameters", params_to_json(model.params)}});
}

GnnModel load_model(const std::string& path) {
  nlohmann::json doc = read_envelope(path, "gnn");
  GnnModel m;
  try {
    Rng rng(0);
    m = make_gnn_model(gnn_config_from_json(doc.at("config")), rng);
    params_from_json(doc.at("parameters"), m.params);
  } catch (const nlohmann::json::exception& e) {
    throw ChecksumError(path + ": malformed model body: " + e.what());
  }
  return m;
}

}  // namespace gnids

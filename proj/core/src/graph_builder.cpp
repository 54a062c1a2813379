#include "gnids/graph_builder.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "gnids/error.hpp"

namespace gnids {

std::string_view edge_type_name(EdgeType t) {
  return t == EdgeType::SrcToFlow ? "src_to_flow" : "flow_to_dst";
}

std::vector<std::size_t> HostConnectionGraph::host_degrees() const {
  std::vector<std::size_t> deg(hosts.size(), 0);
  for (const auto& e : edges) {
    deg[e.type == EdgeType::SrcToFlow ? e.a : e.b] += 1;
  }
  return deg;
}

HostConnectionGraph build_graph(std::span<const FlowInput> flows) {
  if (flows.empty()) throw UsageError("build_graph: empty flow set");
  HostConnectionGraph g;
  std::unordered_map<std::string_view, std::uint32_t> host_ids;
  host_ids.reserve(flows.size() * 2);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> endpoints;
  endpoints.reserve(flows.size());

  auto intern = [&](std::string_view ip) {
    auto [it, inserted] = host_ids.try_emplace(ip, static_cast<std::uint32_t>(g.hosts.size()));
    if (inserted) g.hosts.emplace_back(ip);
    return it->second;
  };
  for (const auto& f : flows) {
    const auto s = intern(f.src_ip);
    const auto d = intern(f.dst_ip);
    endpoints.emplace_back(s, d);
  }

  g.flows.reserve(flows.size());
  g.edges.reserve(flows.size() * 2);
  for (std::size_t i = 0; i < flows.size(); ++i) {
    g.flows.push_back({flows[i].features, flows[i].label, flows[i].record_index});
    const auto node = g.flow_node(i);
    g.edges.push_back({endpoints[i].first, node, EdgeType::SrcToFlow});
    g.edges.push_back({node, endpoints[i].second, EdgeType::FlowToDst});
  }
  return g;
}

HostConnectionGraph build_topology(std::span<const RawFlowRecord> records) {
  std::vector<FlowInput> inputs;
  inputs.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    inputs.push_back({records[i].src_ip, records[i].dst_ip, {}, -1, i});
  }
  return build_graph(inputs);
}

std::vector<WindowRange> window_flows(std::size_t record_count, std::size_t window_size) {
  if (window_size == 0) throw UsageError("window_size must be >= 1");
  std::vector<WindowRange> out;
  for (std::size_t b = 0; b < record_count; b += window_size) {
    out.push_back({b, std::min(record_count, b + window_size)});
  }
  return out;
}

std::vector<WindowRange> window_flows_by_time(std::span<const RawFlowRecord> records,
                                              double seconds) {
  if (!(seconds > 0.0)) throw UsageError("window length must be positive");
  std::vector<WindowRange> out;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= records.size(); ++i) {
    if (i == records.size() || records[i].timestamp - records[begin].timestamp >= seconds) {
      out.push_back({begin, i});
      begin = i;
    }
  }
  if (records.empty()) out.clear();
  return out;
}

GraphSample make_sample(HostConnectionGraph graph, int window_id) {
  GraphSample s;
  s.benign_only = std::all_of(graph.flows.begin(), graph.flows.end(),
                              [](const FlowNode& f) { return f.label == 0; });
  s.graph = std::move(graph);
  s.window_id = window_id;
  return s;
}

std::vector<GraphSample> downsample_benign(std::vector<GraphSample> samples, double drop_rate,
                                           Rng& rng) {
  if (drop_rate < 0.0 || drop_rate >= 1.0) throw UsageError("drop_rate must be in [0, 1)");
  std::vector<GraphSample> kept;
  kept.reserve(samples.size());
  for (auto& s : samples) {
    // One draw per sample regardless of type keeps the stream aligned.
    const bool drop = uniform01(rng) < drop_rate;
    if (s.benign_only && drop) continue;
    kept.push_back(std::move(s));
  }
  return kept;
}

GraphStats graph_stats(const HostConnectionGraph& graph) {
  GraphStats st;
  st.hosts = graph.host_count();
  st.flows = graph.flow_count();
  st.edges = graph.edges.size();
  const auto deg = graph.host_degrees();
  st.max_host_degree = deg.empty() ? 0 : *std::max_element(deg.begin(), deg.end());

  std::vector<std::uint32_t> parent(graph.node_count());
  std::iota(parent.begin(), parent.end(), 0u);
  auto find = [&](std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const auto& e : graph.edges) {
    const auto ra = find(e.a), rb = find(e.b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  for (std::uint32_t v = 0; v < parent.size(); ++v) {
    if (find(v) == v) ++st.components;
  }
  return st;
}

nlohmann::json to_json(const HostConnectionGraph& graph) {
  nlohmann::json hosts = nlohmann::json::array();
  for (std::size_t i = 0; i < graph.hosts.size(); ++i) {
    hosts.push_back({{"id", i}, {"ip", graph.hosts[i]}});
  }
  nlohmann::json flows = nlohmann::json::array();
  for (std::size_t i = 0; i < graph.flows.size(); ++i) {
    flows.push_back({{"id", graph.flow_node(i)},
                     {"label", graph.flows[i].label},
                     {"record", graph.flows[i].record_index},
                     {"features", graph.flows[i].features}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : graph.edges) {
    edges.push_back({{"a", e.a}, {"b", e.b}, {"type", edge_type_name(e.type)}});
  }
  return {{"hosts", hosts}, {"flows", flows}, {"edges", edges}};
}

}  // namespace gnids

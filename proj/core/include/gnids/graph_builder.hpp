#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gnids/rng.hpp"
#include "gnids/schema.hpp"

namespace gnids {

enum class EdgeType : std::uint8_t { SrcToFlow, FlowToDst };

std::string_view edge_type_name(EdgeType t);

/// Node ids are canonical: hosts occupy [0, host_count) in first-appearance
/// order, flows occupy [host_count, host_count + flow_count) in input order.
struct Edge {
  std::uint32_t a = 0;  ///< SrcToFlow: source host. FlowToDst: flow.
  std::uint32_t b = 0;  ///< SrcToFlow: flow. FlowToDst: destination host.
  EdgeType type = EdgeType::SrcToFlow;

  bool operator==(const Edge&) const = default;
};

struct FlowNode {
  FlowFeatureVector features;
  int label = -1;
  std::size_t record_index = 0;  ///< back-reference into the source record list
};

/// One input flow for build_graph. IPs are topology keys only.
struct FlowInput {
  std::string_view src_ip;
  std::string_view dst_ip;
  FlowFeatureVector features;
  int label = -1;
  std::size_t record_index = 0;
};

class HostConnectionGraph {
 public:
  std::vector<std::string> hosts;
  std::vector<FlowNode> flows;
  std::vector<Edge> edges;

  std::size_t host_count() const { return hosts.size(); }
  std::size_t flow_count() const { return flows.size(); }
  std::size_t node_count() const { return hosts.size() + flows.size(); }
  std::uint32_t flow_node(std::size_t flow) const {
    return static_cast<std::uint32_t>(hosts.size() + flow);
  }
  /// Flow-degree of every host (number of incident edges).
  std::vector<std::size_t> host_degrees() const;
};

/// Hosts deduplicated by IP, one node per flow, edges SrcToFlow and
/// FlowToDst. A flow with src_ip == dst_ip yields one host carrying both
/// edge types to that flow. Throws UsageError for an empty flow set.
HostConnectionGraph build_graph(std::span<const FlowInput> flows);

/// Topology-only graph (empty feature vectors, labels -1), record_index = position.
HostConnectionGraph build_topology(std::span<const RawFlowRecord> records);

struct WindowRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  bool operator==(const WindowRange&) const = default;
};

/// Consecutive non-overlapping chunks of window_size records; the final
/// partial chunk is kept.
std::vector<WindowRange> window_flows(std::size_t record_count, std::size_t window_size);

/// Alternative mode: a new window starts whenever a record's timestamp is at
/// least `seconds` past the current window's first record. Records must be
/// sorted by timestamp.
std::vector<WindowRange> window_flows_by_time(std::span<const RawFlowRecord> records,
                                              double seconds);

struct GraphSample {
  HostConnectionGraph graph;
  int window_id = 0;
  bool benign_only = true;
};

/// benign_only computed from flow labels (class 0 = Benign).
GraphSample make_sample(HostConnectionGraph graph, int window_id);

/// Drops each benign-only sample independently with probability drop_rate;
/// samples with any attack flow are always kept. Order is preserved.
std::vector<GraphSample> downsample_benign(std::vector<GraphSample> samples, double drop_rate,
                                           Rng& rng);

struct GraphStats {
  std::size_t hosts = 0;
  std::size_t flows = 0;
  std::size_t edges = 0;
  std::size_t max_host_degree = 0;
  std::size_t components = 0;
  bool operator==(const GraphStats&) const = default;
};

GraphStats graph_stats(const HostConnectionGraph& graph);

/// Debug/oracle dump: node lists, typed edge list, canonical ordering.
nlohmann::json to_json(const HostConnectionGraph& graph);

}  // namespace gnids

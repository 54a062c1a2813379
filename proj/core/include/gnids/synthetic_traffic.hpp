#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gnids/rng.hpp"
#include "gnids/schema.hpp"

namespace gnids {

enum class PatternKind { Benign, DDoS, PortScan, NetworkScan, BruteForce };

/// Raw label string the generator writes for a kind ("BENIGN", "DDoS", ...).
std::string_view pattern_label(PatternKind kind);
PatternKind pattern_kind_from_string(std::string_view name);

enum class DistFamily { Constant, Uniform, Normal, LogNormal };

/// Uniform: mean +- spread. Normal: N(mean, spread). LogNormal: median `mean`,
/// log-space sigma `spread`. Samples are clamped to [lo, hi].
struct Distribution {
  DistFamily family = DistFamily::Constant;
  double mean = 0.0;
  double spread = 0.0;
  double lo = 0.0;
  double hi = 1e300;

  double sample(Rng& rng) const;
};

/// Sampling distributions for the primitive quantities of a flow; every CIC
/// column is derived from these so generated records are internally consistent.
struct FeatureProfile {
  Distribution fwd_packets;
  Distribution bwd_packets;
  Distribution fwd_length;  ///< mean payload bytes per forward packet
  Distribution bwd_length;
  Distribution length_cv;   ///< packet-length stddev / mean
  Distribution flow_iat;    ///< mean inter-arrival time, microseconds
  Distribution iat_cv;
  double syn_prob = 0.0;
  double ack_prob = 0.0;
  double psh_prob = 0.0;
};

struct PatternSpec {
  PatternKind kind = PatternKind::Benign;
  int attacker_count = 1;  ///< Benign: client pool size
  int victim_count = 1;    ///< Benign: server pool size
  int flows_per_pair = 1;  ///< Benign: flows per client
  FeatureProfile profile;

  /// Throws SpecError when the kind's structural constraints do not hold.
  void validate() const;
  /// Number of records generate_pattern emits.
  int flow_count() const;

  static PatternSpec default_for(PatternKind kind);
};

/// Places a pattern instance in time and in address space.
struct PatternContext {
  int instance = 0;           ///< distinct per instance within one window
  double start_time = 1.5e9;  ///< seconds since epoch
  double span = 60.0;         ///< seconds
};

/// Records structured per the kind (star for DDoS, single pair with distinct
/// ports for port scan, fan-out for network scan, repeated single-port pair
/// for brute force, client/server background for benign), sorted by timestamp.
std::vector<RawFlowRecord> generate_pattern(const PatternSpec& spec, Rng& rng,
                                            const PatternContext& ctx = {});

/// Benign background of exactly `count` flows over the spec's host pools.
std::vector<RawFlowRecord> generate_benign(const PatternSpec& spec, int count, Rng& rng,
                                           const PatternContext& ctx = {});

struct MixEntry {
  PatternSpec spec;
  double weight = 1.0;  ///< attacks: per-window inclusion probability (capped at 1)
};

struct WindowInventory {
  std::map<PatternKind, int> instances;
  std::map<std::string, int> label_counts;
};

struct SyntheticDataset {
  std::vector<std::vector<RawFlowRecord>> windows;
  std::vector<WindowInventory> inventory;

  std::vector<RawFlowRecord> flatten() const;
  std::size_t flow_count() const;
};

/// Each window holds exactly flows_per_window records: zero or more attack
/// instances (drawn per the weights, skipped when they no longer fit) plus
/// benign background filling the remainder. Windows occupy disjoint,
/// increasing time ranges so flattening preserves timestamp order.
SyntheticDataset generate_dataset(const std::vector<MixEntry>& mix, int window_count,
                                  int flows_per_window, Rng& rng);

/// Benign + the four attack kinds at their default sizes and weights.
std::vector<MixEntry> default_mix();

/// Shared key list matching FeatureSchema::synthetic_default().
std::shared_ptr<const FeatureKeys> synthetic_feature_keys();

}  // namespace gnids

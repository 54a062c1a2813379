#pragma once

#include <string>
#include <vector>

#include "gnids/gnn_model.hpp"
#include "gnids/graph_builder.hpp"
#include "gnids/rng.hpp"
#include "gnids/synthetic_traffic.hpp"

namespace fixtures {

inline std::string ip(int i) { return "10.9." + std::to_string(i / 250) + "." + std::to_string(i % 250 + 1); }

/// Random flows over a pool of `host_pool` addresses with uniform features
/// in [-1, 1]. Self-flows occur when src and dst draw the same host.
inline gnids::HostConnectionGraph random_graph(gnids::Rng& rng, std::size_t flows,
                                               int host_pool, std::size_t feature_dim,
                                               int classes = 3) {
  std::vector<std::string> src(flows), dst(flows);
  std::vector<gnids::FlowInput> in(flows);
  for (std::size_t f = 0; f < flows; ++f) {
    src[f] = ip(static_cast<int>(gnids::uniform_index(rng, static_cast<std::uint64_t>(host_pool))));
    dst[f] = ip(static_cast<int>(gnids::uniform_index(rng, static_cast<std::uint64_t>(host_pool))));
  }
  for (std::size_t f = 0; f < flows; ++f) {
    in[f].src_ip = src[f];
    in[f].dst_ip = dst[f];
    in[f].features.resize(feature_dim);
    for (auto& x : in[f].features) x = 2.0 * gnids::uniform01(rng) - 1.0;
    in[f].label = static_cast<int>(gnids::uniform_index(rng, static_cast<std::uint64_t>(classes)));
    in[f].record_index = f;
  }
  return gnids::build_graph(in);
}

/// Graph from explicit endpoints and features.
inline gnids::HostConnectionGraph graph_of(
    const std::vector<std::pair<std::string, std::string>>& ends,
    const std::vector<std::vector<double>>& features, const std::vector<int>& labels = {}) {
  std::vector<gnids::FlowInput> in(ends.size());
  for (std::size_t f = 0; f < ends.size(); ++f) {
    in[f].src_ip = ends[f].first;
    in[f].dst_ip = ends[f].second;
    in[f].features = features[f];
    in[f].label = labels.empty() ? 0 : labels[f];
    in[f].record_index = f;
  }
  return gnids::build_graph(in);
}

inline gnids::GnnModel small_model(std::size_t features, std::size_t n, int t, std::size_t classes,
                                   std::uint64_t seed, std::size_t width = 0) {
  gnids::GnnConfig c;
  c.feature_count = features;
  c.hidden_dim = n;
  c.iterations = t;
  c.message_hidden = width ? width : n;
  c.readout_hidden1 = width ? width : n;
  c.readout_hidden2 = width ? width : n;
  c.class_count = classes;
  gnids::Rng rng(seed);
  return gnids::make_gnn_model(c, rng);
}

/// Adds small random offsets to every bias so that no unit sits exactly at a
/// ReLU kink and zero-initialised biases do not hide gradient paths.
inline void jitter_biases(gnids::GnnModel& m, std::uint64_t seed, double scale = 0.1) {
  gnids::Rng rng(seed);
  for (std::size_t i = 0; i < m.params.size(); ++i) {
    auto& p = m.params[i];
    if (p.value.rank() != 1) continue;
    for (auto& x : p.value.data()) x += scale * (2.0 * gnids::uniform01(rng) - 1.0);
  }
}

}  // namespace fixtures

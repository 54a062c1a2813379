#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "gnids/error.hpp"
#include "gnids/flow_ingest.hpp"
#include "gnids/graph_builder.hpp"
#include "gnids/synthetic_traffic.hpp"

using namespace gnids;

namespace {

std::set<std::string> sources(const std::vector<RawFlowRecord>& rs) {
  std::set<std::string> s;
  for (const auto& r : rs) s.insert(r.src_ip);
  return s;
}

std::set<std::string> destinations(const std::vector<RawFlowRecord>& rs) {
  std::set<std::string> s;
  for (const auto& r : rs) s.insert(r.dst_ip);
  return s;
}

}  // namespace

TEST(Synthetic, DdosIsAStarOnOneVictim) {
  auto spec = PatternSpec::default_for(PatternKind::DDoS);
  spec.attacker_count = 50;
  Rng rng(1);
  auto rs = generate_pattern(spec, rng);
  ASSERT_EQ(rs.size(), 50u);
  EXPECT_EQ(sources(rs).size(), 50u);
  EXPECT_EQ(destinations(rs).size(), 1u);
  for (const auto& r : rs) EXPECT_EQ(r.label, "DDoS");
  auto g = build_topology(rs);
  EXPECT_EQ(g.host_count(), 51u);
  EXPECT_EQ(g.flow_count(), 50u);
  EXPECT_EQ(g.edges.size(), 100u);
  const auto deg = g.host_degrees();
  EXPECT_EQ(*std::max_element(deg.begin(), deg.end()), 50u);
}

TEST(Synthetic, PortScanUsesDistinctPorts) {
  auto spec = PatternSpec::default_for(PatternKind::PortScan);
  spec.flows_per_pair = 200;
  Rng rng(2);
  auto rs = generate_pattern(spec, rng);
  ASSERT_EQ(rs.size(), 200u);
  std::set<int> ports;
  for (const auto& r : rs) ports.insert(r.dst_port);
  EXPECT_EQ(ports.size(), 200u);
  EXPECT_EQ(sources(rs).size(), 1u);
  EXPECT_EQ(destinations(rs).size(), 1u);
}

TEST(Synthetic, NetworkScanFansOut) {
  auto spec = PatternSpec::default_for(PatternKind::NetworkScan);
  Rng rng(3);
  auto rs = generate_pattern(spec, rng);
  EXPECT_EQ(sources(rs).size(), 1u);
  EXPECT_EQ(destinations(rs).size(), static_cast<std::size_t>(spec.victim_count));
  std::set<int> ports;
  for (const auto& r : rs) ports.insert(r.dst_port);
  EXPECT_EQ(ports.size(), 1u);
}

TEST(Synthetic, BruteForceRepeatsOnePortPair) {
  auto spec = PatternSpec::default_for(PatternKind::BruteForce);
  Rng rng(4);
  auto rs = generate_pattern(spec, rng);
  EXPECT_EQ(static_cast<int>(rs.size()), spec.flows_per_pair);
  EXPECT_EQ(sources(rs).size(), 1u);
  EXPECT_EQ(destinations(rs).size(), 1u);
  std::set<int> ports;
  for (const auto& r : rs) ports.insert(r.dst_port);
  EXPECT_EQ(ports.size(), 1u);
}

TEST(Synthetic, InvalidSpecsAreRejected) {
  auto ddos = PatternSpec::default_for(PatternKind::DDoS);
  ddos.attacker_count = 1;
  EXPECT_THROW(ddos.validate(), SpecError);
  auto scan = PatternSpec::default_for(PatternKind::PortScan);
  scan.flows_per_pair = 1;
  EXPECT_THROW(scan.validate(), SpecError);
  auto net = PatternSpec::default_for(PatternKind::NetworkScan);
  net.victim_count = 1;
  EXPECT_THROW(net.validate(), SpecError);
  auto brute = PatternSpec::default_for(PatternKind::BruteForce);
  brute.victim_count = 2;
  EXPECT_THROW(brute.validate(), SpecError);
  Rng rng(0);
  EXPECT_THROW(generate_pattern(ddos, rng), SpecError);
  auto mix = default_mix();
  EXPECT_THROW(generate_dataset(mix, 2, 5, rng), SpecError);
  mix.erase(mix.begin());
  EXPECT_THROW(generate_dataset(mix, 2, 500, rng), SpecError);
}

TEST(Synthetic, SameSeedSameOutput) {
  Rng a(123), b(123), c(124);
  auto da = generate_dataset(default_mix(), 5, 200, a);
  auto db = generate_dataset(default_mix(), 5, 200, b);
  auto dc = generate_dataset(default_mix(), 5, 200, c);
  EXPECT_EQ(da.flatten(), db.flatten());
  EXPECT_NE(da.flatten(), dc.flatten());
}

TEST(Synthetic, BenignOnlyMix) {
  Rng rng(9);
  auto ds = generate_dataset({{PatternSpec::default_for(PatternKind::Benign), 1.0}}, 6, 150, rng);
  for (const auto& r : ds.flatten()) EXPECT_EQ(r.label, "BENIGN");
  EXPECT_EQ(ds.flow_count(), 900u);
}

TEST(Synthetic, InclusionRateFollowsWeight) {
  auto benign = PatternSpec::default_for(PatternKind::Benign);
  auto ddos = PatternSpec::default_for(PatternKind::DDoS);
  Rng rng(11);
  auto ds = generate_dataset({{benign, 1.0}, {ddos, 0.5}}, 1000, 40, rng);
  int windows_with_ddos = 0;
  for (const auto& inv : ds.inventory) {
    auto it = inv.instances.find(PatternKind::DDoS);
    if (it != inv.instances.end() && it->second > 0) ++windows_with_ddos;
  }
  EXPECT_GE(windows_with_ddos, 400);
  EXPECT_LE(windows_with_ddos, 600);
}

TEST(Synthetic, DatasetShapeAndInventory) {
  Rng rng(12);
  auto ds = generate_dataset(default_mix(), 20, 300, rng);
  ASSERT_EQ(ds.windows.size(), 20u);
  EXPECT_EQ(ds.flow_count(), 20u * 300u);
  for (std::size_t w = 0; w < ds.windows.size(); ++w) {
    const auto& win = ds.windows[w];
    EXPECT_EQ(win.size(), 300u);
    std::map<std::string, int> counts;
    for (const auto& r : win) counts[r.label] += 1;
    EXPECT_EQ(counts, ds.inventory[w].label_counts);
    for (const auto& [kind, n] : ds.inventory[w].instances) {
      const int expected = n * PatternSpec::default_for(kind).flow_count();
      EXPECT_EQ(counts[std::string(pattern_label(kind))], expected);
    }
  }
  auto flat = ds.flatten();
  EXPECT_TRUE(std::is_sorted(flat.begin(), flat.end(), [](const auto& a, const auto& b) {
    return a.timestamp < b.timestamp;
  }));
}

TEST(Synthetic, RecordsAreInternallyConsistent) {
  Rng rng(13);
  auto ds = generate_dataset(default_mix(), 4, 300, rng);
  const auto schema = FeatureSchema::synthetic_default();
  const auto table = ClassTable::synthetic();
  for (const auto& r : ds.flatten()) {
    ASSERT_EQ(r.features.keys().names(), schema.numeric_columns());
    for (double v : r.features.values()) EXPECT_TRUE(std::isfinite(v));
    const double pf = r.features.get(col::kTotalFwdPackets);
    const double pb = r.features.get(col::kTotalBwdPackets);
    const double bytes =
        r.features.get(col::kTotalFwdBytes) + r.features.get(col::kTotalBwdBytes);
    const double seconds = r.duration_us() / 1e6;
    EXPECT_GE(pf, 1.0);
    EXPECT_GE(pf + pb, 2.0);
    EXPECT_GT(r.duration_us(), 0.0);
    EXPECT_NEAR(r.features.get(col::kFlowBytesPerSec) * seconds, bytes, 1e-9 * (bytes + 1));
    EXPECT_NEAR(r.features.get(col::kFlowPacketsPerSec) * seconds, pf + pb, 1e-9 * (pf + pb));
    EXPECT_NEAR(r.features.get(col::kAveragePacketSize) * (pf + pb), bytes, 1e-9 * (bytes + 1));
    EXPECT_LE(r.features.get(col::kFwdLenMin), r.features.get(col::kFwdLenMean));
    EXPECT_LE(r.features.get(col::kFwdLenMean), r.features.get(col::kFwdLenMax));
    EXPECT_NO_THROW(map_label(r.label, table));
  }
}

TEST(Synthetic, AttackFlowsCarryTheirPatternStructure) {
  Rng rng(14);
  auto ds = generate_dataset(default_mix(), 30, 300, rng);
  for (const auto& win : ds.windows) {
    std::map<std::string, std::vector<RawFlowRecord>> by_label;
    for (const auto& r : win) by_label[r.label].push_back(r);
    if (by_label.count("DDoS")) {
      EXPECT_EQ(destinations(by_label["DDoS"]).size(), 1u);
      EXPECT_EQ(sources(by_label["DDoS"]).size(), by_label["DDoS"].size());
    }
    if (by_label.count("PortScan")) {
      EXPECT_EQ(sources(by_label["PortScan"]).size(), 1u);
    }
    if (by_label.count("NetworkScan")) {
      EXPECT_EQ(sources(by_label["NetworkScan"]).size(), 1u);
      EXPECT_GT(destinations(by_label["NetworkScan"]).size(), 1u);
    }
  }
}

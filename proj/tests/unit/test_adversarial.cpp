#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "gnids/adversarial.hpp"
#include "gnids/baselines/decision_tree.hpp"
#include "gnids/classifier.hpp"
#include "gnids/error.hpp"
#include "gnids/graph_builder.hpp"
#include "gnids/samples.hpp"
#include "gnids/synthetic_traffic.hpp"

using namespace gnids;

namespace {

RawFlowRecord flow(const std::string& label) {
  RawFlowRecord r;
  r.src_ip = "10.0.0.1";
  r.dst_ip = "10.0.0.2";
  r.src_port = 5555;
  r.dst_port = 80;
  r.protocol = 6;
  r.timestamp = 1.5e9;
  r.label = label;
  r.features = FlowFeatures(synthetic_feature_keys());
  return r;
}

// 10 forward packets of 100 B mean, nothing backward, 2 s.
RawFlowRecord packet_example(const std::string& label) {
  auto r = flow(label);
  auto& f = r.features;
  f.set(col::kFlowDuration, 2e6);
  f.set(col::kTotalFwdPackets, 10);
  f.set(col::kTotalBwdPackets, 0);
  f.set(col::kTotalFwdBytes, 1000);
  f.set(col::kFwdLenMean, 100);
  f.set(col::kFwdLenMin, 80);
  f.set(col::kFwdLenMax, 120);
  f.set(col::kFwdLenStd, 12);
  f.set(col::kFlowBytesPerSec, 500);
  f.set(col::kFlowPacketsPerSec, 5);
  f.set(col::kAveragePacketSize, 100);
  return r;
}

// 11 packets, 1 s, 1000 B.
RawFlowRecord iat_example(const std::string& label) {
  auto r = flow(label);
  auto& f = r.features;
  f.set(col::kFlowDuration, 1e6);
  f.set(col::kTotalFwdPackets, 6);
  f.set(col::kTotalBwdPackets, 5);
  f.set(col::kTotalFwdBytes, 600);
  f.set(col::kTotalBwdBytes, 400);
  f.set(col::kFlowIatMean, 1e5);
  f.set(col::kFlowIatStd, 3e4);
  f.set(col::kFwdIatMean, 2e5);
  f.set(col::kBwdIatMean, 2.5e5);
  f.set(col::kFlowBytesPerSec, 1000);
  f.set(col::kFlowPacketsPerSec, 11);
  return r;
}

std::vector<RawFlowRecord> synthetic_records(std::uint64_t seed) {
  Rng rng(seed);
  return generate_dataset(default_mix(), 3, 200, rng).flatten();
}

}  // namespace

TEST(PacketSize, WorkedExample) {
  auto r = packet_example("DDoS");
  perturb_packet_size(r, 50.0);
  const auto& f = r.features;
  EXPECT_DOUBLE_EQ(f.get(col::kFwdLenMean), 150.0);
  EXPECT_DOUBLE_EQ(f.get(col::kFwdLenMin), 130.0);
  EXPECT_DOUBLE_EQ(f.get(col::kFwdLenMax), 170.0);
  EXPECT_DOUBLE_EQ(f.get(col::kFwdLenStd), 12.0);
  EXPECT_DOUBLE_EQ(f.get(col::kTotalFwdBytes), 1500.0);
  EXPECT_DOUBLE_EQ(f.get(col::kFlowBytesPerSec), 750.0);
  EXPECT_DOUBLE_EQ(f.get(col::kAveragePacketSize), 150.0);
  EXPECT_DOUBLE_EQ(f.get(col::kFlowPacketsPerSec), 5.0);
  EXPECT_DOUBLE_EQ(r.duration_us(), 2e6);
  // No backward packets: backward columns stay put.
  EXPECT_DOUBLE_EQ(f.get(col::kBwdLenMean), 0.0);
  EXPECT_DOUBLE_EQ(f.get(col::kTotalBwdBytes), 0.0);
}

TEST(PacketSize, RawShiftKeepsRates) {
  auto r = packet_example("DDoS");
  perturb_packet_size(r, 50.0, PerturbMode::RawShift);
  EXPECT_DOUBLE_EQ(r.features.get(col::kFlowBytesPerSec), 500.0);
  EXPECT_DOUBLE_EQ(r.features.get(col::kTotalFwdBytes), 1500.0);
}

TEST(PacketSize, BenignAndZeroAreIdentity) {
  auto benign = packet_example("BENIGN");
  auto before = benign;
  perturb_packet_size(benign, 200.0);
  EXPECT_EQ(benign, before);
  auto attack = packet_example("PortScan");
  before = attack;
  perturb_packet_size(attack, 0.0);
  EXPECT_EQ(attack, before);
  EXPECT_THROW(perturb_packet_size(attack, -1.0), UsageError);
}

TEST(Iat, WorkedExample) {
  auto r = iat_example("DDoS");
  perturb_iat(r, 0.5);
  const auto& f = r.features;
  EXPECT_DOUBLE_EQ(r.duration_us(), 6e6);
  EXPECT_NEAR(f.get(col::kFlowBytesPerSec), 1000.0 / 6.0, 1e-9);
  EXPECT_NEAR(f.get(col::kFlowBytesPerSec), 166.67, 5e-3);
  EXPECT_NEAR(f.get(col::kFlowPacketsPerSec), 11.0 / 6.0, 1e-12);
  EXPECT_DOUBLE_EQ(f.get(col::kFlowIatMean), 6e5);
  EXPECT_DOUBLE_EQ(f.get(col::kFwdIatMean), 7e5);
  EXPECT_DOUBLE_EQ(f.get(col::kBwdIatMean), 7.5e5);
  EXPECT_DOUBLE_EQ(f.get(col::kFlowIatStd), 3e4);
  EXPECT_DOUBLE_EQ(f.get(col::kTotalFwdBytes), 600.0);
}

TEST(Iat, SinglePacketFlowIsUnchanged) {
  auto r = flow("DDoS");
  r.features.set(col::kTotalFwdPackets, 1);
  r.features.set(col::kFlowDuration, 0);
  r.features.set(col::kFlowBytesPerSec, 0);
  auto before = r;
  perturb_iat(r, 1.5);
  EXPECT_EQ(r, before);
}

TEST(Iat, BenignAndZeroAreIdentity) {
  auto benign = iat_example("BENIGN");
  auto before = benign;
  perturb_iat(benign, 2.0);
  EXPECT_EQ(benign, before);
  auto attack = iat_example("DDoS");
  before = attack;
  perturb_iat(attack, 0.0);
  EXPECT_EQ(attack, before);
}

TEST(Perturbation, AdditiveComposition) {
  const auto base = synthetic_records(1);
  for (auto kind : {PerturbationKind::PacketSize, PerturbationKind::InterArrival}) {
    const double a = kind == PerturbationKind::PacketSize ? 30.0 : 0.25;
    const double b = kind == PerturbationKind::PacketSize ? 70.0 : 0.75;
    auto twice = perturb(perturb(base, {kind, a}), {kind, b});
    auto once = perturb(base, {kind, a + b});
    ASSERT_EQ(twice.size(), once.size());
    for (std::size_t i = 0; i < once.size(); ++i) {
      for (std::size_t k = 0; k < once[i].features.values().size(); ++k) {
        const double x = once[i].features.at(k), y = twice[i].features.at(k);
        EXPECT_NEAR(x, y, 1e-9 * std::max(1.0, std::abs(x)))
            << perturbation_name(kind) << " " << once[i].features.keys().names()[k];
      }
    }
  }
}

TEST(Perturbation, MonotoneAccountingAndLabels) {
  const auto base = synthetic_records(2);
  for (double delta : {1.0, 50.0, 200.0}) {
    auto out = perturb_packet_size(base, delta);
    for (std::size_t i = 0; i < base.size(); ++i) {
      EXPECT_EQ(out[i].label, base[i].label);
      for (auto c : {col::kTotalFwdBytes, col::kTotalBwdBytes, col::kFwdLenMean, col::kBwdLenMean}) {
        EXPECT_GE(out[i].features.get(c), base[i].features.get(c));
      }
    }
  }
  for (double delta : {0.01, 0.5, 2.0}) {
    auto out = perturb_iat(base, delta);
    for (std::size_t i = 0; i < base.size(); ++i) {
      EXPECT_EQ(out[i].label, base[i].label);
      EXPECT_GE(out[i].duration_us(), base[i].duration_us());
      if (!is_attack_label(base[i].label)) EXPECT_EQ(out[i], base[i]);
    }
  }
}

TEST(Perturbation, TopologyIsPreserved) {
  const auto base = synthetic_records(3);
  const auto g = build_topology(base);
  for (const PerturbationSpec& s : std::vector<PerturbationSpec>{
           {PerturbationKind::PacketSize, 200.0}, {PerturbationKind::InterArrival, 2.0}}) {
    auto out = perturb(base, s);
    auto h = build_topology(out);
    EXPECT_EQ(h.hosts, g.hosts);
    EXPECT_EQ(h.edges, g.edges);
    for (std::size_t i = 0; i < base.size(); ++i) {
      EXPECT_EQ(out[i].src_ip, base[i].src_ip);
      EXPECT_EQ(out[i].dst_port, base[i].dst_port);
      EXPECT_EQ(out[i].timestamp, base[i].timestamp);
    }
  }
}

TEST(Perturbation, ConsistentRecordsStayConsistent) {
  const auto base = synthetic_records(4);
  auto out = perturb_iat(perturb_packet_size(base, 120.0), 1.0);
  for (const auto& r : out) {
    const double bytes = r.features.get(col::kTotalFwdBytes) + r.features.get(col::kTotalBwdBytes);
    const double seconds = r.duration_us() / 1e6;
    EXPECT_NEAR(r.features.get(col::kFlowBytesPerSec) * seconds, bytes, 1e-9 * (bytes + 1));
  }
}

TEST(Sweep, ZeroMagnitudeEqualsPlainEvaluation) {
  Rng rng(5);
  auto ds = generate_dataset(default_mix(), 6, 150, rng);
  const auto schema = FeatureSchema::synthetic_default();
  const auto table = ClassTable::synthetic();
  LabeledRecords base;
  for (std::size_t w = 0; w < ds.windows.size(); ++w) {
    const std::size_t begin = base.records.size();
    for (const auto& r : ds.windows[w]) {
      base.records.push_back(r);
      base.labels.push_back(map_label(r.label, table)->index);
    }
    base.windows.push_back({begin, base.records.size()});
    base.window_ids.push_back(static_cast<int>(w));
  }
  auto stats = fit_normalizer(base.records, schema);
  Vectorizer vec(stats, schema);
  auto samples = build_samples(base, vec);
  TreeClassifier tree(train_id3(flow_vectors(samples, 5), {}));
  const NamedModel models[] = {{"id3", &tree}};
  const std::vector<PerturbationSpec> grid = {{PerturbationKind::PacketSize, 0.0},
                                              {PerturbationKind::PacketSize, 100.0},
                                              {PerturbationKind::InterArrival, 0.0}};
  auto points = robustness_sweep(models, base, vec, grid, 5);
  ASSERT_EQ(points.size(), 3u);
  auto plain = evaluate(tree, samples, 5);
  for (const auto& p : points) {
    if (p.magnitude != 0.0) continue;
    EXPECT_EQ(p.metrics.weighted_f1, plain.weighted_f1);
    EXPECT_EQ(p.metrics.confusion, plain.confusion);
  }
  std::ostringstream csv;
  write_curves_csv(csv, table.class_names(), points);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')),
            "model,perturbation_kind,magnitude,weighted_f1,f1_Benign,f1_DDoS,f1_PortScan,"
            "f1_NetworkScan,f1_BruteForce");

  const std::vector<PerturbationSpec> no_zero = {{PerturbationKind::PacketSize, 10.0}};
  EXPECT_THROW(robustness_sweep(models, base, vec, no_zero, 5), UsageError);
  const std::vector<PerturbationSpec> unsorted = {{PerturbationKind::PacketSize, 0.0},
                                                  {PerturbationKind::PacketSize, 20.0},
                                                  {PerturbationKind::PacketSize, 10.0}};
  EXPECT_THROW(robustness_sweep(models, base, vec, unsorted, 5), UsageError);
}

#include "gnids/synthetic_traffic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gnids/csv.hpp"
#include "gnids/error.hpp"

namespace gnids {

namespace {

constexpr double kPi = 3.14159265358979323846;

double standard_normal(Rng& rng) {
  // Box-Muller; one draw per call keeps the stream layout simple.
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

std::string ipv4(int a, int b, int c, int d) {
  return std::to_string(a) + "." + std::to_string(b) + "." + std::to_string(c) + "." +
         std::to_string(d);
}

std::string attacker_ip(int instance, int i) {
  return ipv4(172, 16 + instance % 16, i / 250, i % 250 + 1);
}
std::string victim_ip(int instance, int j) {
  return ipv4(10, 1 + instance % 200, j / 250, j % 250 + 1);
}
std::string client_ip(int i) { return ipv4(192, 168, i / 250, i % 250 + 1); }
std::string server_ip(int j) { return ipv4(10, 0, j / 250, j % 250 + 1); }

int ephemeral_port(Rng& rng) { return 49152 + static_cast<int>(uniform_index(rng, 16384)); }

int count_sample(const Distribution& d, Rng& rng) {
  return static_cast<int>(std::lround(std::max(0.0, d.sample(rng))));
}

bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

RawFlowRecord make_flow(const FeatureProfile& prof, Rng& rng, std::string src, std::string dst,
                        int sport, int dport, double ts, PatternKind kind) {
  RawFlowRecord r;
  r.src_ip = std::move(src);
  r.dst_ip = std::move(dst);
  r.src_port = sport;
  r.dst_port = dport;
  r.protocol = 6;
  r.timestamp = ts;
  r.label = std::string(pattern_label(kind));
  r.features = FlowFeatures(synthetic_feature_keys());

  const int pf = std::max(1, count_sample(prof.fwd_packets, rng));
  int pb = count_sample(prof.bwd_packets, rng);
  if (pf + pb < 2) pb = 1;
  const int p = pf + pb;

  const double cv = std::max(0.0, prof.length_cv.sample(rng));
  const double lf = std::max(0.0, prof.fwd_length.sample(rng));
  const double lb = pb > 0 ? std::max(0.0, prof.bwd_length.sample(rng)) : 0.0;
  const double sf = pf > 1 ? cv * lf : 0.0;
  const double sb = pb > 1 ? cv * lb : 0.0;

  const double iat = std::max(1.0, prof.flow_iat.sample(rng));
  const double iat_cv = std::max(0.0, prof.iat_cv.sample(rng));
  const double duration = iat * (p - 1);
  const double fwd_iat = pf > 1 ? duration / (pf - 1) : 0.0;
  const double bwd_iat = pb > 1 ? duration / (pb - 1) : 0.0;
  const double seconds = duration / 1e6;
  const double fwd_bytes = pf * lf;
  const double bwd_bytes = pb * lb;

  auto& f = r.features;
  f.set(col::kFlowDuration, duration);
  f.set(col::kTotalFwdPackets, pf);
  f.set(col::kTotalBwdPackets, pb);
  f.set(col::kTotalFwdBytes, fwd_bytes);
  f.set(col::kTotalBwdBytes, bwd_bytes);
  f.set(col::kFwdLenMean, lf);
  f.set(col::kFwdLenStd, sf);
  f.set(col::kFwdLenMin, std::max(0.0, lf - 1.5 * sf));
  f.set(col::kFwdLenMax, lf + 1.5 * sf);
  f.set(col::kBwdLenMean, lb);
  f.set(col::kBwdLenStd, sb);
  f.set(col::kBwdLenMin, std::max(0.0, lb - 1.5 * sb));
  f.set(col::kBwdLenMax, lb + 1.5 * sb);
  f.set(col::kFlowBytesPerSec, (fwd_bytes + bwd_bytes) / seconds);
  f.set(col::kFlowPacketsPerSec, p / seconds);
  f.set(col::kFwdPacketsPerSec, pf / seconds);
  f.set(col::kBwdPacketsPerSec, pb / seconds);
  f.set(col::kFlowIatMean, iat);
  f.set(col::kFlowIatStd, iat_cv * iat);
  f.set(col::kFwdIatMean, fwd_iat);
  f.set(col::kFwdIatStd, iat_cv * fwd_iat);
  f.set(col::kBwdIatMean, bwd_iat);
  f.set(col::kBwdIatStd, iat_cv * bwd_iat);
  f.set(col::kSynFlagCount, bernoulli(rng, prof.syn_prob) ? 1.0 : 0.0);
  f.set(col::kAckFlagCount, bernoulli(rng, prof.ack_prob) ? 1.0 : 0.0);
  f.set(col::kPshFlagCount, bernoulli(rng, prof.psh_prob) ? 1.0 : 0.0);
  f.set(col::kAveragePacketSize, (fwd_bytes + bwd_bytes) / p);
  return r;
}

void sort_by_time(std::vector<RawFlowRecord>& records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const RawFlowRecord& a, const RawFlowRecord& b) {
                     return a.timestamp < b.timestamp;
                   });
}

Distribution constant(double v) { return {DistFamily::Constant, v, 0.0, v, v}; }
Distribution uniform(double mean, double spread, double lo = 0.0, double hi = 1e300) {
  return {DistFamily::Uniform, mean, spread, lo, hi};
}
Distribution lognormal(double median, double sigma, double lo, double hi) {
  return {DistFamily::LogNormal, median, sigma, lo, hi};
}

}  // namespace

std::string_view pattern_label(PatternKind kind) {
  switch (kind) {
    case PatternKind::Benign: return "BENIGN";
    case PatternKind::DDoS: return "DDoS";
    case PatternKind::PortScan: return "PortScan";
    case PatternKind::NetworkScan: return "NetworkScan";
    case PatternKind::BruteForce: return "BruteForce";
  }
  return "BENIGN";
}

PatternKind pattern_kind_from_string(std::string_view name) {
  for (auto k : {PatternKind::Benign, PatternKind::DDoS, PatternKind::PortScan,
                 PatternKind::NetworkScan, PatternKind::BruteForce}) {
    if (csv::iequals(name, pattern_label(k))) return k;
  }
  if (csv::iequals(name, "benign")) return PatternKind::Benign;
  throw SpecError("unknown pattern kind: " + std::string(name));
}

double Distribution::sample(Rng& rng) const {
  double v = mean;
  switch (family) {
    case DistFamily::Constant: break;
    case DistFamily::Uniform: v = mean + spread * (2.0 * uniform01(rng) - 1.0); break;
    case DistFamily::Normal: v = mean + spread * standard_normal(rng); break;
    case DistFamily::LogNormal:
      v = std::exp(std::log(std::max(mean, 1e-300)) + spread * standard_normal(rng));
      break;
  }
  return std::clamp(v, lo, hi);
}

void PatternSpec::validate() const {
  if (attacker_count < 1 || victim_count < 1 || flows_per_pair < 1) {
    throw SpecError("pattern counts must be >= 1");
  }
  switch (kind) {
    case PatternKind::DDoS:
      if (attacker_count <= 1 || victim_count != 1) {
        throw SpecError("DDoS requires attacker_count > 1 and victim_count = 1");
      }
      break;
    case PatternKind::PortScan:
      if (attacker_count != 1 || victim_count != 1 || flows_per_pair <= 1) {
        throw SpecError(
            "PortScan requires one attacker, one victim and flows_per_pair > 1");
      }
      if (flows_per_pair > 65535) throw SpecError("PortScan cannot exceed 65535 ports");
      break;
    case PatternKind::NetworkScan:
      if (attacker_count != 1 || victim_count <= 1) {
        throw SpecError("NetworkScan requires one attacker and victim_count > 1");
      }
      break;
    case PatternKind::BruteForce:
      if (attacker_count != 1 || victim_count != 1) {
        throw SpecError("BruteForce requires one attacker and one victim");
      }
      break;
    case PatternKind::Benign: break;
  }
}

int PatternSpec::flow_count() const {
  switch (kind) {
    case PatternKind::Benign: return attacker_count * flows_per_pair;
    default: return attacker_count * victim_count * flows_per_pair;
  }
}

PatternSpec PatternSpec::default_for(PatternKind kind) {
  PatternSpec s;
  s.kind = kind;
  auto& p = s.profile;
  switch (kind) {
    case PatternKind::Benign:
      s.attacker_count = 40;
      s.victim_count = 8;
      s.flows_per_pair = 2;
      p.fwd_packets = lognormal(8, 0.8, 1, 500);
      p.bwd_packets = lognormal(8, 0.8, 0, 500);
      p.fwd_length = lognormal(350, 0.5, 60, 1460);
      p.bwd_length = lognormal(700, 0.5, 60, 1460);
      p.length_cv = uniform(0.5, 0.3);
      p.flow_iat = lognormal(80'000, 1.0, 2'000, 5'000'000);
      p.iat_cv = uniform(1.0, 0.5);
      p.syn_prob = 0.05;
      p.ack_prob = 0.4;
      p.psh_prob = 0.3;
      break;
    case PatternKind::DDoS:
      s.attacker_count = 24;
      p.fwd_packets = lognormal(4, 0.3, 2, 10);
      p.bwd_packets = lognormal(3, 0.3, 1, 8);
      p.fwd_length = uniform(30, 15);
      p.bwd_length = uniform(20, 15);
      p.length_cv = uniform(0.3, 0.2);
      p.flow_iat = lognormal(3'000, 0.5, 200, 15'000);
      p.iat_cv = uniform(0.5, 0.2);
      p.ack_prob = 0.9;
      p.psh_prob = 0.6;
      break;
    case PatternKind::PortScan:
      s.flows_per_pair = 30;
      p.fwd_packets = constant(1);
      p.bwd_packets = constant(1);
      p.fwd_length = uniform(2, 2);
      p.bwd_length = uniform(3, 3);
      p.length_cv = constant(0);
      p.flow_iat = lognormal(100, 0.5, 10, 2'000);
      p.iat_cv = constant(0);
      p.syn_prob = 1.0;
      break;
    case PatternKind::NetworkScan:
      s.victim_count = 24;
      p.fwd_packets = uniform(1.5, 0.5);
      p.bwd_packets = constant(1);
      p.fwd_length = uniform(2, 2);
      p.bwd_length = uniform(2, 2);
      p.length_cv = constant(0);
      p.flow_iat = lognormal(300, 0.5, 20, 5'000);
      p.iat_cv = uniform(0.2, 0.2);
      p.syn_prob = 1.0;
      p.ack_prob = 0.1;
      break;
    case PatternKind::BruteForce:
      s.flows_per_pair = 16;
      p.fwd_packets = lognormal(16, 0.2, 8, 40);
      p.bwd_packets = lognormal(20, 0.2, 8, 40);
      p.fwd_length = uniform(60, 25);
      p.bwd_length = uniform(80, 30);
      p.length_cv = uniform(0.6, 0.2);
      p.flow_iat = lognormal(8'000, 0.4, 1'000, 40'000);
      p.iat_cv = uniform(0.8, 0.3);
      p.ack_prob = 1.0;
      p.psh_prob = 0.8;
      break;
  }
  return s;
}

std::vector<RawFlowRecord> generate_benign(const PatternSpec& spec, int count, Rng& rng,
                                           const PatternContext& ctx) {
  std::vector<double> server_weight(static_cast<std::size_t>(spec.victim_count));
  for (std::size_t j = 0; j < server_weight.size(); ++j) server_weight[j] = 1.0 / (j + 1.0);
  const double total = std::accumulate(server_weight.begin(), server_weight.end(), 0.0);
  constexpr int kServicePorts[] = {443, 80, 53, 22, 8080, 993};

  std::vector<RawFlowRecord> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const int client = static_cast<int>(
        uniform_index(rng, static_cast<std::uint64_t>(spec.attacker_count)));
    double u = uniform01(rng) * total;
    int server = 0;
    while (server + 1 < spec.victim_count && u >= server_weight[static_cast<std::size_t>(server)]) {
      u -= server_weight[static_cast<std::size_t>(server)];
      ++server;
    }
    const int dport = kServicePorts[server % 6];
    const double ts = ctx.start_time + uniform01(rng) * ctx.span;
    out.push_back(make_flow(spec.profile, rng, client_ip(client), server_ip(server),
                            ephemeral_port(rng), dport, ts, PatternKind::Benign));
  }
  sort_by_time(out);
  return out;
}

std::vector<RawFlowRecord> generate_pattern(const PatternSpec& spec, Rng& rng,
                                            const PatternContext& ctx) {
  spec.validate();
  if (spec.kind == PatternKind::Benign) {
    return generate_benign(spec, spec.flow_count(), rng, ctx);
  }
  // Attack flows arrive in a burst covering a tenth of the context span.
  const double burst = ctx.span * 0.1;
  const double burst_start = ctx.start_time + uniform01(rng) * (ctx.span - burst);
  auto when = [&] { return burst_start + uniform01(rng) * burst; };

  std::vector<RawFlowRecord> out;
  out.reserve(static_cast<std::size_t>(spec.flow_count()));
  switch (spec.kind) {
    case PatternKind::DDoS: {
      const std::string victim = victim_ip(ctx.instance, 0);
      for (int a = 0; a < spec.attacker_count; ++a) {
        for (int k = 0; k < spec.flows_per_pair; ++k) {
          out.push_back(make_flow(spec.profile, rng, attacker_ip(ctx.instance, a), victim,
                                  ephemeral_port(rng), 80, when(), spec.kind));
        }
      }
      break;
    }
    case PatternKind::PortScan: {
      const int first =
          1 + static_cast<int>(uniform_index(
                  rng, static_cast<std::uint64_t>(65535 - spec.flows_per_pair + 1)));
      for (int k = 0; k < spec.flows_per_pair; ++k) {
        out.push_back(make_flow(spec.profile, rng, attacker_ip(ctx.instance, 0),
                                victim_ip(ctx.instance, 0), ephemeral_port(rng), first + k,
                                when(), spec.kind));
      }
      break;
    }
    case PatternKind::NetworkScan: {
      constexpr int kScanPorts[] = {22, 445, 3389, 23};
      const int base = kScanPorts[uniform_index(rng, 4)];
      for (int v = 0; v < spec.victim_count; ++v) {
        for (int k = 0; k < spec.flows_per_pair; ++k) {
          out.push_back(make_flow(spec.profile, rng, attacker_ip(ctx.instance, 0),
                                  victim_ip(ctx.instance, v), ephemeral_port(rng), base + k,
                                  when(), spec.kind));
        }
      }
      break;
    }
    case PatternKind::BruteForce: {
      for (int k = 0; k < spec.flows_per_pair; ++k) {
        out.push_back(make_flow(spec.profile, rng, attacker_ip(ctx.instance, 0),
                                victim_ip(ctx.instance, 0), ephemeral_port(rng), 22, when(),
                                spec.kind));
      }
      break;
    }
    case PatternKind::Benign: break;
  }
  sort_by_time(out);
  return out;
}

std::vector<RawFlowRecord> SyntheticDataset::flatten() const {
  std::vector<RawFlowRecord> out;
  out.reserve(flow_count());
  for (const auto& w : windows) out.insert(out.end(), w.begin(), w.end());
  return out;
}

std::size_t SyntheticDataset::flow_count() const {
  std::size_t n = 0;
  for (const auto& w : windows) n += w.size();
  return n;
}

SyntheticDataset generate_dataset(const std::vector<MixEntry>& mix, int window_count,
                                  int flows_per_window, Rng& rng) {
  const MixEntry* benign = nullptr;
  int smallest = 0;
  bool has_attacks = false;
  for (const auto& m : mix) {
    if (!(m.weight > 0.0)) throw SpecError("mix weights must be positive");
    m.spec.validate();
    if (m.spec.kind == PatternKind::Benign) {
      if (!benign) benign = &m;
    } else {
      smallest = has_attacks ? std::min(smallest, m.spec.flow_count()) : m.spec.flow_count();
      has_attacks = true;
    }
  }
  if (!benign) throw SpecError("mix needs at least one Benign entry");
  if (window_count < 0) throw SpecError("window_count must be >= 0");
  if (flows_per_window < 1) throw SpecError("flows_per_window must be >= 1");
  if (has_attacks && flows_per_window < smallest) {
    throw SpecError("flows_per_window (" + std::to_string(flows_per_window) +
                    ") is smaller than the smallest attack pattern (" +
                    std::to_string(smallest) + " flows)");
  }

  constexpr double kWindowSpan = 60.0;
  constexpr double kEpoch = 1.4995e9;  // early July 2017

  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(window_count));
  for (auto& s : seeds) s = rng();

  SyntheticDataset ds;
  ds.windows.resize(seeds.size());
  ds.inventory.resize(seeds.size());
  for (std::size_t w = 0; w < seeds.size(); ++w) {
    Rng wrng(seeds[w]);
    const double start = kEpoch + static_cast<double>(w) * kWindowSpan;
    auto& records = ds.windows[w];
    auto& inv = ds.inventory[w];
    int used = 0;
    int instance = 0;
    for (const auto& m : mix) {
      if (m.spec.kind == PatternKind::Benign) continue;
      const bool include = uniform01(wrng) < std::min(1.0, m.weight);
      if (!include || used + m.spec.flow_count() > flows_per_window) continue;
      auto flows = generate_pattern(m.spec, wrng, {instance++, start, kWindowSpan});
      used += static_cast<int>(flows.size());
      inv.instances[m.spec.kind] += 1;
      records.insert(records.end(), std::make_move_iterator(flows.begin()),
                     std::make_move_iterator(flows.end()));
    }
    auto background =
        generate_benign(benign->spec, flows_per_window - used, wrng, {instance, start, kWindowSpan});
    records.insert(records.end(), std::make_move_iterator(background.begin()),
                   std::make_move_iterator(background.end()));
    sort_by_time(records);
    for (const auto& r : records) inv.label_counts[r.label] += 1;
  }
  return ds;
}

std::vector<MixEntry> default_mix() {
  return {
      {PatternSpec::default_for(PatternKind::Benign), 1.0},
      {PatternSpec::default_for(PatternKind::DDoS), 0.3},
      {PatternSpec::default_for(PatternKind::PortScan), 0.3},
      {PatternSpec::default_for(PatternKind::NetworkScan), 0.3},
      {PatternSpec::default_for(PatternKind::BruteForce), 0.3},
  };
}

std::shared_ptr<const FeatureKeys> synthetic_feature_keys() {
  static const auto keys =
      std::make_shared<const FeatureKeys>(FeatureSchema::synthetic_default().numeric_columns());
  return keys;
}

}  // namespace gnids

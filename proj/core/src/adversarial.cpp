#include "gnids/adversarial.hpp"

#include <algorithm>
#include <map>

#include "gnids/csv.hpp"
#include "gnids/error.hpp"

namespace gnids {

namespace {

void shift(FlowFeatures& f, std::string_view name, double delta) {
  if (f.has(name)) f.set(name, f.get(name) + delta);
}

void recompute_rates(FlowFeatures& f, bool bytes, bool packets) {
  const double seconds = f.get(col::kFlowDuration) / 1e6;
  if (!(seconds > 0.0)) return;
  const double pf = f.get(col::kTotalFwdPackets);
  const double pb = f.get(col::kTotalBwdPackets);
  if (bytes && f.has(col::kTotalFwdBytes) && f.has(col::kTotalBwdBytes)) {
    f.set(col::kFlowBytesPerSec,
          (f.get(col::kTotalFwdBytes) + f.get(col::kTotalBwdBytes)) / seconds);
  }
  if (packets) {
    f.set(col::kFlowPacketsPerSec, (pf + pb) / seconds);
    f.set(col::kFwdPacketsPerSec, pf / seconds);
    f.set(col::kBwdPacketsPerSec, pb / seconds);
  }
}

void check_delta(double delta) {
  if (!(delta >= 0.0)) throw UsageError("perturbation magnitude must be >= 0");
}

}  // namespace

std::string_view perturbation_name(PerturbationKind kind) {
  return kind == PerturbationKind::PacketSize ? "packet_size" : "iat";
}

PerturbationKind perturbation_kind_from_string(std::string_view s) {
  if (csv::iequals(s, "packet_size")) return PerturbationKind::PacketSize;
  if (csv::iequals(s, "iat")) return PerturbationKind::InterArrival;
  throw UsageError("unknown perturbation kind '" + std::string(s) + "'");
}

std::string_view perturb_mode_name(PerturbMode mode) {
  return mode == PerturbMode::Consistent ? "consistent" : "raw-shift";
}

PerturbMode perturb_mode_from_string(std::string_view s) {
  if (csv::iequals(s, "consistent")) return PerturbMode::Consistent;
  if (csv::iequals(s, "raw-shift")) return PerturbMode::RawShift;
  throw UsageError("unknown perturbation mode '" + std::string(s) + "'");
}

bool is_attack_label(std::string_view raw_label) {
  return !csv::iequals(csv::trim(raw_label), "BENIGN");
}

void perturb_packet_size(RawFlowRecord& record, double delta, PerturbMode mode) {
  check_delta(delta);
  if (delta == 0.0 || !is_attack_label(record.label)) return;
  FlowFeatures& f = record.features;
  const double pf = f.get(col::kTotalFwdPackets);
  const double pb = f.get(col::kTotalBwdPackets);
  if (pf > 0) {
    for (auto c : {col::kFwdLenMin, col::kFwdLenMax, col::kFwdLenMean, col::kAvgFwdSegmentSize}) {
      shift(f, c, delta);
    }
    shift(f, col::kTotalFwdBytes, delta * pf);
  }
  if (pb > 0) {
    for (auto c : {col::kBwdLenMin, col::kBwdLenMax, col::kBwdLenMean, col::kAvgBwdSegmentSize}) {
      shift(f, c, delta);
    }
    shift(f, col::kTotalBwdBytes, delta * pb);
  }
  if (pf + pb > 0) {
    for (auto c : {col::kMinPacketLength, col::kMaxPacketLength, col::kPacketLengthMean,
                   col::kAveragePacketSize}) {
      shift(f, c, delta);
    }
  }
  if (mode == PerturbMode::Consistent) recompute_rates(f, true, false);
}

void perturb_iat(RawFlowRecord& record, double delta, PerturbMode mode) {
  check_delta(delta);
  if (delta == 0.0 || !is_attack_label(record.label)) return;
  FlowFeatures& f = record.features;
  const double pf = f.get(col::kTotalFwdPackets);
  const double pb = f.get(col::kTotalBwdPackets);
  const double p = pf + pb;
  if (p <= 1) return;
  const double us = delta * 1e6;
  for (auto c : {col::kFlowIatMean, col::kFlowIatMin, col::kFlowIatMax}) shift(f, c, us);
  shift(f, col::kFlowDuration, us * (p - 1));
  if (pf > 1) {
    for (auto c : {col::kFwdIatMean, col::kFwdIatMin, col::kFwdIatMax}) shift(f, c, us);
    shift(f, col::kFwdIatTotal, us * (pf - 1));
  }
  if (pb > 1) {
    for (auto c : {col::kBwdIatMean, col::kBwdIatMin, col::kBwdIatMax}) shift(f, c, us);
    shift(f, col::kBwdIatTotal, us * (pb - 1));
  }
  if (mode == PerturbMode::Consistent) recompute_rates(f, true, true);
}

std::vector<RawFlowRecord> perturb_packet_size(std::span<const RawFlowRecord> records,
                                               double delta, PerturbMode mode) {
  std::vector<RawFlowRecord> out(records.begin(), records.end());
  for (auto& r : out) perturb_packet_size(r, delta, mode);
  return out;
}

std::vector<RawFlowRecord> perturb_iat(std::span<const RawFlowRecord> records, double delta,
                                       PerturbMode mode) {
  std::vector<RawFlowRecord> out(records.begin(), records.end());
  for (auto& r : out) perturb_iat(r, delta, mode);
  return out;
}

std::vector<RawFlowRecord> perturb(std::span<const RawFlowRecord> records,
                                   const PerturbationSpec& spec, PerturbMode mode) {
  return spec.kind == PerturbationKind::PacketSize ? perturb_packet_size(records, spec.magnitude, mode)
                                                   : perturb_iat(records, spec.magnitude, mode);
}

std::vector<CurvePoint> robustness_sweep(std::span<const NamedModel> models,
                                         const LabeledRecords& base, const Vectorizer& vectorize,
                                         std::span<const PerturbationSpec> grid,
                                         std::size_t class_count, PerturbMode mode) {
  std::map<PerturbationKind, std::vector<double>> by_kind;
  for (const auto& s : grid) {
    check_delta(s.magnitude);
    by_kind[s.kind].push_back(s.magnitude);
  }
  for (const auto& [kind, mags] : by_kind) {
    if (!std::is_sorted(mags.begin(), mags.end())) {
      throw UsageError("sweep grid for " + std::string(perturbation_name(kind)) +
                       " is not sorted by magnitude");
    }
    if (std::find(mags.begin(), mags.end(), 0.0) == mags.end()) {
      throw UsageError("sweep grid for " + std::string(perturbation_name(kind)) +
                       " must include magnitude 0");
    }
  }
  for (const auto& m : models) {
    if (m.model == nullptr) throw UsageError("sweep: model '" + m.name + "' is untrained");
  }

  std::vector<CurvePoint> out;
  for (const auto& spec : grid) {
    LabeledRecords perturbed = base;
    perturbed.records = perturb(base.records, spec, mode);
    const auto samples = build_samples(perturbed, vectorize);
    for (const auto& m : models) {
      out.push_back({m.name, spec.kind, spec.magnitude, evaluate(*m.model, samples, class_count)});
    }
  }
  // Group by model, then kind, keeping grid order inside each curve.
  std::stable_sort(out.begin(), out.end(), [&](const CurvePoint& a, const CurvePoint& b) {
    auto rank = [&](const std::string& name) {
      for (std::size_t i = 0; i < models.size(); ++i) {
        if (models[i].name == name) return i;
      }
      return models.size();
    };
    if (a.model != b.model) return rank(a.model) < rank(b.model);
    return a.kind < b.kind;
  });
  return out;
}

void write_curves_csv(std::ostream& out, const std::vector<std::string>& class_names,
                      std::span<const CurvePoint> points) {
  std::vector<std::string> header = {"model", "perturbation_kind", "magnitude", "weighted_f1"};
  for (const auto& c : class_names) header.push_back("f1_" + c);
  csv::write_row(out, header);
  for (const auto& p : points) {
    std::vector<std::string> row = {p.model, std::string(perturbation_name(p.kind)),
                                    csv::format_double(p.magnitude),
                                    csv::format_double(p.metrics.weighted_f1)};
    for (std::size_t k = 0; k < class_names.size(); ++k) {
      row.push_back(k < p.metrics.per_class.size() ? csv::format_double(p.metrics.per_class[k].f1)
                                                   : "");
    }
    csv::write_row(out, row);
  }
}

}  // namespace gnids

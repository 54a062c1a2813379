#pragma once

#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gnids/classifier.hpp"
#include "gnids/samples.hpp"

namespace gnids {

enum class PerturbationKind { PacketSize, InterArrival };
/// Consistent: dependent rates are recomputed. RawShift: only the shifted
/// length/timing columns (and their totals and duration) move; rates keep
/// their original values.
enum class PerturbMode { Consistent, RawShift };

std::string_view perturbation_name(PerturbationKind kind);  ///< packet_size, iat
PerturbationKind perturbation_kind_from_string(std::string_view s);
std::string_view perturb_mode_name(PerturbMode mode);
PerturbMode perturb_mode_from_string(std::string_view s);

struct PerturbationSpec {
  PerturbationKind kind = PerturbationKind::PacketSize;
  double magnitude = 0.0;  ///< bytes for PacketSize, seconds for InterArrival
};

/// Benign records are those whose trimmed label is "BENIGN" (any case).
bool is_attack_label(std::string_view raw_label);

/// Adds `delta` bytes to every packet of an attack record. No-op for benign
/// records and for delta == 0. Throws UsageError for negative delta.
void perturb_packet_size(RawFlowRecord& record, double delta,
                         PerturbMode mode = PerturbMode::Consistent);
/// Adds `delta` seconds to every inter-arrival gap of an attack record.
void perturb_iat(RawFlowRecord& record, double delta, PerturbMode mode = PerturbMode::Consistent);

std::vector<RawFlowRecord> perturb_packet_size(std::span<const RawFlowRecord> records,
                                               double delta,
                                               PerturbMode mode = PerturbMode::Consistent);
std::vector<RawFlowRecord> perturb_iat(std::span<const RawFlowRecord> records, double delta,
                                       PerturbMode mode = PerturbMode::Consistent);
std::vector<RawFlowRecord> perturb(std::span<const RawFlowRecord> records,
                                   const PerturbationSpec& spec,
                                   PerturbMode mode = PerturbMode::Consistent);

struct NamedModel {
  std::string name;
  const Classifier* model = nullptr;
};

struct CurvePoint {
  std::string model;
  PerturbationKind kind = PerturbationKind::PacketSize;
  double magnitude = 0.0;
  Metrics metrics;
};

/// For every model and grid point: perturb the evaluation records, rebuild
/// and re-vectorize the windows with the training-time statistics, evaluate.
/// The grid must hold non-negative magnitudes, sorted ascending per kind,
/// including 0 for each kind present.
std::vector<CurvePoint> robustness_sweep(std::span<const NamedModel> models,
                                         const LabeledRecords& base, const Vectorizer& vectorize,
                                         std::span<const PerturbationSpec> grid,
                                         std::size_t class_count,
                                         PerturbMode mode = PerturbMode::Consistent);

/// Columns: model, perturbation_kind, magnitude, weighted_f1, f1_<class>...
void write_curves_csv(std::ostream& out, const std::vector<std::string>& class_names,
                      std::span<const CurvePoint> points);

}  // namespace gnids

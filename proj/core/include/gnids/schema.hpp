#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gnids {

/// Canonical column names as written by CICFlowMeter in CIC-IDS2017.
namespace col {
inline constexpr std::string_view kFlowId = "Flow ID";
inline constexpr std::string_view kSourceIp = "Source IP";
inline constexpr std::string_view kDestinationIp = "Destination IP";
inline constexpr std::string_view kSourcePort = "Source Port";
inline constexpr std::string_view kDestinationPort = "Destination Port";
inline constexpr std::string_view kProtocol = "Protocol";
inline constexpr std::string_view kTimestamp = "Timestamp";
inline constexpr std::string_view kLabel = "Label";
inline constexpr std::string_view kFlowDuration = "Flow Duration";

inline constexpr std::string_view kTotalFwdPackets = "Total Fwd Packets";
inline constexpr std::string_view kTotalBwdPackets = "Total Backward Packets";
inline constexpr std::string_view kTotalFwdBytes = "Total Length of Fwd Packets";
inline constexpr std::string_view kTotalBwdBytes = "Total Length of Bwd Packets";
inline constexpr std::string_view kFwdLenMax = "Fwd Packet Length Max";
inline constexpr std::string_view kFwdLenMin = "Fwd Packet Length Min";
inline constexpr std::string_view kFwdLenMean = "Fwd Packet Length Mean";
inline constexpr std::string_view kFwdLenStd = "Fwd Packet Length Std";
inline constexpr std::string_view kBwdLenMax = "Bwd Packet Length Max";
inline constexpr std::string_view kBwdLenMin = "Bwd Packet Length Min";
inline constexpr std::string_view kBwdLenMean = "Bwd Packet Length Mean";
inline constexpr std::string_view kBwdLenStd = "Bwd Packet Length Std";
inline constexpr std::string_view kFlowBytesPerSec = "Flow Bytes/s";
inline constexpr std::string_view kFlowPacketsPerSec = "Flow Packets/s";
inline constexpr std::string_view kFlowIatMean = "Flow IAT Mean";
inline constexpr std::string_view kFlowIatStd = "Flow IAT Std";
inline constexpr std::string_view kFlowIatMax = "Flow IAT Max";
inline constexpr std::string_view kFlowIatMin = "Flow IAT Min";
inline constexpr std::string_view kFwdIatTotal = "Fwd IAT Total";
inline constexpr std::string_view kFwdIatMean = "Fwd IAT Mean";
inline constexpr std::string_view kFwdIatStd = "Fwd IAT Std";
inline constexpr std::string_view kFwdIatMax = "Fwd IAT Max";
inline constexpr std::string_view kFwdIatMin = "Fwd IAT Min";
inline constexpr std::string_view kBwdIatTotal = "Bwd IAT Total";
inline constexpr std::string_view kBwdIatMean = "Bwd IAT Mean";
inline constexpr std::string_view kBwdIatStd = "Bwd IAT Std";
inline constexpr std::string_view kBwdIatMax = "Bwd IAT Max";
inline constexpr std::string_view kBwdIatMin = "Bwd IAT Min";
inline constexpr std::string_view kFwdPacketsPerSec = "Fwd Packets/s";
inline constexpr std::string_view kBwdPacketsPerSec = "Bwd Packets/s";
inline constexpr std::string_view kMinPacketLength = "Min Packet Length";
inline constexpr std::string_view kMaxPacketLength = "Max Packet Length";
inline constexpr std::string_view kPacketLengthMean = "Packet Length Mean";
inline constexpr std::string_view kPacketLengthStd = "Packet Length Std";
inline constexpr std::string_view kPacketLengthVariance = "Packet Length Variance";
inline constexpr std::string_view kAveragePacketSize = "Average Packet Size";
inline constexpr std::string_view kAvgFwdSegmentSize = "Avg Fwd Segment Size";
inline constexpr std::string_view kAvgBwdSegmentSize = "Avg Bwd Segment Size";
inline constexpr std::string_view kSynFlagCount = "SYN Flag Count";
inline constexpr std::string_view kAckFlagCount = "ACK Flag Count";
inline constexpr std::string_view kPshFlagCount = "PSH Flag Count";
}  // namespace col

enum class ColumnKind { Numeric, Identifier, Label };

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;
};

/// Ordered CSV columns plus the subset of numeric columns fed to models.
class FeatureSchema {
 public:
  /// Throws SchemaError when a selected feature is not a numeric column,
  /// is duplicated, or the selection is empty.
  FeatureSchema(std::vector<Column> columns, std::vector<std::string> selected);

  /// Classifies header names: known endpoint/time columns become identifiers,
  /// "Label" the label, everything else numeric. Selection = all numeric.
  /// Duplicate names get a ".1", ".2" suffix.
  static FeatureSchema infer(std::span<const std::string> header);

  /// The column set emitted by the synthetic traffic generator.
  static FeatureSchema synthetic_default();

  const std::vector<Column>& columns() const { return columns_; }
  const std::vector<std::string>& selected_features() const { return selected_; }
  std::vector<std::string> numeric_columns() const;

  /// Same columns, different model-input subset.
  FeatureSchema with_selection(std::vector<std::string> selected) const;

  /// Trim + case-insensitive lookup.
  std::optional<std::size_t> find(std::string_view name) const;

 private:
  std::vector<Column> columns_;
  std::vector<std::string> selected_;
};

/// True for the columns that identify endpoints or time and therefore must
/// never be model input.
bool is_identifier_column(std::string_view name);

/// Shared, immutable name -> slot index for a family of records.
class FeatureKeys {
 public:
  explicit FeatureKeys(std::vector<std::string> names);
  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }
  std::optional<std::size_t> index(std::string_view name) const;

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Ordered map of named aggregate statistics for one flow. The key list is
/// shared by every record parsed under the same schema.
class FlowFeatures {
 public:
  FlowFeatures() = default;
  explicit FlowFeatures(std::shared_ptr<const FeatureKeys> keys);

  const FeatureKeys& keys() const { return *keys_; }
  const std::shared_ptr<const FeatureKeys>& shared_keys() const { return keys_; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  bool has(std::string_view name) const;
  double get(std::string_view name, double fallback = 0.0) const;
  /// Writes only when the column exists; returns whether it did.
  bool set(std::string_view name, double value);
  double& at(std::size_t i) { return values_[i]; }
  double at(std::size_t i) const { return values_[i]; }

  bool operator==(const FlowFeatures& other) const;

 private:
  std::shared_ptr<const FeatureKeys> keys_;
  std::vector<double> values_;
};

/// One bidirectional flow. Duration lives in the "Flow Duration" feature
/// (microseconds) so that it is perturbed and normalized like any column.
struct RawFlowRecord {
  std::string src_ip;
  std::string dst_ip;
  int src_port = 0;
  int dst_port = 0;
  int protocol = 0;
  double timestamp = 0.0;  ///< seconds since epoch
  FlowFeatures features;
  std::string label;

  double duration_us() const { return features.get(col::kFlowDuration); }
  bool operator==(const RawFlowRecord& other) const = default;
};

struct ClassLabel {
  int index = 0;
  std::string name;
  bool operator==(const ClassLabel&) const = default;
};

/// Raw label string -> class, or Filtered (nullopt) for classes dropped from
/// training and evaluation.
class ClassTable {
 public:
  struct Entry {
    std::string raw;
    std::optional<int> class_index;
  };

  ClassTable(std::vector<std::string> class_names, std::vector<Entry> entries);

  /// The 12 retained CIC-IDS2017 classes (Benign + 11 attacks); Heartbleed,
  /// Infiltration and SQL injection are Filtered.
  static ClassTable cic_ids2017();
  /// Benign + the four generated attack patterns.
  static ClassTable synthetic();
  static ClassTable by_name(std::string_view name);

  int class_count() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& class_names() const { return names_; }
  const std::vector<Entry>& entries() const { return entries_; }
  ClassLabel label(int index) const;

 private:
  std::vector<std::string> names_;
  std::vector<Entry> entries_;
};

using FlowFeatureVector = std::vector<double>;

}  // namespace gnids

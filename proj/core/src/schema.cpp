#include "gnids/schema.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <set>

#include "gnids/csv.hpp"
#include "gnids/error.hpp"

namespace gnids {

namespace {

constexpr std::array kIdentifierColumns = {
    col::kFlowId,     col::kSourceIp, col::kDestinationIp, col::kSourcePort,
    col::kDestinationPort, col::kProtocol, col::kTimestamp,
};

constexpr std::array kSyntheticNumeric = {
    col::kFlowDuration,    col::kTotalFwdPackets,  col::kTotalBwdPackets,
    col::kTotalFwdBytes,   col::kTotalBwdBytes,    col::kFwdLenMax,
    col::kFwdLenMin,       col::kFwdLenMean,       col::kFwdLenStd,
    col::kBwdLenMax,       col::kBwdLenMin,        col::kBwdLenMean,
    col::kBwdLenStd,       col::kFlowBytesPerSec,  col::kFlowPacketsPerSec,
    col::kFlowIatMean,     col::kFlowIatStd,       col::kFwdIatMean,
    col::kFwdIatStd,       col::kBwdIatMean,       col::kBwdIatStd,
    col::kFwdPacketsPerSec, col::kBwdPacketsPerSec, col::kSynFlagCount,
    col::kAckFlagCount,    col::kPshFlagCount,     col::kAveragePacketSize,
};

}  // namespace

bool is_identifier_column(std::string_view name) {
  const std::string trimmed = csv::trim(name);
  return std::any_of(kIdentifierColumns.begin(), kIdentifierColumns.end(),
                     [&](std::string_view id) { return csv::iequals(trimmed, id); });
}

FeatureSchema::FeatureSchema(std::vector<Column> columns, std::vector<std::string> selected)
    : columns_(std::move(columns)), selected_(std::move(selected)) {
  if (selected_.empty()) throw SchemaError("selected_features must not be empty");
  std::set<std::string> seen;
  for (const auto& name : selected_) {
    if (!seen.insert(csv::to_lower(name)).second) {
      throw SchemaError("duplicate selected feature: " + name);
    }
    const auto idx = find(name);
    if (!idx) throw SchemaError("selected feature is not a column: " + name);
    if (columns_[*idx].kind != ColumnKind::Numeric || is_identifier_column(name)) {
      throw SchemaError("selected feature is not a numeric feature column: " + name);
    }
  }
}

FeatureSchema FeatureSchema::infer(std::span<const std::string> header) {
  std::vector<Column> columns;
  std::vector<std::string> selected;
  std::set<std::string> seen;
  for (const auto& raw : header) {
    std::string name = csv::trim(raw);
    if (name.empty()) continue;
    std::string unique = name;
    for (int k = 1; !seen.insert(csv::to_lower(unique)).second; ++k) {
      unique = name + "." + std::to_string(k);
    }
    ColumnKind kind = ColumnKind::Numeric;
    if (csv::iequals(name, col::kLabel)) {
      kind = ColumnKind::Label;
    } else if (is_identifier_column(name)) {
      kind = ColumnKind::Identifier;
    }
    if (kind == ColumnKind::Numeric) selected.push_back(unique);
    columns.push_back({unique, kind});
  }
  return FeatureSchema(std::move(columns), std::move(selected));
}

FeatureSchema FeatureSchema::synthetic_default() {
  std::vector<Column> columns = {
      {std::string(col::kSourceIp), ColumnKind::Identifier},
      {std::string(col::kSourcePort), ColumnKind::Identifier},
      {std::string(col::kDestinationIp), ColumnKind::Identifier},
      {std::string(col::kDestinationPort), ColumnKind::Identifier},
      {std::string(col::kProtocol), ColumnKind::Identifier},
      {std::string(col::kTimestamp), ColumnKind::Identifier},
  };
  std::vector<std::string> selected;
  for (auto name : kSyntheticNumeric) {
    columns.push_back({std::string(name), ColumnKind::Numeric});
    selected.emplace_back(name);
  }
  columns.push_back({std::string(col::kLabel), ColumnKind::Label});
  return FeatureSchema(std::move(columns), std::move(selected));
}

std::vector<std::string> FeatureSchema::numeric_columns() const {
  std::vector<std::string> out;
  for (const auto& c : columns_) {
    if (c.kind == ColumnKind::Numeric) out.push_back(c.name);
  }
  return out;
}

FeatureSchema FeatureSchema::with_selection(std::vector<std::string> selected) const {
  // Normalize spelling to the schema's own column names.
  for (auto& name : selected) {
    if (auto idx = find(name)) name = columns_[*idx].name;
  }
  return FeatureSchema(columns_, std::move(selected));
}

std::optional<std::size_t> FeatureSchema::find(std::string_view name) const {
  const std::string trimmed = csv::trim(name);
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (csv::iequals(columns_[i].name, trimmed)) return i;
  }
  return std::nullopt;
}

FeatureKeys::FeatureKeys(std::vector<std::string> names) : names_(std::move(names)) {
  for (std::size_t i = 0; i < names_.size(); ++i) index_.emplace(names_[i], i);
}

std::optional<std::size_t> FeatureKeys::index(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

FlowFeatures::FlowFeatures(std::shared_ptr<const FeatureKeys> keys)
    : keys_(std::move(keys)), values_(keys_ ? keys_->size() : 0, 0.0) {}

bool FlowFeatures::has(std::string_view name) const {
  return keys_ && keys_->index(name).has_value();
}

double FlowFeatures::get(std::string_view name, double fallback) const {
  if (!keys_) return fallback;
  auto idx = keys_->index(name);
  return idx ? values_[*idx] : fallback;
}

bool FlowFeatures::set(std::string_view name, double value) {
  if (!keys_) return false;
  auto idx = keys_->index(name);
  if (!idx) return false;
  values_[*idx] = value;
  return true;
}

bool FlowFeatures::operator==(const FlowFeatures& other) const {
  if (keys_ != other.keys_) {
    if (!keys_ || !other.keys_ || keys_->names() != other.keys_->names()) return false;
  }
  if (values_.size() != other.values_.size()) return false;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double a = values_[i], b = other.values_[i];
    if (a != b && !(std::isnan(a) && std::isnan(b))) return false;
  }
  return true;
}

ClassTable::ClassTable(std::vector<std::string> class_names, std::vector<Entry> entries)
    : names_(std::move(class_names)), entries_(std::move(entries)) {
  if (names_.empty() || !csv::iequals(names_.front(), "Benign")) {
    throw LabelError("class table must start with Benign at index 0");
  }
  for (const auto& e : entries_) {
    if (e.class_index && (*e.class_index < 0 || *e.class_index >= class_count())) {
      throw LabelError("class table entry out of range: " + e.raw);
    }
  }
}

ClassTable ClassTable::cic_ids2017() {
  std::vector<std::string> names = {
      "Benign",        "SSH-Patator",      "FTP-Patator", "DoS GoldenEye",
      "DoS Hulk",      "DoS slowloris",    "DoS Slowhttptest", "DDoS",
      "Web Attack - Brute Force", "Web Attack - XSS", "Bot", "PortScan",
  };
  std::vector<Entry> entries = {
      {"BENIGN", 0},           {"SSH-Patator", 1},   {"FTP-Patator", 2},
      {"DoS GoldenEye", 3},    {"DoS Hulk", 4},      {"DoS slowloris", 5},
      {"DoS Slowhttptest", 6}, {"DDoS", 7},          {"Bot", 10},
      {"PortScan", 11},        {"Heartbleed", std::nullopt},
      {"Infiltration", std::nullopt},
  };
  // The web-attack labels ship with an en dash that appears in the public
  // CSVs as UTF-8, CP-1252 or the replacement character.
  for (std::string dash : {"-", "\xE2\x80\x93", "\x96", "\xEF\xBF\xBD"}) {
    entries.push_back({"Web Attack " + dash + " Brute Force", 8});
    entries.push_back({"Web Attack " + dash + " XSS", 9});
    entries.push_back({"Web Attack " + dash + " Sql Injection", std::nullopt});
  }
  return ClassTable(std::move(names), std::move(entries));
}

ClassTable ClassTable::synthetic() {
  return ClassTable({"Benign", "DDoS", "PortScan", "NetworkScan", "BruteForce"},
                    {{"BENIGN", 0},
                     {"DDoS", 1},
                     {"PortScan", 2},
                     {"NetworkScan", 3},
                     {"BruteForce", 4}});
}

ClassTable ClassTable::by_name(std::string_view name) {
  if (csv::iequals(name, "cic-ids2017") || csv::iequals(name, "cic_ids2017")) {
    return cic_ids2017();
  }
  if (csv::iequals(name, "synthetic")) return synthetic();
  throw LabelError("unknown class table: " + std::string(name));
}

ClassLabel ClassTable::label(int index) const {
  if (index < 0 || index >= class_count()) {
    throw LabelError("class index out of range: " + std::to_string(index));
  }
  return {index, names_[static_cast<std::size_t>(index)]};
}

}  // namespace gnids

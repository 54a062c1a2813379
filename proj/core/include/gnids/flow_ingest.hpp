#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gnids/schema.hpp"

namespace gnids {

struct ParsedFlows {
  std::vector<RawFlowRecord> records;
  std::size_t row_count = 0;
  std::size_t skipped_blank_rows = 0;
};

/// Reads a CICFlowMeter-style CSV. Every schema column must be present in the
/// header (trim + case-insensitive); extra header columns are ignored.
/// Unparseable numeric cells become NaN and are left to clean_records.
ParsedFlows parse_flow_csv(const std::filesystem::path& path, const FeatureSchema& schema);
ParsedFlows parse_flow_csv(std::istream& in, const FeatureSchema& schema);

/// Reads just the header row and infers a schema from it.
FeatureSchema infer_schema(const std::filesystem::path& path);

/// Writes records under the schema's canonical header. Numeric values are
/// written with shortest round-trip formatting.
void write_flow_csv(std::ostream& out, std::span<const RawFlowRecord> records,
                    const FeatureSchema& schema);
void write_flow_csv(const std::filesystem::path& path, std::span<const RawFlowRecord> records,
                    const FeatureSchema& schema);

/// Accepts numeric seconds or CIC "d/m/Y H:M[:S] [AM|PM]" timestamps (UTC).
std::optional<double> parse_timestamp(std::string_view text);

/// Rate columns are the "<x>/s" columns; their infinities are artifacts of
/// zero-duration flows.
bool is_rate_column(std::string_view name);

struct CleanResult {
  std::vector<RawFlowRecord> records;
  std::size_t replaced = 0;  ///< non-finite rate cells replaced by batch max
  std::size_t dropped = 0;   ///< records removed
};

/// Non-finite rate values -> maximum finite value of that column in the batch
/// (0 when none exists). Records with a non-finite non-rate value, a negative
/// duration or a negative packet count are dropped.
CleanResult clean_records(std::vector<RawFlowRecord> records);

/// Exact match after trimming. nullopt means Filtered. Throws LabelError for
/// labels absent from the table.
std::optional<ClassLabel> map_label(std::string_view raw, const ClassTable& table);

struct NormalizationStats {
  std::vector<std::string> features;
  std::vector<double> mean;
  std::vector<double> stddev;  ///< population standard deviation
  std::vector<bool> constant;
  std::size_t fit_count = 0;
};

/// Per-feature mean and population stddev over schema.selected_features().
NormalizationStats fit_normalizer(std::span<const RawFlowRecord> records,
                                  const FeatureSchema& schema);

/// z-scored values in selected_features order; constant features emit 0.
FlowFeatureVector vectorize(const RawFlowRecord& record, const NormalizationStats& stats,
                            const FeatureSchema& schema);

/// Pre-resolved column slots for vectorizing many records that share keys.
class Vectorizer {
 public:
  Vectorizer(const NormalizationStats& stats, const FeatureSchema& schema);
  FlowFeatureVector operator()(const RawFlowRecord& record) const;
  std::size_t dimension() const { return stats_->features.size(); }

 private:
  const NormalizationStats* stats_;
  mutable const FeatureKeys* cached_keys_ = nullptr;
  mutable std::vector<std::size_t> slots_;
};

nlohmann::json to_json(const NormalizationStats& stats);
NormalizationStats normalization_from_json(const nlohmann::json& j);

}  // namespace gnids

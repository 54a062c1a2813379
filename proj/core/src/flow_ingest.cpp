#include "gnids/flow_ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "gnids/csv.hpp"
#include "gnids/error.hpp"

namespace gnids {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double parse_number(std::string_view text) {
  std::string s = csv::trim(text);
  if (s.empty()) return kNaN;
  std::string_view v = s;
  if (v.front() == '+') v.remove_prefix(1);
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    return kNaN;
  }
  return out;
}

int parse_int_field(std::string_view text, std::string_view column, std::size_t line) {
  const double v = parse_number(text);
  if (!std::isfinite(v) || v != std::floor(v)) {
    throw SchemaError("line " + std::to_string(line) + ": column '" + std::string(column) +
                      "' is not an integer: '" + std::string(text) + "'");
  }
  return static_cast<int>(v);
}

// Howard Hinnant's days_from_civil.
long long days_from_civil(long long y, unsigned m, unsigned d) {
  y -= m <= 2;
  const long long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long long>(doe) - 719468;
}

struct RequiredColumn {
  std::string_view name;
};

constexpr std::string_view kRequired[] = {
    col::kSourceIp,      col::kDestinationIp, col::kSourcePort, col::kDestinationPort,
    col::kProtocol,      col::kTimestamp,     col::kFlowDuration, col::kLabel,
};

}  // namespace

std::optional<double> parse_timestamp(std::string_view text) {
  const std::string s = csv::trim(text);
  if (s.empty()) return std::nullopt;
  const double numeric = parse_number(s);
  if (std::isfinite(numeric)) return numeric;

  int day = 0, month = 0, year = 0, hour = 0, minute = 0, second = 0;
  char ampm[3] = {0, 0, 0};
  int fields = std::sscanf(s.c_str(), "%d/%d/%d %d:%d:%d %2s", &day, &month, &year, &hour,
                           &minute, &second, ampm);
  if (fields < 5) return std::nullopt;
  if (fields == 5) {
    // "d/m/Y H:M AM" leaves the meridiem where seconds would be.
    std::sscanf(s.c_str(), "%d/%d/%d %d:%d %2s", &day, &month, &year, &hour, &minute, ampm);
  }
  if (month < 1 || month > 12 || day < 1 || day > 31 || hour < 0 || hour > 23 ||
      minute < 0 || minute > 59 || second < 0 || second > 60) {
    return std::nullopt;
  }
  const std::string meridiem = csv::to_lower(ampm);
  if (meridiem == "pm" && hour < 12) hour += 12;
  if (meridiem == "am" && hour == 12) hour = 0;
  const long long days = days_from_civil(year, static_cast<unsigned>(month),
                                         static_cast<unsigned>(day));
  return static_cast<double>(days * 86400LL + hour * 3600LL + minute * 60LL + second);
}

bool is_rate_column(std::string_view name) {
  const std::string t = csv::trim(name);
  return t.size() > 2 && t.compare(t.size() - 2, 2, "/s") == 0;
}

FeatureSchema infer_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path.string());
  csv::Reader reader(in);
  std::vector<std::string> header;
  if (!reader.next(header)) throw SchemaError("empty file: " + path.string());
  return FeatureSchema::infer(header);
}

ParsedFlows parse_flow_csv(const std::filesystem::path& path, const FeatureSchema& schema) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path.string());
  return parse_flow_csv(in, schema);
}

ParsedFlows parse_flow_csv(std::istream& in, const FeatureSchema& schema) {
  csv::Reader reader(in);
  std::vector<std::string> header;
  if (!reader.next(header)) throw SchemaError("missing header row");
  for (auto& h : header) h = csv::trim(h);

  auto header_position = [&](std::string_view name) -> std::optional<std::size_t> {
    std::size_t occurrence = 0;
    std::string base(name);
    // "Fwd Header Length.1" refers to the second "Fwd Header Length".
    if (auto dot = base.rfind('.'); dot != std::string::npos && dot + 1 < base.size() &&
                                    std::all_of(base.begin() + static_cast<long>(dot) + 1,
                                                base.end(), ::isdigit)) {
      bool exact = std::any_of(header.begin(), header.end(),
                               [&](const std::string& h) { return csv::iequals(h, base); });
      if (!exact) {
        occurrence = static_cast<std::size_t>(std::stoul(base.substr(dot + 1)));
        base.resize(dot);
      }
    }
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (csv::iequals(header[i], base)) {
        if (occurrence == 0) return i;
        --occurrence;
      }
    }
    return std::nullopt;
  };

  for (auto required : kRequired) {
    if (!schema.find(required) || !header_position(required)) {
      throw SchemaError("missing required column: " + std::string(required));
    }
  }

  std::vector<std::size_t> positions;
  for (const auto& c : schema.columns()) {
    auto pos = header_position(c.name);
    if (!pos) throw SchemaError("missing column: " + c.name);
    positions.push_back(*pos);
  }

  auto numeric_names = schema.numeric_columns();
  auto keys = std::make_shared<const FeatureKeys>(numeric_names);
  std::vector<std::size_t> numeric_positions;
  for (const auto& name : numeric_names) numeric_positions.push_back(*header_position(name));

  const auto pos_of = [&](std::string_view name) { return *header_position(name); };
  const std::size_t p_src = pos_of(col::kSourceIp), p_dst = pos_of(col::kDestinationIp),
                    p_sport = pos_of(col::kSourcePort), p_dport = pos_of(col::kDestinationPort),
                    p_proto = pos_of(col::kProtocol), p_ts = pos_of(col::kTimestamp),
                    p_label = pos_of(col::kLabel);

  ParsedFlows out;
  std::vector<std::string> row;
  while (reader.next(row)) {
    if (std::all_of(row.begin(), row.end(),
                    [](const std::string& f) { return csv::trim(f).empty(); })) {
      ++out.skipped_blank_rows;
      continue;
    }
    ++out.row_count;
    const std::size_t line = reader.line_number();
    if (row.size() < header.size()) row.resize(header.size());

    RawFlowRecord r;
    r.src_ip = csv::trim(row[p_src]);
    r.dst_ip = csv::trim(row[p_dst]);
    r.src_port = parse_int_field(row[p_sport], col::kSourcePort, line);
    r.dst_port = parse_int_field(row[p_dport], col::kDestinationPort, line);
    r.protocol = parse_int_field(row[p_proto], col::kProtocol, line);
    auto ts = parse_timestamp(row[p_ts]);
    if (!ts) {
      throw SchemaError("line " + std::to_string(line) + ": unparseable timestamp '" +
                        row[p_ts] + "'");
    }
    r.timestamp = *ts;
    r.label = csv::trim(row[p_label]);
    r.features = FlowFeatures(keys);
    for (std::size_t k = 0; k < numeric_positions.size(); ++k) {
      r.features.at(k) = parse_number(row[numeric_positions[k]]);
    }
    out.records.push_back(std::move(r));
  }
  return out;
}

void write_flow_csv(std::ostream& out, std::span<const RawFlowRecord> records,
                    const FeatureSchema& schema) {
  std::vector<std::string> fields;
  for (const auto& c : schema.columns()) fields.push_back(c.name);
  csv::write_row(out, fields);
  for (const auto& r : records) {
    fields.clear();
    for (const auto& c : schema.columns()) {
      const auto& n = c.name;
      if (csv::iequals(n, col::kSourceIp)) {
        fields.push_back(r.src_ip);
      } else if (csv::iequals(n, col::kDestinationIp)) {
        fields.push_back(r.dst_ip);
      } else if (csv::iequals(n, col::kSourcePort)) {
        fields.push_back(std::to_string(r.src_port));
      } else if (csv::iequals(n, col::kDestinationPort)) {
        fields.push_back(std::to_string(r.dst_port));
      } else if (csv::iequals(n, col::kProtocol)) {
        fields.push_back(std::to_string(r.protocol));
      } else if (csv::iequals(n, col::kTimestamp)) {
        fields.push_back(csv::format_double(r.timestamp));
      } else if (c.kind == ColumnKind::Label) {
        fields.push_back(r.label);
      } else if (c.kind == ColumnKind::Numeric) {
        fields.push_back(csv::format_double(r.features.get(n, kNaN)));
      } else {
        fields.emplace_back();  // identifier we do not carry, e.g. Flow ID
      }
    }
    csv::write_row(out, fields);
  }
}

void write_flow_csv(const std::filesystem::path& path, std::span<const RawFlowRecord> records,
                    const FeatureSchema& schema) {
  std::ofstream out(path);
  if (!out) throw SchemaError("cannot write " + path.string());
  write_flow_csv(out, records, schema);
}

CleanResult clean_records(std::vector<RawFlowRecord> records) {
  CleanResult result;
  if (records.empty()) return result;

  const auto keys = records.front().features.shared_keys();
  const std::size_t width = keys ? keys->size() : 0;
  for (const auto& r : records) {
    if (r.features.shared_keys() != keys &&
        (!r.features.shared_keys() || r.features.keys().names() != keys->names())) {
      throw SchemaError("clean_records: records carry different feature columns");
    }
  }

  std::vector<bool> rate(width, false);
  for (std::size_t k = 0; k < width; ++k) rate[k] = is_rate_column(keys->names()[k]);
  const auto dur = keys ? keys->index(col::kFlowDuration) : std::nullopt;
  const auto fwd = keys ? keys->index(col::kTotalFwdPackets) : std::nullopt;
  const auto bwd = keys ? keys->index(col::kTotalBwdPackets) : std::nullopt;

  std::vector<double> max_finite(width, -std::numeric_limits<double>::infinity());
  for (const auto& r : records) {
    for (std::size_t k = 0; k < width; ++k) {
      const double v = r.features.at(k);
      if (rate[k] && std::isfinite(v)) max_finite[k] = std::max(max_finite[k], v);
    }
  }
  for (auto& m : max_finite) {
    if (!std::isfinite(m)) m = 0.0;
  }

  result.records.reserve(records.size());
  for (auto& r : records) {
    bool drop = false;
    for (std::size_t k = 0; k < width && !drop; ++k) {
      if (!rate[k] && !std::isfinite(r.features.at(k))) drop = true;
    }
    if (!drop && dur && r.features.at(*dur) < 0) drop = true;
    if (!drop && fwd && r.features.at(*fwd) < 0) drop = true;
    if (!drop && bwd && r.features.at(*bwd) < 0) drop = true;
    if (drop) {
      ++result.dropped;
      continue;
    }
    for (std::size_t k = 0; k < width; ++k) {
      if (rate[k] && !std::isfinite(r.features.at(k))) {
        r.features.at(k) = max_finite[k];
        ++result.replaced;
      }
    }
    result.records.push_back(std::move(r));
  }
  return result;
}

std::optional<ClassLabel> map_label(std::string_view raw, const ClassTable& table) {
  const std::string trimmed = csv::trim(raw);
  for (const auto& e : table.entries()) {
    if (e.raw == trimmed) {
      if (!e.class_index) return std::nullopt;
      return table.label(*e.class_index);
    }
  }
  throw LabelError("unknown label: '" + trimmed + "'");
}

NormalizationStats fit_normalizer(std::span<const RawFlowRecord> records,
                                  const FeatureSchema& schema) {
  if (records.empty()) throw UsageError("fit_normalizer: no records");
  NormalizationStats stats;
  stats.features = schema.selected_features();
  const std::size_t k = stats.features.size();
  std::vector<double> mean(k, 0.0), m2(k, 0.0);
  std::vector<std::size_t> slots(k);
  const FeatureKeys* cached = nullptr;

  std::size_t n = 0;
  for (const auto& r : records) {
    if (&r.features.keys() != cached) {
      cached = &r.features.keys();
      for (std::size_t i = 0; i < k; ++i) {
        auto idx = cached->index(stats.features[i]);
        if (!idx) throw SchemaError("record lacks feature: " + stats.features[i]);
        slots[i] = *idx;
      }
    }
    ++n;
    for (std::size_t i = 0; i < k; ++i) {
      const double x = r.features.at(slots[i]);
      const double delta = x - mean[i];
      mean[i] += delta / static_cast<double>(n);
      m2[i] += delta * (x - mean[i]);
    }
  }
  stats.mean = mean;
  stats.stddev.resize(k);
  stats.constant.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    stats.stddev[i] = std::sqrt(std::max(0.0, m2[i] / static_cast<double>(n)));
    stats.constant[i] = stats.stddev[i] == 0.0;
  }
  stats.fit_count = n;
  return stats;
}

Vectorizer::Vectorizer(const NormalizationStats& stats, const FeatureSchema& schema)
    : stats_(&stats) {
  const auto& selected = schema.selected_features();
  bool match = selected.size() == stats.features.size();
  for (std::size_t i = 0; match && i < selected.size(); ++i) {
    match = csv::iequals(selected[i], stats.features[i]);
  }
  if (!match) {
    throw SchemaError("normalization stats were fitted on a different feature selection");
  }
  if (stats.mean.size() != stats.features.size() ||
      stats.stddev.size() != stats.features.size() ||
      stats.constant.size() != stats.features.size()) {
    throw SchemaError("normalization stats are malformed");
  }
}

FlowFeatureVector Vectorizer::operator()(const RawFlowRecord& record) const {
  const auto& st = *stats_;
  const std::size_t k = st.features.size();
  if (&record.features.keys() != cached_keys_) {
    slots_.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
      auto idx = record.features.keys().index(st.features[i]);
      if (!idx) throw SchemaError("record lacks feature: " + st.features[i]);
      slots_[i] = *idx;
    }
    cached_keys_ = &record.features.keys();
  }
  FlowFeatureVector out(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    if (st.constant[i]) continue;
    out[i] = (record.features.at(slots_[i]) - st.mean[i]) / st.stddev[i];
  }
  return out;
}

FlowFeatureVector vectorize(const RawFlowRecord& record, const NormalizationStats& stats,
                            const FeatureSchema& schema) {
  return Vectorizer(stats, schema)(record);
}

nlohmann::json to_json(const NormalizationStats& stats) {
  nlohmann::json features = nlohmann::json::object();
  nlohmann::json order = nlohmann::json::array();
  for (std::size_t i = 0; i < stats.features.size(); ++i) {
    features[stats.features[i]] = {{"mean", stats.mean[i]},
                                   {"std", stats.stddev[i]},
                                   {"constant", static_cast<bool>(stats.constant[i])}};
    order.push_back(stats.features[i]);
  }
  return {{"fit_count", stats.fit_count}, {"order", order}, {"features", features}};
}

NormalizationStats normalization_from_json(const nlohmann::json& j) {
  NormalizationStats s;
  s.fit_count = j.at("fit_count").get<std::size_t>();
  for (const auto& name : j.at("order")) {
    const auto& f = j.at("features").at(name.get<std::string>());
    s.features.push_back(name.get<std::string>());
    s.mean.push_back(f.at("mean").get<double>());
    s.stddev.push_back(f.at("std").get<double>());
    s.constant.push_back(f.at("constant").get<bool>());
  }
  return s;
}

}  // namespace gnids

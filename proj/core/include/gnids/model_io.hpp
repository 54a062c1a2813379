#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "gnids/tape.hpp"

namespace gnids {

inline constexpr int kModelFormatVersion = 1;

/// FNV-1a 64 of the compact dump, as 16 hex digits.
std::string checksum_hex(std::string_view text);

/// Writes {format_version, kind, body..., checksum}. The checksum covers the
/// compact dump of the document without the checksum field.
void write_envelope(const std::string& path, std::string_view kind, nlohmann::json body);

/// Returns the document with the checksum field removed. Throws VersionError
/// on a format version mismatch, ChecksumError on a truncated, unparseable or
/// altered file, UsageError on a kind mismatch.
nlohmann::json read_envelope(const std::string& path, std::string_view kind);

nlohmann::json tensor_to_json(const Tensor& t);
Tensor tensor_from_json(const nlohmann::json& j);

nlohmann::json params_to_json(const ParameterStore& store);
/// Restores values into a store whose names and shapes are already set.
void params_from_json(const nlohmann::json& j, ParameterStore& store);

}  // namespace gnids

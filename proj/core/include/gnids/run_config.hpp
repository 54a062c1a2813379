#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gnids/adversarial.hpp"
#include "gnids/baselines/mlp.hpp"
#include "gnids/baselines/random_forest.hpp"
#include "gnids/gnn_model.hpp"
#include "gnids/training.hpp"

namespace gnids {

enum class ConfigType { Int, Double, Bool, String, List };

struct ConfigKey {
  std::string key;
  ConfigType type;
  std::string default_value;
  std::string help;
  std::vector<std::string> choices;  ///< String keys only; empty = free text
};

/// Every recognised key with its type and default, in documentation order.
const std::vector<ConfigKey>& config_schema();

/// Flat dotted-key configuration. Text format: one `key = value` per line,
/// `#` starts a comment, lists are comma-separated.
class RunConfig {
 public:
  /// All keys at their defaults.
  RunConfig();

  /// Throws ConfigError listing every unknown key, malformed line and
  /// invalid value in the file.
  static RunConfig from_file(const std::filesystem::path& path);
  static RunConfig from_string(std::string_view text);

  /// Unknown keys throw ConfigError.
  void set(std::string_view key, std::string value);
  const std::string& get(std::string_view key) const;
  std::int64_t get_int(std::string_view key) const;
  double get_double(std::string_view key) const;
  bool get_bool(std::string_view key) const;
  std::vector<std::string> get_list(std::string_view key) const;
  std::vector<double> get_doubles(std::string_view key) const;
  std::uint64_t seed() const;

  /// Every violated key with a reason; empty when valid.
  std::vector<std::string> violations() const;
  /// Throws ConfigError when violations() is non-empty.
  void validate() const;

  const std::map<std::string, std::string, std::less<>>& values() const { return values_; }
  /// Canonical text form, keys sorted.
  void write(std::ostream& out) const;

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

/// Writes every key with type, default and help as comments.
void write_config_reference(std::ostream& out);

GnnConfig gnn_config(const RunConfig& c, std::size_t feature_count, std::size_t class_count);
TrainConfig train_config(const RunConfig& c);
Id3Config id3_config(const RunConfig& c);
ForestConfig forest_config(const RunConfig& c);
MlpConfig mlp_config(const RunConfig& c);
std::vector<PerturbationSpec> sweep_grid(const RunConfig& c);
PerturbMode sweep_mode(const RunConfig& c);

}  // namespace gnids

#include "gnids/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "gnids/csv.hpp"
#include "gnids/error.hpp"

namespace gnids {

namespace {

using T = ConfigType;

const ConfigKey* find_key(std::string_view key) {
  for (const auto& k : config_schema()) {
    if (k.key == key) return &k;
  }
  return nullptr;
}

bool parse_int(std::string_view s, std::int64_t& out) {
  s = std::string_view(s).substr(0);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size() && !s.empty();
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

bool parse_bool(std::string_view s, bool& out) {
  if (csv::iequals(s, "true") || s == "1" || csv::iequals(s, "yes")) {
    out = true;
    return true;
  }
  if (csv::iequals(s, "false") || s == "0" || csv::iequals(s, "no")) {
    out = false;
    return true;
  }
  return false;
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = s.find(',', start);
    const std::size_t end = comma == std::string_view::npos ? s.size() : comma;
    std::string item = csv::trim(s.substr(start, end - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// Type-level problem with a value, or empty.
std::string type_problem(const ConfigKey& k, const std::string& v) {
  switch (k.type) {
    case T::Int: {
      std::int64_t x;
      if (!parse_int(v, x)) return k.key + ": expected an integer, got '" + v + "'";
      break;
    }
    case T::Double: {
      double x;
      if (!parse_double(v, x) || !std::isfinite(x)) {
        return k.key + ": expected a number, got '" + v + "'";
      }
      break;
    }
    case T::Bool: {
      bool x;
      if (!parse_bool(v, x)) return k.key + ": expected true or false, got '" + v + "'";
      break;
    }
    case T::String:
      if (!k.choices.empty() &&
          std::find(k.choices.begin(), k.choices.end(), v) == k.choices.end()) {
        std::string all;
        for (const auto& c : k.choices) all += (all.empty() ? "" : "|") + c;
        return k.key + ": expected one of " + all + ", got '" + v + "'";
      }
      break;
    case T::List:
      break;
  }
  return {};
}

}  // namespace

const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> schema = {
      {"seed", T::Int, "1", "master seed; every stage derives its own stream from it", {}},
      {"data.source", T::String, "synthetic", "where flows come from", {"synthetic", "csv"}},
      {"data.csv_paths", T::List, "", "flow CSV files (data.source = csv)", {}},
      {"data.class_table", T::String, "auto", "label table; auto picks by data source",
       {"auto", "cic_ids2017", "synthetic"}},
      {"data.features", T::List, "all", "model input columns, or all numeric columns", {}},
      {"synth.windows", T::Int, "2000", "generated windows", {}},
      {"synth.flows_per_window", T::Int, "100", "flows per generated window", {}},
      {"synth.ddos_weight", T::Double, "0.3", "per-window probability of a DDoS instance", {}},
      {"synth.portscan_weight", T::Double, "0.3", "per-window probability of a port scan", {}},
      {"synth.networkscan_weight", T::Double, "0.3", "per-window probability of a network scan",
       {}},
      {"synth.bruteforce_weight", T::Double, "0.3", "per-window probability of a brute force",
       {}},
      {"graph.window_mode", T::String, "count", "window by flow count or by time",
       {"count", "time"}},
      {"graph.window_size", T::Int, "0",
       "flows per graph sample; 0 = synth.flows_per_window for synthetic data, 200 for CSV", {}},
      {"graph.window_seconds", T::Double, "60", "window length when graph.window_mode = time", {}},
      {"graph.benign_drop_rate", T::Double, "0.9",
       "probability of dropping a benign-only training graph", {}},
      {"split.train_fraction", T::Double, "0.8", "share of graph samples used for training", {}},
      {"gnn.hidden_dim", T::Int, "128", "hidden state width n", {}},
      {"gnn.iterations", T::Int, "8", "message-passing iterations T", {}},
      {"gnn.message_hidden", T::Int, "128", "hidden width of the message MLPs", {}},
      {"gnn.readout_hidden1", T::Int, "128", "first readout hidden width", {}},
      {"gnn.readout_hidden2", T::Int, "64", "second readout hidden width", {}},
      {"train.models", T::List, "gnn,id3,rf,mlp", "models trained by `train`", {}},
      {"train.max_epochs", T::Int, "200", "GNN epoch limit", {}},
      {"train.batch_size", T::Int, "8", "graphs per GNN optimizer step", {}},
      {"train.patience", T::Int, "10", "epochs without validation F1 gain before stopping", {}},
      {"train.learning_rate", T::Double, "0.001", "Adam learning rate (GNN)", {}},
      {"train.beta1", T::Double, "0.9", "Adam beta1", {}},
      {"train.beta2", T::Double, "0.999", "Adam beta2", {}},
      {"train.epsilon", T::Double, "1e-08", "Adam epsilon", {}},
      {"train.holdout_runs", T::Int, "1", "repeated random holdouts; 1 = single split", {}},
      {"id3.max_depth", T::Int, "20", "decision tree depth limit", {}},
      {"id3.min_leaf", T::Int, "5", "minimum samples per leaf", {}},
      {"rf.trees", T::Int, "50", "forest size", {}},
      {"rf.feature_fraction", T::Double, "0", "features per split as a fraction; 0 = sqrt(F)/F",
       {}},
      {"rf.bootstrap", T::Bool, "true", "bootstrap resampling per tree", {}},
      {"rf.max_depth", T::Int, "20", "forest tree depth limit", {}},
      {"rf.min_leaf", T::Int, "5", "forest minimum samples per leaf", {}},
      {"mlp.hidden1", T::Int, "128", "MLP first hidden width", {}},
      {"mlp.hidden2", T::Int, "64", "MLP second hidden width", {}},
      {"mlp.epochs", T::Int, "20", "MLP training epochs", {}},
      {"mlp.batch_size", T::Int, "256", "flows per MLP optimizer step", {}},
      {"mlp.learning_rate", T::Double, "0.001", "Adam learning rate (MLP)", {}},
      {"sweep.models", T::List, "gnn,id3,rf,mlp", "models evaluated by `sweep`", {}},
      {"sweep.packet_size", T::List, "0,50,100,150,200", "packet size shifts in bytes", {}},
      {"sweep.iat", T::List, "0,0.5,1,1.5,2", "inter-arrival shifts in seconds", {}},
      {"sweep.mode", T::String, "consistent", "recompute dependent rates or shift raw columns",
       {"consistent", "raw-shift"}},
      {"output.dir", T::String, "runs/default", "run directory for all outputs", {}},
  };
  return schema;
}

RunConfig::RunConfig() {
  for (const auto& k : config_schema()) values_[k.key] = k.default_value;
}

RunConfig RunConfig::from_string(std::string_view text) {
  RunConfig c;
  std::vector<std::string> bad;
  std::istringstream in{std::string(text)};
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = csv::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      bad.push_back("line " + std::to_string(n) + ": expected 'key = value'");
      continue;
    }
    const std::string key = csv::trim(std::string_view(t).substr(0, eq));
    std::string value = csv::trim(std::string_view(t).substr(eq + 1));
    if (!find_key(key)) {
      bad.push_back(key + ": unknown key (line " + std::to_string(n) + ")");
      continue;
    }
    c.values_[key] = std::move(value);
  }
  for (auto& v : c.violations()) bad.push_back(std::move(v));
  if (!bad.empty()) throw ConfigError(std::move(bad));
  return c;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"config file " + path.string() + " cannot be read"});
  std::stringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

void RunConfig::set(std::string_view key, std::string value) {
  if (!find_key(key)) throw ConfigError({std::string(key) + ": unknown key"});
  values_[std::string(key)] = std::move(value);
}

const std::string& RunConfig::get(std::string_view key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError({std::string(key) + ": unknown key"});
  return it->second;
}

std::int64_t RunConfig::get_int(std::string_view key) const {
  std::int64_t v;
  if (!parse_int(get(key), v)) throw ConfigError({std::string(key) + ": expected an integer"});
  return v;
}

double RunConfig::get_double(std::string_view key) const {
  double v;
  if (!parse_double(get(key), v)) throw ConfigError({std::string(key) + ": expected a number"});
  return v;
}

bool RunConfig::get_bool(std::string_view key) const {
  bool v;
  if (!parse_bool(get(key), v)) throw ConfigError({std::string(key) + ": expected true or false"});
  return v;
}

std::vector<std::string> RunConfig::get_list(std::string_view key) const {
  return split_list(get(key));
}

std::vector<double> RunConfig::get_doubles(std::string_view key) const {
  std::vector<double> out;
  for (const auto& s : get_list(key)) {
    double v;
    if (!parse_double(s, v)) throw ConfigError({std::string(key) + ": '" + s + "' is not a number"});
    out.push_back(v);
  }
  return out;
}

std::uint64_t RunConfig::seed() const { return static_cast<std::uint64_t>(get_int("seed")); }

std::vector<std::string> RunConfig::violations() const {
  std::vector<std::string> bad;
  // Range checks below skip keys whose value failed the type check.
  std::set<std::string, std::less<>> mistyped;
  for (const auto& k : config_schema()) {
    auto p = type_problem(k, get(k.key));
    if (!p.empty()) {
      bad.push_back(std::move(p));
      mistyped.insert(k.key);
    }
  }
  auto typed = [&](std::string_view key) { return !mistyped.contains(key); };
  auto number = [&](std::string_view key) {
    return typed(key) ? get_double(key) : std::numeric_limits<double>::quiet_NaN();
  };

  auto at_least = [&](std::string_view key, std::int64_t lo) {
    if (typed(key) && get_int(key) < lo) bad.push_back(std::string(key) + ": must be >= " + std::to_string(lo));
  };
  at_least("seed", 0);
  at_least("synth.windows", 1);
  at_least("synth.flows_per_window", 1);
  at_least("graph.window_size", 0);
  at_least("gnn.hidden_dim", 1);
  at_least("gnn.iterations", 1);
  at_least("gnn.message_hidden", 1);
  at_least("gnn.readout_hidden1", 1);
  at_least("gnn.readout_hidden2", 1);
  at_least("train.max_epochs", 1);
  at_least("train.batch_size", 1);
  at_least("train.patience", 1);
  at_least("train.holdout_runs", 1);
  at_least("id3.max_depth", 0);
  at_least("id3.min_leaf", 1);
  at_least("rf.trees", 1);
  at_least("rf.max_depth", 0);
  at_least("rf.min_leaf", 1);
  at_least("mlp.hidden1", 1);
  at_least("mlp.hidden2", 1);
  at_least("mlp.epochs", 1);
  at_least("mlp.batch_size", 1);

  for (auto key : {"synth.ddos_weight", "synth.portscan_weight", "synth.networkscan_weight",
                   "synth.bruteforce_weight"}) {
    if (typed(key) && !(get_double(key) > 0.0)) bad.push_back(std::string(key) + ": must be > 0");
  }
  const double drop = number("graph.benign_drop_rate");
  if (typed("graph.benign_drop_rate") && !(drop >= 0.0 && drop < 1.0)) bad.push_back("graph.benign_drop_rate: must lie in [0, 1)");
  const double frac = number("split.train_fraction");
  if (typed("split.train_fraction") && !(frac > 0.0 && frac < 1.0)) bad.push_back("split.train_fraction: must lie in (0, 1)");
  if (typed("graph.window_seconds") && !(get_double("graph.window_seconds") > 0.0)) {
    bad.push_back("graph.window_seconds: must be > 0");
  }
  for (auto key : {"train.learning_rate", "mlp.learning_rate", "train.epsilon"}) {
    if (typed(key) && !(get_double(key) > 0.0)) bad.push_back(std::string(key) + ": must be > 0");
  }
  for (auto key : {"train.beta1", "train.beta2"}) {
    const double b = number(key);
    if (typed(key) && !(b >= 0.0 && b < 1.0)) bad.push_back(std::string(key) + ": must lie in [0, 1)");
  }
  const double ff = number("rf.feature_fraction");
  if (typed("rf.feature_fraction") && !(ff >= 0.0 && ff <= 1.0)) bad.push_back("rf.feature_fraction: must lie in [0, 1]");

  const auto paths = get_list("data.csv_paths");
  if (get("data.source") == "csv") {
    if (paths.empty()) bad.push_back("data.csv_paths: required when data.source = csv");
    for (const auto& p : paths) {
      if (!std::filesystem::exists(p)) bad.push_back("data.csv_paths: " + p + " does not exist");
    }
  } else if (!paths.empty()) {
    bad.push_back("data.csv_paths: must be empty when data.source = synthetic (one source only)");
  }

  for (auto key : {"train.models", "sweep.models"}) {
    const auto models = get_list(key);
    if (models.empty()) bad.push_back(std::string(key) + ": at least one model required");
    for (const auto& m : models) {
      if (m != "gnn" && m != "id3" && m != "rf" && m != "mlp") {
        bad.push_back(std::string(key) + ": unknown model '" + m + "' (gnn|id3|rf|mlp)");
      }
    }
  }
  for (auto key : {"sweep.packet_size", "sweep.iat"}) {
    std::vector<double> grid;
    bool numeric = true;
    for (const auto& s : get_list(key)) {
      double v;
      if (!parse_double(s, v)) {
        bad.push_back(std::string(key) + ": '" + s + "' is not a number");
        numeric = false;
      } else {
        grid.push_back(v);
      }
    }
    if (!numeric) continue;
    if (std::any_of(grid.begin(), grid.end(), [](double v) { return v < 0.0; })) {
      bad.push_back(std::string(key) + ": magnitudes must be >= 0");
    }
    if (!std::is_sorted(grid.begin(), grid.end())) {
      bad.push_back(std::string(key) + ": magnitudes must be sorted ascending");
    }
    if (!grid.empty() && std::find(grid.begin(), grid.end(), 0.0) == grid.end()) {
      bad.push_back(std::string(key) + ": must include 0");
    }
  }
  if (get("output.dir").empty()) bad.push_back("output.dir: must not be empty");
  return bad;
}

void RunConfig::validate() const {
  auto bad = violations();
  if (!bad.empty()) throw ConfigError(std::move(bad));
}

void RunConfig::write(std::ostream& out) const {
  for (const auto& [k, v] : values_) out << k << " = " << v << '\n';
}

void write_config_reference(std::ostream& out) {
  static constexpr const char* kTypeNames[] = {"int", "number", "bool", "string", "list"};
  for (const auto& k : config_schema()) {
    out << "# " << k.help << " (" << kTypeNames[static_cast<int>(k.type)];
    if (!k.choices.empty()) {
      out << ":";
      for (std::size_t i = 0; i < k.choices.size(); ++i) out << (i ? "|" : " ") << k.choices[i];
    }
    out << ")\n" << k.key << " = " << k.default_value << "\n";
  }
}

GnnConfig gnn_config(const RunConfig& c, std::size_t feature_count, std::size_t class_count) {
  GnnConfig g;
  g.feature_count = feature_count;
  g.hidden_dim = static_cast<std::size_t>(c.get_int("gnn.hidden_dim"));
  g.iterations = static_cast<int>(c.get_int("gnn.iterations"));
  g.message_hidden = static_cast<std::size_t>(c.get_int("gnn.message_hidden"));
  g.readout_hidden1 = static_cast<std::size_t>(c.get_int("gnn.readout_hidden1"));
  g.readout_hidden2 = static_cast<std::size_t>(c.get_int("gnn.readout_hidden2"));
  g.class_count = class_count;
  return g;
}

TrainConfig train_config(const RunConfig& c) {
  TrainConfig t;
  t.max_epochs = static_cast<int>(c.get_int("train.max_epochs"));
  t.batch_size = static_cast<std::size_t>(c.get_int("train.batch_size"));
  t.patience = static_cast<int>(c.get_int("train.patience"));
  t.adam.learning_rate = c.get_double("train.learning_rate");
  t.adam.beta1 = c.get_double("train.beta1");
  t.adam.beta2 = c.get_double("train.beta2");
  t.adam.epsilon = c.get_double("train.epsilon");
  return t;
}

Id3Config id3_config(const RunConfig& c) {
  return {static_cast<int>(c.get_int("id3.max_depth")),
          static_cast<std::size_t>(c.get_int("id3.min_leaf"))};
}

ForestConfig forest_config(const RunConfig& c) {
  ForestConfig f;
  f.tree_count = static_cast<std::size_t>(c.get_int("rf.trees"));
  f.feature_fraction = c.get_double("rf.feature_fraction");
  f.bootstrap = c.get_bool("rf.bootstrap");
  f.tree = {static_cast<int>(c.get_int("rf.max_depth")),
            static_cast<std::size_t>(c.get_int("rf.min_leaf"))};
  return f;
}

MlpConfig mlp_config(const RunConfig& c) {
  MlpConfig m;
  m.hidden1 = static_cast<std::size_t>(c.get_int("mlp.hidden1"));
  m.hidden2 = static_cast<std::size_t>(c.get_int("mlp.hidden2"));
  m.epochs = static_cast<int>(c.get_int("mlp.epochs"));
  m.batch_size = static_cast<std::size_t>(c.get_int("mlp.batch_size"));
  m.adam.learning_rate = c.get_double("mlp.learning_rate");
  m.adam.beta1 = c.get_double("train.beta1");
  m.adam.beta2 = c.get_double("train.beta2");
  m.adam.epsilon = c.get_double("train.epsilon");
  return m;
}

std::vector<PerturbationSpec> sweep_grid(const RunConfig& c) {
  std::vector<PerturbationSpec> grid;
  for (double v : c.get_doubles("sweep.packet_size")) {
    grid.push_back({PerturbationKind::PacketSize, v});
  }
  for (double v : c.get_doubles("sweep.iat")) grid.push_back({PerturbationKind::InterArrival, v});
  return grid;
}

PerturbMode sweep_mode(const RunConfig& c) { return perturb_mode_from_string(c.get("sweep.mode")); }

}  // namespace gnids

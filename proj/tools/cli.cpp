#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <ostream>
#include <set>
#include <sstream>

#include "gnids/adversarial.hpp"
#include "gnids/csv.hpp"
#include "gnids/error.hpp"
#include "gnids/model_io.hpp"
#include "gnids/pipeline.hpp"

#ifndef GNIDS_VERSION
#define GNIDS_VERSION "unknown"
#endif

namespace gnids {

namespace fs = std::filesystem;

namespace {

/// Exclusive claim on an output directory for the lifetime of a subcommand.
class DirLock {
 public:
  explicit DirLock(fs::path dir) : path_(std::move(dir) / ".lock") {
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (!f) {
      throw UsageError("output directory is in use (lock file " + path_.string() +
                       " exists; remove it if no other run is active)");
    }
    std::fclose(f);
  }
  ~DirLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  fs::path path_;
};

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

struct Context {
  const RunConfig& config;
  fs::path dir;
  std::ostream& out;
  std::ostream& err;
  std::ofstream log_file;
  std::string command;

  void log(const std::string& msg) {
    err << "gnids " << command << ": " << msg << "\n";
    log_file << utc_now() << " " << command << ": " << msg << "\n";
    log_file.flush();
  }
  LogFn logger() {
    return [this](const std::string& m) { log(m); };
  }
  fs::path file(const std::string& name) const { return dir / name; }
};

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write " + path.string());
  return f;
}

void write_manifest(const Context& ctx) {
  nlohmann::ordered_json m;
  m["tool"] = "gnids";
  m["version"] = GNIDS_VERSION;
  m["model_format_version"] = kModelFormatVersion;
  m["seed"] = ctx.config.seed();
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : ctx.config.values()) cfg[k] = v;
  m["config"] = std::move(cfg);
  open_out(ctx.file("manifest.json")) << m.dump(2) << "\n";
}

fs::path model_path(const Context& ctx, const std::string& kind) {
  return ctx.file("model_" + kind + ".json");
}

void cmd_ingest(Context& ctx) {
  const Dataset d = load_dataset(ctx.config, ctx.logger());
  write_flow_csv(ctx.file("flows.csv"), d.data.records, d.schema);

  nlohmann::ordered_json s;
  s["raw_rows"] = d.raw_rows;
  s["kept"] = d.data.records.size();
  s["dropped"] = d.dropped;
  s["rate_cells_replaced"] = d.replaced;
  s["filtered"] = d.filtered;
  s["windows"] = d.data.windows.size();
  s["features"] = d.schema.numeric_columns();
  std::vector<std::size_t> counts(static_cast<std::size_t>(d.classes.class_count()), 0);
  for (int y : d.data.labels) ++counts[static_cast<std::size_t>(y)];
  nlohmann::ordered_json per_class = nlohmann::ordered_json::object();
  for (std::size_t k = 0; k < counts.size(); ++k) per_class[d.classes.class_names()[k]] = counts[k];
  s["classes"] = std::move(per_class);
  open_out(ctx.file("ingest_stats.json")) << s.dump(2) << "\n";
  ctx.out << "ingested " << d.data.records.size() << " flows into " << ctx.file("flows.csv").string()
          << "\n";
}

void cmd_synth(Context& ctx) {
  Rng rng = make_rng(ctx.config.seed(), "synth");
  const auto ds = generate_dataset(synthetic_mix(ctx.config),
                                   static_cast<int>(ctx.config.get_int("synth.windows")),
                                   static_cast<int>(ctx.config.get_int("synth.flows_per_window")),
                                   rng);
  const auto records = ds.flatten();
  write_flow_csv(ctx.file("synth_flows.csv"), records, FeatureSchema::synthetic_default());

  auto inv = open_out(ctx.file("synth_inventory.csv"));
  csv::write_row(inv, {"window", "label", "flows"});
  for (std::size_t w = 0; w < ds.inventory.size(); ++w) {
    for (const auto& [label, n] : ds.inventory[w].label_counts) {
      csv::write_row(inv, {std::to_string(w), label, std::to_string(n)});
    }
  }
  ctx.out << "synthesized " << records.size() << " flows in " << ds.windows.size()
          << " windows into " << ctx.file("synth_flows.csv").string() << "\n";
}

void cmd_graphs(Context& ctx) {
  const Dataset d = load_dataset(ctx.config, ctx.logger());
  const HoldoutSplit split = run_split(ctx.config, d.data.windows.size());
  const Partition part = make_partition(d, split, ctx.config);
  open_out(ctx.file("normalization.json")) << to_json(part.stats).dump(2) << "\n";

  std::set<int> kept;
  for (const auto& s : part.train) kept.insert(s.window_id);
  const Vectorizer vectorize(part.stats, d.schema);
  const auto all_train = build_samples(part.train_records, vectorize);

  auto f = open_out(ctx.file("graphs.csv"));
  csv::write_row(f, {"window_id", "partition", "hosts", "flows", "edges", "max_host_degree",
                     "components", "benign_only", "kept"});
  auto emit = [&](const GraphSample& s, const char* partition, bool keep) {
    const GraphStats g = graph_stats(s.graph);
    csv::write_row(f, {std::to_string(s.window_id), partition, std::to_string(g.hosts),
                       std::to_string(g.flows), std::to_string(g.edges),
                       std::to_string(g.max_host_degree), std::to_string(g.components),
                       s.benign_only ? "1" : "0", keep ? "1" : "0"});
  };
  for (const auto& s : all_train) emit(s, "train", kept.count(s.window_id) > 0);
  for (const auto& s : part.val) emit(s, "val", true);
  ctx.out << "train graphs " << part.train.size() << " of " << part.train_before_downsampling
          << " kept, validation graphs " << part.val.size() << "\n";
}

void cmd_train(Context& ctx) {
  const Dataset d = load_dataset(ctx.config, ctx.logger());
  const auto kinds = ctx.config.get_list("train.models");
  const int runs = static_cast<int>(ctx.config.get_int("train.holdout_runs"));
  const auto c = static_cast<std::size_t>(d.classes.class_count());
  const auto& names = d.classes.class_names();

  std::map<std::string, std::vector<std::pair<std::string, Metrics>>> rows;
  for (int r = 0; r < runs; ++r) {
    const Partition part = make_partition(d, run_split(ctx.config, d.data.windows.size(), r),
                                          ctx.config, r);
    if (r == 0) open_out(ctx.file("normalization.json")) << to_json(part.stats).dump(2) << "\n";
    ctx.log("run " + std::to_string(r) + ": " + std::to_string(part.train.size()) +
            " training graphs, " + std::to_string(part.val.size()) + " validation graphs");
    for (const auto& kind : kinds) {
      TrainedModel tm = train_model(kind, ctx.config, part, c, r, ctx.logger());
      const Metrics m = evaluate(*tm.model, part.val, c);
      ctx.log(kind + " run " + std::to_string(r) + " validation weighted F1 " +
              csv::format_double(m.weighted_f1));
      rows[kind].emplace_back(std::to_string(r), m);
      if (r == 0) {
        tm.model->save(model_path(ctx, kind).string());
        auto h = open_out(ctx.file("history_" + kind + ".csv"));
        write_history_csv(h, tm.history);
      }
    }
  }

  for (const auto& kind : kinds) {
    auto f = open_out(ctx.file("metrics_" + kind + ".csv"));
    write_metrics_csv(f, names, rows[kind]);
    std::vector<double> f1;
    for (const auto& [run, m] : rows[kind]) f1.push_back(m.weighted_f1);
    const ScoreSummary s = summarize(f1);
    ctx.out << kind << " weighted F1 " << csv::format_double(s.mean);
    if (runs > 1) ctx.out << " +/- " << csv::format_double(s.stddev) << " over " << runs << " runs";
    ctx.out << "\n";
  }
}

std::vector<std::unique_ptr<Classifier>> load_models(const std::vector<std::string>& paths) {
  std::vector<std::unique_ptr<Classifier>> models;
  for (const auto& p : paths) {
    if (!fs::exists(p)) throw UsageError("model file not found: " + p + " (run `train` first)");
    models.push_back(load_classifier(p));
  }
  return models;
}

void check_feature_count(const Classifier& model, std::size_t expected) {
  std::size_t got = expected;
  if (auto* g = dynamic_cast<const GnnClassifier*>(&model)) got = g->model().config.feature_count;
  if (auto* t = dynamic_cast<const TreeClassifier*>(&model)) got = t->tree().feature_count;
  if (auto* f = dynamic_cast<const ForestClassifier*>(&model)) {
    if (!f->forest().trees.empty()) got = f->forest().trees.front().feature_count;
  }
  if (auto* m = dynamic_cast<const MlpClassifier*>(&model)) got = m->model().feature_count;
  if (got != expected) {
    throw ShapeError(model.kind() + " model expects " + std::to_string(got) +
                     " features but the data has " + std::to_string(expected));
  }
}

void cmd_eval(Context& ctx, std::vector<std::string> paths) {
  if (paths.empty()) {
    for (const auto& kind : ctx.config.get_list("train.models")) {
      paths.push_back(model_path(ctx, kind).string());
    }
  }
  const auto models = load_models(paths);
  const Dataset d = load_dataset(ctx.config, ctx.logger());
  const Partition part =
      make_partition(d, run_split(ctx.config, d.data.windows.size()), ctx.config);
  const auto c = static_cast<std::size_t>(d.classes.class_count());

  std::vector<std::pair<std::string, Metrics>> rows;
  for (const auto& m : models) {
    check_feature_count(*m, part.stats.features.size());
    rows.emplace_back(m->kind(), evaluate(*m, part.val, c));
    ctx.out << m->kind() << " weighted F1 " << csv::format_double(rows.back().second.weighted_f1)
            << "\n";
  }
  auto f = open_out(ctx.file("eval_metrics.csv"));
  write_metrics_csv(f, d.classes.class_names(), rows, "model");
}

void cmd_sweep(Context& ctx) {
  const auto kinds = ctx.config.get_list("sweep.models");
  std::vector<std::string> paths;
  for (const auto& kind : kinds) paths.push_back(model_path(ctx, kind).string());
  const auto models = load_models(paths);
  const Dataset d = load_dataset(ctx.config, ctx.logger());
  const Partition part =
      make_partition(d, run_split(ctx.config, d.data.windows.size()), ctx.config);

  std::vector<NamedModel> named;
  for (std::size_t i = 0; i < models.size(); ++i) {
    check_feature_count(*models[i], part.stats.features.size());
    named.push_back({kinds[i], models[i].get()});
  }
  const Vectorizer vectorize(part.stats, d.schema);
  const auto points =
      robustness_sweep(named, part.val_records, vectorize, sweep_grid(ctx.config),
                       static_cast<std::size_t>(d.classes.class_count()), sweep_mode(ctx.config));
  auto f = open_out(ctx.file("curves.csv"));
  write_curves_csv(f, d.classes.class_names(), points);
  ctx.out << "wrote " << points.size() << " curve points to " << ctx.file("curves.csv").string()
          << "\n";
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path.string());
  csv::Reader reader(in);
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> fields;
  while (reader.next(fields)) rows.push_back(fields);
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name,
                   const fs::path& path) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw SchemaError(path.string() + " has no column " + name);
  return static_cast<std::size_t>(it - header.begin());
}

double number(const std::string& s) {
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw SchemaError("not a number: '" + s + "'");
  }
}

void cmd_report(Context& ctx) {
  std::vector<std::string> kinds;
  for (const auto& kind : ctx.config.get_list("train.models")) {
    if (fs::exists(ctx.file("metrics_" + kind + ".csv"))) kinds.push_back(kind);
  }
  const bool have_curves = fs::exists(ctx.file("curves.csv"));
  if (kinds.empty() && !have_curves) {
    throw UsageError("nothing to report in " + ctx.dir.string() +
                     " (run `train` and `sweep` first)");
  }

  if (!kinds.empty()) {
    // class -> model -> F1 per run, classes in first-seen order.
    std::vector<std::string> classes;
    std::map<std::string, std::map<std::string, std::vector<double>>> f1;
    for (const auto& kind : kinds) {
      const fs::path p = ctx.file("metrics_" + kind + ".csv");
      const auto rows = read_csv(p);
      if (rows.empty()) throw SchemaError(p.string() + " is empty");
      const std::size_t ci = column(rows[0], "class", p);
      const std::size_t fi = column(rows[0], "f1", p);
      for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& name = rows[r].at(ci);
        if (std::find(classes.begin(), classes.end(), name) == classes.end()) {
          classes.push_back(name);
        }
        f1[name][kind].push_back(number(rows[r].at(fi)));
      }
    }
    std::stable_partition(classes.begin(), classes.end(),
                          [](const std::string& c) { return c != "weighted"; });
    auto f = open_out(ctx.file("report_table.csv"));
    std::vector<std::string> header = {"class"};
    for (const auto& k : kinds) {
      header.push_back(k + "_f1");
      header.push_back(k + "_f1_std");
    }
    csv::write_row(f, header);
    for (const auto& name : classes) {
      std::vector<std::string> row = {name};
      for (const auto& k : kinds) {
        const auto& v = f1[name][k];
        if (v.empty()) {
          row.insert(row.end(), {"", ""});
          continue;
        }
        const ScoreSummary s = summarize(v);
        row.push_back(csv::format_double(s.mean));
        row.push_back(csv::format_double(s.stddev));
      }
      csv::write_row(f, row);
    }
  }

  if (have_curves) {
    const fs::path p = ctx.file("curves.csv");
    const auto rows = read_csv(p);
    if (rows.empty()) throw SchemaError(p.string() + " is empty");
    const std::size_t mi = column(rows[0], "model", p);
    const std::size_t ki = column(rows[0], "perturbation_kind", p);
    const std::size_t xi = column(rows[0], "magnitude", p);
    const std::size_t fi = column(rows[0], "weighted_f1", p);
    std::vector<std::string> models;
    std::vector<std::pair<std::string, std::string>> points;  // (kind, magnitude) in order
    std::map<std::pair<std::string, std::string>, std::map<std::string, std::string>> value;
    std::map<std::pair<std::string, std::string>, std::string> baseline;  // (model, kind) -> F1 at 0
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const auto& row = rows[r];
      const auto key = std::make_pair(row.at(ki), row.at(xi));
      if (std::find(models.begin(), models.end(), row.at(mi)) == models.end()) {
        models.push_back(row.at(mi));
      }
      if (std::find(points.begin(), points.end(), key) == points.end()) points.push_back(key);
      value[key][row.at(mi)] = row.at(fi);
      if (number(row.at(xi)) == 0.0) baseline[{row.at(mi), row.at(ki)}] = row.at(fi);
    }
    auto f = open_out(ctx.file("report_curves.csv"));
    std::vector<std::string> header = {"perturbation_kind", "magnitude"};
    for (const auto& m : models) {
      header.push_back(m + "_weighted_f1");
      header.push_back(m + "_drop");
    }
    csv::write_row(f, header);
    for (const auto& key : points) {
      std::vector<std::string> row = {key.first, key.second};
      for (const auto& m : models) {
        auto it = value[key].find(m);
        if (it == value[key].end()) {
          row.insert(row.end(), {"", ""});
          continue;
        }
        row.push_back(it->second);
        auto b = baseline.find({m, key.first});
        row.push_back(b == baseline.end()
                          ? ""
                          : csv::format_double(number(b->second) - number(it->second)));
      }
      csv::write_row(f, row);
    }
  }
  ctx.out << "wrote report for " << ctx.dir.string() << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graph-based network intrusion detection", "gnids"};
  app.set_version_flag("--version", std::string(GNIDS_VERSION));
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "key = value configuration file")
      ->check(CLI::ExistingFile);
  std::vector<std::pair<std::string, std::string>> overrides;
  for (const auto& key : config_schema()) {
    app.add_option_function<std::string>(
           "--" + key.key,
           [&overrides, k = key.key](const std::string& v) { overrides.emplace_back(k, v); },
           key.help + " (default " + (key.default_value.empty() ? "\"\"" : key.default_value) +
               ")")
        ->group("Configuration keys");
  }

  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {
      {"ingest", "clean and label flow records, write flows.csv and ingest_stats.json"},
      {"synth", "generate a synthetic flow dataset as synth_flows.csv"},
      {"graphs", "window, build and downsample graphs, write graphs.csv"},
      {"train", "train the configured models, write model, history and metrics files"},
      {"eval", "evaluate saved models on the validation partition"},
      {"sweep", "perturbation sweep of saved models, write curves.csv"},
      {"report", "aggregate run outputs into report_table.csv and report_curves.csv"},
      {"config", "print every configuration key with type, default and help"},
  };
  std::vector<std::string> eval_models;
  for (const auto& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    if (std::string(s.name) == "eval") {
      sub->add_option("--model", eval_models, "model file (repeatable; default: trained models)");
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << GNIDS_VERSION << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  if (command == "config") {
    write_config_reference(out);
    return 0;
  }

  try {
    RunConfig config = config_path.empty() ? RunConfig() : RunConfig::from_file(config_path);
    std::vector<std::string> bad;
    for (const auto& [k, v] : overrides) {
      try {
        config.set(k, v);
      } catch (const ConfigError& e) {
        bad.insert(bad.end(), e.violations().begin(), e.violations().end());
      }
    }
    for (auto& v : config.violations()) bad.push_back(std::move(v));
    if (!bad.empty()) throw ConfigError(bad);

    const fs::path dir = config.get("output.dir");
    fs::create_directories(dir);
    DirLock lock(dir);
    Context ctx{config, dir, out, err, std::ofstream(dir / "run.log", std::ios::app), command};
    ctx.log("start");
    write_manifest(ctx);
    if (command == "ingest") cmd_ingest(ctx);
    else if (command == "synth") cmd_synth(ctx);
    else if (command == "graphs") cmd_graphs(ctx);
    else if (command == "train") cmd_train(ctx);
    else if (command == "eval") cmd_eval(ctx, eval_models);
    else if (command == "sweep") cmd_sweep(ctx);
    else if (command == "report") cmd_report(ctx);
    ctx.log("done");
    return 0;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const SpecError& e) {
    err << "error: invalid synthetic specification: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace gnids

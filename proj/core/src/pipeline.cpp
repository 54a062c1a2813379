#include "gnids/pipeline.hpp"

#include <algorithm>

#include "gnids/error.hpp"
#include "gnids/synthetic_traffic.hpp"

namespace gnids {

namespace {

void note(const LogFn& log, const std::string& msg) {
  if (log) log(msg);
}

bool labels_fit(const ClassTable& table, std::span<const RawFlowRecord> records) {
  try {
    for (const auto& r : records) (void)map_label(r.label, table);
    return true;
  } catch (const LabelError&) {
    return false;
  }
}

}  // namespace

std::string stage_label(const std::string& stage, int run) {
  return run == 0 ? stage : stage + ".run" + std::to_string(run);
}

std::vector<MixEntry> synthetic_mix(const RunConfig& config) {
  std::vector<MixEntry> mix = default_mix();
  for (auto& e : mix) {
    switch (e.spec.kind) {
      case PatternKind::DDoS: e.weight = config.get_double("synth.ddos_weight"); break;
      case PatternKind::PortScan: e.weight = config.get_double("synth.portscan_weight"); break;
      case PatternKind::NetworkScan:
        e.weight = config.get_double("synth.networkscan_weight");
        break;
      case PatternKind::BruteForce:
        e.weight = config.get_double("synth.bruteforce_weight");
        break;
      case PatternKind::Benign: break;
    }
  }
  return mix;
}

std::size_t effective_window_size(const RunConfig& config) {
  const auto w = config.get_int("graph.window_size");
  if (w > 0) return static_cast<std::size_t>(w);
  return config.get("data.source") == "synthetic"
             ? static_cast<std::size_t>(config.get_int("synth.flows_per_window"))
             : 200;
}

Dataset load_dataset(const RunConfig& config, const LogFn& log) {
  config.validate();
  std::vector<RawFlowRecord> records;
  FeatureSchema schema = FeatureSchema::synthetic_default();
  std::string table_name = config.get("data.class_table");

  if (config.get("data.source") == "synthetic") {
    Rng rng = make_rng(config.seed(), "synth");
    auto ds = generate_dataset(synthetic_mix(config),
                               static_cast<int>(config.get_int("synth.windows")),
                               static_cast<int>(config.get_int("synth.flows_per_window")), rng);
    records = ds.flatten();
    if (table_name == "auto") table_name = "synthetic";
    note(log, "synthesized " + std::to_string(records.size()) + " flows in " +
                  std::to_string(ds.windows.size()) + " windows");
  } else {
    const auto paths = config.get_list("data.csv_paths");
    schema = infer_schema(paths.front());
    for (const auto& p : paths) {
      auto parsed = parse_flow_csv(p, schema);
      note(log, "parsed " + std::to_string(parsed.records.size()) + " flows from " + p);
      std::move(parsed.records.begin(), parsed.records.end(), std::back_inserter(records));
    }
    if (table_name == "auto") {
      table_name = labels_fit(ClassTable::synthetic(), records) ? "synthetic" : "cic_ids2017";
    }
  }
  const auto features = config.get_list("data.features");
  if (!(features.size() == 1 && features.front() == "all")) {
    schema = schema.with_selection(features);
  }

  Dataset d{ClassTable::by_name(table_name), schema, {}, records.size(), 0, 0, 0};
  CleanResult cleaned = clean_records(std::move(records));
  d.replaced = cleaned.replaced;
  d.dropped = cleaned.dropped;

  std::vector<std::pair<RawFlowRecord, int>> kept;
  kept.reserve(cleaned.records.size());
  for (auto& r : cleaned.records) {
    auto label = map_label(r.label, d.classes);
    if (!label) {
      ++d.filtered;
      continue;
    }
    kept.emplace_back(std::move(r), label->index);
  }
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.first.timestamp < b.first.timestamp;
  });
  for (auto& [r, y] : kept) {
    d.data.records.push_back(std::move(r));
    d.data.labels.push_back(y);
  }
  if (d.data.records.empty()) throw UsageError("no flows left after cleaning and filtering");

  d.data.windows = config.get("graph.window_mode") == "time"
                       ? window_flows_by_time(d.data.records,
                                              config.get_double("graph.window_seconds"))
                       : window_flows(d.data.records.size(), effective_window_size(config));
  for (std::size_t w = 0; w < d.data.windows.size(); ++w) {
    d.data.window_ids.push_back(static_cast<int>(w));
  }
  note(log, std::to_string(d.data.records.size()) + " flows kept (" + std::to_string(d.dropped) +
                " dropped, " + std::to_string(d.filtered) + " filtered, " +
                std::to_string(d.replaced) + " rate cells replaced), " +
                std::to_string(d.data.windows.size()) + " windows");
  return d;
}

HoldoutSplit run_split(const RunConfig& config, std::size_t window_count, int run) {
  // Runs draw consecutive splits from one stream, as repeated_holdout does.
  Rng rng = make_rng(config.seed(), "split");
  HoldoutSplit split;
  for (int r = 0; r <= run; ++r) {
    split = holdout_split(window_count, config.get_double("split.train_fraction"), rng);
  }
  return split;
}

Partition make_partition(const Dataset& data, const HoldoutSplit& split, const RunConfig& config,
                         int run) {
  Partition p;
  p.train_records = select_windows(data.data, split.train);
  p.val_records = select_windows(data.data, split.val);
  p.stats = fit_normalizer(p.train_records.records, data.schema);
  Vectorizer vectorize(p.stats, data.schema);
  auto train = build_samples(p.train_records, vectorize);
  p.train_before_downsampling = train.size();
  Rng rng = make_rng(config.seed(), stage_label("downsample", run));
  p.train = downsample_benign(std::move(train), config.get_double("graph.benign_drop_rate"), rng);
  p.val = build_samples(p.val_records, vectorize);
  return p;
}

TrainedModel train_model(const std::string& kind, const RunConfig& config, const Partition& part,
                         std::size_t class_count, int run, const LogFn& log) {
  TrainedModel out;
  Rng rng = make_rng(config.seed(), stage_label("train." + kind, run));
  if (kind == "gnn") {
    const std::size_t k = part.stats.features.size();
    auto result = train_gnn(part.train, part.val, gnn_config(config, k, class_count),
                            train_config(config), rng, [&](const EpochRecord& e) {
                              note(log, "gnn epoch " + std::to_string(e.epoch) + " train_loss " +
                                            std::to_string(e.train_loss) + " val_f1 " +
                                            std::to_string(e.val_weighted_f1));
                            });
    note(log, "gnn best epoch " + std::to_string(result.best_epoch));
    out.history = std::move(result.history);
    out.model = std::make_unique<GnnClassifier>(std::move(result.model));
    return out;
  }
  const LabeledVectors data = flow_vectors(part.train, class_count);
  if (kind == "id3") {
    out.model = std::make_unique<TreeClassifier>(train_id3(data, id3_config(config)));
  } else if (kind == "rf") {
    out.model = std::make_unique<ForestClassifier>(train_random_forest(data, forest_config(config), rng));
  } else if (kind == "mlp") {
    std::vector<double> losses;
    out.model = std::make_unique<MlpClassifier>(train_mlp(data, mlp_config(config), rng, &losses));
    for (std::size_t e = 0; e < losses.size(); ++e) {
      out.history.push_back({static_cast<int>(e + 1), losses[e], 0.0, 0.0});
    }
  } else {
    throw UsageError("unknown model kind '" + kind + "'");
  }
  note(log, kind + " trained on " + std::to_string(data.size()) + " flows");
  return out;
}

}  // namespace gnids

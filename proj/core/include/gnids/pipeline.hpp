#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gnids/classifier.hpp"
#include "gnids/flow_ingest.hpp"
#include "gnids/run_config.hpp"
#include "gnids/samples.hpp"
#include "gnids/synthetic_traffic.hpp"
#include "gnids/training.hpp"

namespace gnids {

using LogFn = std::function<void(const std::string&)>;

/// Cleaned, labelled, time-ordered flows partitioned into windows.
struct Dataset {
  ClassTable classes;
  FeatureSchema schema;
  LabeledRecords data;
  std::size_t raw_rows = 0;
  std::size_t replaced = 0;  ///< non-finite rate cells replaced
  std::size_t dropped = 0;   ///< records removed by cleaning
  std::size_t filtered = 0;  ///< records of excluded classes
};

/// Synthesizes or parses the configured flows, cleans them, maps labels,
/// removes excluded classes, orders by timestamp and windows the result.
Dataset load_dataset(const RunConfig& config, const LogFn& log = {});

/// The generator mix described by the synth.* keys.
std::vector<MixEntry> synthetic_mix(const RunConfig& config);

/// Flows per graph sample after resolving graph.window_size = 0.
std::size_t effective_window_size(const RunConfig& config);

/// The training/validation split of one run (run 0 is the default split).
/// Matches the split repeated_holdout hands to run `run` when seeded with
/// the "split" stream.
HoldoutSplit run_split(const RunConfig& config, std::size_t window_count, int run = 0);

/// One train/validation partition. Normalization is fitted on the training
/// windows only; benign-only training graphs are then downsampled.
struct Partition {
  NormalizationStats stats;
  LabeledRecords train_records;
  LabeledRecords val_records;
  std::vector<GraphSample> train;  ///< after benign downsampling
  std::vector<GraphSample> val;    ///< complete validation partition
  std::size_t train_before_downsampling = 0;
};

Partition make_partition(const Dataset& data, const HoldoutSplit& split, const RunConfig& config,
                         int run = 0);

struct TrainedModel {
  std::unique_ptr<Classifier> model;
  std::vector<EpochRecord> history;  ///< GNN: per epoch; MLP: train_loss only
};

/// Trains one of gnn | id3 | rf | mlp on the partition's training graphs.
/// Baselines see every flow of those graphs as an independent vector.
TrainedModel train_model(const std::string& kind, const RunConfig& config, const Partition& part,
                         std::size_t class_count, int run = 0, const LogFn& log = {});

/// Seed stream label for a stage, suffixed per holdout run after the first.
std::string stage_label(const std::string& stage, int run);

}  // namespace gnids

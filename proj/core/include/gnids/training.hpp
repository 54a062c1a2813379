#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gnids/classifier.hpp"
#include "gnids/gnn_model.hpp"
#include "gnids/metrics.hpp"
#include "gnids/optim.hpp"

namespace gnids {

struct TrainConfig {
  int max_epochs = 200;
  std::size_t batch_size = 8;  ///< graphs per optimizer step
  AdamConfig adam;
  int patience = 10;  ///< epochs without a validation F1 gain before stopping
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_weighted_f1 = 0.0;
};

struct TrainResult {
  GnnModel model;  ///< parameters of the best validation epoch
  std::vector<EpochRecord> history;
  int best_epoch = -1;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Shuffled mini-batches of graphs; the batch loss is the mean per-flow
/// cross-entropy over all flows of the batch. Early stopping on validation
/// weighted F1 (validation is skipped when `val` is empty and the last epoch
/// is kept). Non-finite values raise TrainingDiverged with epoch and batch.
TrainResult train_gnn(std::span<const GraphSample> train, std::span<const GraphSample> val,
                      const GnnConfig& model_config, const TrainConfig& config, Rng& rng,
                      const EpochCallback& on_epoch = {});

/// Mean per-flow loss and gradients of one batch, flow-weighted across graphs.
double batch_gradients(const GnnModel& model, std::span<const GraphSample* const> batch,
                       Gradients& grads);

struct HoldoutSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
};

/// Random split with exactly round(n * train_fraction) training indices
/// (clamped so both sides are non-empty); each side sorted ascending.
HoldoutSplit holdout_split(std::size_t n, double train_fraction, Rng& rng);

struct ScoreSummary {
  double mean = 0.0;
  double stddev = 0.0;  ///< sample standard deviation, 0 for a single run
};

struct HoldoutResult {
  std::vector<Metrics> runs;
  ScoreSummary weighted_f1;
  std::vector<ScoreSummary> per_class_f1;
};

ScoreSummary summarize(std::span<const double> values);

/// Runs `run_fn` on `runs` independent splits drawn from `rng`. Throws
/// UsageError for fewer than 2 samples or runs < 1.
HoldoutResult repeated_holdout(std::size_t sample_count, int runs, double train_fraction, Rng& rng,
                               const std::function<Metrics(const HoldoutSplit&, int run)>& run_fn);

void write_history_csv(std::ostream& out, std::span<const EpochRecord> history);

}  // namespace gnids

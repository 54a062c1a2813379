#include "gnids/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gnids/csv.hpp"
#include "gnids/error.hpp"
#include "gnids/layers.hpp"

namespace gnids {

double batch_gradients(const GnnModel& model, std::span<const GraphSample* const> batch,
                       Gradients& grads) {
  std::size_t total = 0;
  for (const auto* s : batch) total += s->graph.flow_count();
  if (total == 0) throw UsageError("batch has no flows");
  double loss = 0.0;
  for (const auto* s : batch) {
    const auto& g = s->graph;
    std::vector<int> labels;
    labels.reserve(g.flow_count());
    for (const auto& f : g.flows) labels.push_back(f.label);
    const double weight = static_cast<double>(g.flow_count()) / static_cast<double>(total);
    Tape tape;
    auto vars = bind(tape, model.params);
    Var ce = softmax_cross_entropy(forward_logits(tape, g, vars, model.config), labels);
    Var weighted = scale(ce, weight);
    loss += weighted.value().item();
    tape.backward(weighted, grads);
  }
  return loss;
}

TrainResult train_gnn(std::span<const GraphSample> train, std::span<const GraphSample> val,
                      const GnnConfig& model_config, const TrainConfig& config, Rng& rng,
                      const EpochCallback& on_epoch) {
  if (train.empty()) throw UsageError("train_gnn: no training samples");
  if (config.max_epochs < 1) throw UsageError("train.max_epochs must be >= 1");
  if (config.batch_size < 1) throw UsageError("train.batch_size must be >= 1");

  TrainResult result;
  GnnModel model = make_gnn_model(model_config, rng);
  AdamState adam = AdamState::init(model.params, config.adam);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  double best_f1 = -1.0;
  int since_best = 0;

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[uniform_index(rng, i)]);
    }
    double flow_loss = 0.0;
    std::size_t flows = 0;
    int batch = 0;
    for (std::size_t b = 0; b < order.size(); b += config.batch_size, ++batch) {
      std::vector<const GraphSample*> members;
      for (std::size_t i = b; i < std::min(order.size(), b + config.batch_size); ++i) {
        members.push_back(&train[order[i]]);
      }
      std::size_t batch_flows = 0;
      for (const auto* s : members) batch_flows += s->graph.flow_count();
      Gradients grads = zero_gradients(model.params);
      try {
        const double loss = batch_gradients(model, members, grads);
        if (!std::isfinite(loss)) throw NumericError("non-finite batch loss");
        for (const auto& g : grads) {
          if (!g.all_finite()) throw NumericError("non-finite gradient");
        }
        adam_step(model.params, grads, adam);
        flow_loss += loss * static_cast<double>(batch_flows);
        flows += batch_flows;
      } catch (const NumericError& e) {
        throw TrainingDiverged("training diverged at epoch " + std::to_string(epoch + 1) +
                                   ", batch " + std::to_string(batch + 1) + ": " + e.what(),
                               epoch + 1, batch + 1);
      }
    }

    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.train_loss = flow_loss / static_cast<double>(flows);
    if (!val.empty()) {
      GnnClassifier current(model);
      const Metrics m = evaluate(current, val, model_config.class_count);
      rec.val_loss = m.loss;
      rec.val_weighted_f1 = m.weighted_f1;
    }
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (val.empty()) {
      result.model = model;
      result.best_epoch = rec.epoch;
      continue;
    }
    if (rec.val_weighted_f1 > best_f1) {
      best_f1 = rec.val_weighted_f1;
      result.model = model;
      result.best_epoch = rec.epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  return result;
}

HoldoutSplit holdout_split(std::size_t n, double train_fraction, Rng& rng) {
  if (n < 2) throw UsageError("holdout split needs at least 2 samples, got " + std::to_string(n));
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw UsageError("train fraction must lie in (0, 1)");
  }
  auto k = static_cast<std::size_t>(std::llround(static_cast<double>(n) * train_fraction));
  k = std::clamp<std::size_t>(k, 1, n - 1);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + uniform_index(rng, n - i)]);
  HoldoutSplit s;
  s.train.assign(idx.begin(), idx.begin() + static_cast<long>(k));
  s.val.assign(idx.begin() + static_cast<long>(k), idx.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  return s;
}

ScoreSummary summarize(std::span<const double> values) {
  ScoreSummary s;
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

HoldoutResult repeated_holdout(std::size_t sample_count, int runs, double train_fraction, Rng& rng,
                               const std::function<Metrics(const HoldoutSplit&, int run)>& run_fn) {
  if (runs < 1) throw UsageError("repeated holdout needs runs >= 1");
  if (sample_count < 2) throw UsageError("repeated holdout needs at least 2 samples");
  HoldoutResult r;
  for (int i = 0; i < runs; ++i) {
    const HoldoutSplit split = holdout_split(sample_count, train_fraction, rng);
    r.runs.push_back(run_fn(split, i));
  }
  std::vector<double> f1;
  for (const auto& m : r.runs) f1.push_back(m.weighted_f1);
  r.weighted_f1 = summarize(f1);
  const std::size_t c = r.runs.front().per_class.size();
  for (std::size_t k = 0; k < c; ++k) {
    std::vector<double> v;
    for (const auto& m : r.runs) v.push_back(m.per_class[k].f1);
    r.per_class_f1.push_back(summarize(v));
  }
  return r;
}

void write_history_csv(std::ostream& out, std::span<const EpochRecord> history) {
  csv::write_row(out, {"epoch", "train_loss", "val_loss", "val_weighted_f1"});
  for (const auto& h : history) {
    csv::write_row(out, {std::to_string(h.epoch), csv::format_double(h.train_loss),
                         csv::format_double(h.val_loss), csv::format_double(h.val_weighted_f1)});
  }
}

}  // namespace gnids

#include "gnids/baselines/mlp.hpp"

#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "gnids/error.hpp"
#include "gnids/layers.hpp"
#include "gnids/model_io.hpp"

namespace gnids {

namespace {

Tensor glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t(fan_in, fan_out);
  for (double& v : t.data()) v = (2.0 * uniform01(rng) - 1.0) * limit;
  return t;
}

}  // namespace

Tensor stack_rows(const std::vector<FlowFeatureVector>& xs) {
  const std::size_t f = xs.empty() ? 0 : xs.front().size();
  Tensor t(xs.size(), f);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i].size() != f) throw ShapeError("stack_rows: vectors have differing lengths");
    std::copy(xs[i].begin(), xs[i].end(), t.row(i).begin());
  }
  return t;
}

MlpModel make_mlp(std::size_t feature_count, std::size_t class_count, const MlpConfig& config,
                  Rng& rng) {
  if (feature_count < 1 || class_count < 1 || config.hidden1 < 1 || config.hidden2 < 1) {
    throw UsageError("MLP widths must be >= 1");
  }
  MlpModel m;
  m.feature_count = feature_count;
  m.class_count = class_count;
  m.params.add("mlp", "w1", glorot(feature_count, config.hidden1, rng));
  m.params.add("mlp", "b1", Tensor(std::vector<std::size_t>{config.hidden1}, 0.0));
  m.params.add("mlp", "w2", glorot(config.hidden1, config.hidden2, rng));
  m.params.add("mlp", "b2", Tensor(std::vector<std::size_t>{config.hidden2}, 0.0));
  m.params.add("mlp", "w3", glorot(config.hidden2, class_count, rng));
  m.params.add("mlp", "b3", Tensor(std::vector<std::size_t>{class_count}, 0.0));
  return m;
}

Var MlpModel::logits(Tape& tape, const std::vector<Var>& v, const Tensor& x) const {
  if (x.cols() != feature_count) {
    throw ShapeError("MLP expects " + std::to_string(feature_count) + " features, got " +
                     x.shape_string());
  }
  Var h = tape.constant(x);
  h = dense(h, v[0], v[1], Activation::ReLU);
  h = dense(h, v[2], v[3], Activation::ReLU);
  return dense(h, v[4], v[5], Activation::None);
}

Tensor MlpModel::logits(const Tensor& x) const {
  if (params.size() != 6) throw UsageError("MLP is untrained");
  Tape tape(false);
  auto vars = bind(tape, params);
  return logits(tape, vars, x).value();
}

Prediction MlpModel::predict(std::span<const double> x) const {
  Tensor t(1, x.size());
  std::copy(x.begin(), x.end(), t.data().begin());
  return predictions_from_logits(logits(t)).front();
}

std::vector<Prediction> MlpModel::predict_batch(const std::vector<FlowFeatureVector>& xs) const {
  if (xs.empty()) return {};
  return predictions_from_logits(logits(stack_rows(xs)));
}

MlpModel train_mlp(const LabeledVectors& data, const MlpConfig& config, Rng& rng,
                   std::vector<double>* history) {
  if (data.size() == 0) throw UsageError("cannot train on an empty dataset");
  if (config.epochs < 1 || config.batch_size < 1) {
    throw UsageError("MLP epochs and batch size must be >= 1");
  }
  MlpModel model = make_mlp(data.x.front().size(), data.class_count, config, rng);
  AdamState adam = AdamState::init(model.params, config.adam);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[uniform_index(rng, i)]);
    }
    double loss_sum = 0.0;
    int batch = 0;
    for (std::size_t b = 0; b < order.size(); b += config.batch_size, ++batch) {
      const std::size_t e = std::min(order.size(), b + config.batch_size);
      Tensor x(e - b, model.feature_count);
      std::vector<int> y;
      for (std::size_t i = b; i < e; ++i) {
        const auto& v = data.x[order[i]];
        std::copy(v.begin(), v.end(), x.row(i - b).begin());
        y.push_back(data.y[order[i]]);
      }
      Gradients grads = zero_gradients(model.params);
      try {
        Tape tape;
        auto vars = bind(tape, model.params);
        Var loss = softmax_cross_entropy(model.logits(tape, vars, x), y);
        loss_sum += loss.value().item() * static_cast<double>(e - b);
        tape.backward(loss, grads);
        adam_step(model.params, grads, adam);
        for (const auto& p : model.params) {
          if (!p.value.all_finite()) throw NumericError("parameter " + p.name + " is not finite");
        }
      } catch (const NumericError& err) {
        throw TrainingDiverged(std::string("MLP training diverged: ") + err.what(), epoch, batch);
      }
    }
    if (history) history->push_back(loss_sum / static_cast<double>(order.size()));
  }
  return model;
}

void save_mlp(const MlpModel& model, const std::string& path) {
  write_envelope(path, "mlp",
                 {{"feature_count", model.feature_count},
                  {"class_count", model.class_count},
                  {"hidden1", model.params[1].value.size()},
                  {"hidden2", model.params[3].value.size()},
                  {"parameters", params_to_json(model.params)}});
}

MlpModel load_mlp(const std::string& path) {
  auto doc = read_envelope(path, "mlp");
  try {
    MlpConfig c;
    c.hidden1 = doc.at("hidden1").get<std::size_t>();
    c.hidden2 = doc.at("hidden2").get<std::size_t>();
    Rng rng(0);
    MlpModel m = make_mlp(doc.at("feature_count").get<std::size_t>(),
                          doc.at("class_count").get<std::size_t>(), c, rng);
    params_from_json(doc.at("parameters"), m.params);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ChecksumError(path + ": malformed MLP: " + e.what());
  }
}

}  // namespace gnids

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "gnids/baselines/decision_tree.hpp"
#include "gnids/gnn_model.hpp"
#include "gnids/graph_builder.hpp"
#include "gnids/layers.hpp"
#include "gnids/rng.hpp"
#include "gnids/synthetic_traffic.hpp"
#include "gnids/tape.hpp"
#include "gnids/tensor.hpp"

using namespace gnids;

namespace {

Tensor random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Tensor t(r, c);
  for (auto& x : t.data()) x = 2.0 * uniform01(rng) - 1.0;
  return t;
}

// One synthetic window with random standardized features.
HostConnectionGraph window_graph(std::size_t features, std::uint64_t seed) {
  Rng rng(seed);
  auto data = generate_dataset(default_mix(), 1, 100, rng);
  const auto& w = data.windows.front();
  std::vector<FlowInput> in(w.size());
  for (std::size_t f = 0; f < w.size(); ++f) {
    in[f].src_ip = w[f].src_ip;
    in[f].dst_ip = w[f].dst_ip;
    in[f].features.resize(features);
    for (auto& x : in[f].features) x = 2.0 * uniform01(rng) - 1.0;
    in[f].label = static_cast<int>(uniform_index(rng, 5));
    in[f].record_index = f;
  }
  return build_graph(in);
}

GnnModel model_of(std::size_t n, int t) {
  GnnConfig c;
  c.feature_count = 27;
  c.hidden_dim = n;
  c.iterations = t;
  c.message_hidden = n;
  c.readout_hidden1 = n;
  c.readout_hidden2 = n / 2;
  c.class_count = 5;
  Rng rng(7);
  return make_gnn_model(c, rng);
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Tensor a = random_matrix(n, n, rng);
  const Tensor b = random_matrix(n, n, rng);
  Tensor c(n, n);
  for (auto _ : state) {
    kernel::matmul(a, b, c);
    benchmark::DoNotOptimize(c.data().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(128)->Arg(256);

void BM_BuildGraph(benchmark::State& state) {
  Rng rng(2);
  auto data = generate_dataset(default_mix(), 64, 100, rng);
  for (auto _ : state) {
    for (const auto& w : data.windows) benchmark::DoNotOptimize(build_topology(w).edges.size());
  }
  state.SetItemsProcessed(state.iterations() * 64 * 100);
}
BENCHMARK(BM_BuildGraph);

void BM_GnnForward(benchmark::State& state) {
  const auto model = model_of(static_cast<std::size_t>(state.range(0)), static_cast<int>(state.range(1)));
  const auto g = window_graph(27, 3);
  for (auto _ : state) benchmark::DoNotOptimize(forward(g, model).data().data());
}
BENCHMARK(BM_GnnForward)->Args({32, 4})->Args({128, 8})->Unit(benchmark::kMillisecond);

void BM_GnnForwardBackward(benchmark::State& state) {
  const auto model = model_of(static_cast<std::size_t>(state.range(0)), static_cast<int>(state.range(1)));
  const auto g = window_graph(27, 4);
  std::vector<int> y;
  for (const auto& f : g.flows) y.push_back(f.label);
  for (auto _ : state) {
    Tape tape;
    auto vars = bind(tape, model.params);
    auto loss = softmax_cross_entropy(forward_logits(tape, g, vars, model.config), y);
    auto grads = zero_gradients(model.params);
    tape.backward(loss, grads);
    benchmark::DoNotOptimize(grads.front().data().data());
  }
}
BENCHMARK(BM_GnnForwardBackward)->Args({32, 4})->Args({128, 8})->Unit(benchmark::kMillisecond);

void BM_TrainId3(benchmark::State& state) {
  Rng rng(5);
  LabeledVectors data;
  data.class_count = 5;
  const auto rows = static_cast<std::size_t>(state.range(0));
  for (std::size_t i = 0; i < rows; ++i) {
    FlowFeatureVector x(27);
    for (auto& v : x) v = uniform01(rng);
    data.y.push_back(static_cast<int>(x[0] * 3 + x[1] * 2) % 5);
    data.x.push_back(std::move(x));
  }
  for (auto _ : state) benchmark::DoNotOptimize(train_id3(data, Id3Config{}).nodes.size());
}
BENCHMARK(BM_TrainId3)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();

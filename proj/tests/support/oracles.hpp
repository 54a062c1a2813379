#pragma once

// Independent reference implementations used as test oracles. They share no
// code with the library beyond plain data types: every loop here is written
// out directly.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <unistd.h>

#include "gnids/gnn_model.hpp"
#include "gnids/graph_builder.hpp"
#include "gnids/rng.hpp"
#include "gnids/tensor.hpp"

namespace oracle {

using Mat = std::vector<std::vector<double>>;

inline Mat to_mat(const gnids::Tensor& t) {
  Mat m(t.rows(), std::vector<double>(t.cols()));
  for (std::size_t i = 0; i < t.rows(); ++i)
    for (std::size_t j = 0; j < t.cols(); ++j) m[i][j] = t(i, j);
  return m;
}

inline Mat matmul(const Mat& a, const Mat& b) {
  Mat c(a.size(), std::vector<double>(b.empty() ? 0 : b[0].size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < c[i].size(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < b.size(); ++k) s += a[i][k] * b[k][j];
      c[i][j] = s;
    }
  return c;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// y = x W + b for one row.
inline std::vector<double> affine(const std::vector<double>& x, const gnids::Tensor& w,
                                  const gnids::Tensor& b) {
  std::vector<double> y(w.cols(), 0.0);
  for (std::size_t j = 0; j < w.cols(); ++j) {
    double s = b[j];
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * w(i, j);
    y[j] = s;
  }
  return y;
}

inline std::vector<double> relu(std::vector<double> v) {
  for (double& x : v) x = x > 0.0 ? x : 0.0;
  return v;
}

struct Gru {
  const gnids::Tensor *wz, *uz, *bz, *wr, *ur, *br, *wc, *uc, *bc;
};

/// One GRU step for a single row, scalar loops only.
inline std::vector<double> gru(const std::vector<double>& h, const std::vector<double>& x,
                               const Gru& g) {
  const std::size_t n = h.size();
  std::vector<double> out(n);
  std::vector<double> z(n), r(n);
  for (std::size_t j = 0; j < n; ++j) {
    double sz = (*g.bz)[j], sr = (*g.br)[j];
    for (std::size_t i = 0; i < x.size(); ++i) {
      sz += x[i] * (*g.wz)(i, j);
      sr += x[i] * (*g.wr)(i, j);
    }
    for (std::size_t i = 0; i < n; ++i) {
      sz += h[i] * (*g.uz)(i, j);
      sr += h[i] * (*g.ur)(i, j);
    }
    z[j] = sigmoid(sz);
    r[j] = sigmoid(sr);
  }
  for (std::size_t j = 0; j < n; ++j) {
    double sc = (*g.bc)[j];
    for (std::size_t i = 0; i < x.size(); ++i) sc += x[i] * (*g.wc)(i, j);
    for (std::size_t i = 0; i < n; ++i) sc += r[i] * h[i] * (*g.uc)(i, j);
    out[j] = (1.0 - z[j]) * h[j] + z[j] * std::tanh(sc);
  }
  return out;
}

inline Mat segment_mean(const Mat& rows, const std::vector<std::uint32_t>& ids,
                        std::size_t segments) {
  const std::size_t n = rows.empty() ? 0 : rows[0].size();
  Mat out(segments, std::vector<double>(n, 0.0));
  for (std::size_t s = 0; s < segments; ++s) {
    std::size_t count = 0;
    for (std::size_t e = 0; e < rows.size(); ++e) {
      if (ids[e] != s) continue;
      ++count;
      for (std::size_t j = 0; j < n; ++j) out[s][j] += rows[e][j];
    }
    if (count > 0)
      for (double& v : out[s]) v /= static_cast<double>(count);
  }
  return out;
}

/// Mean of -log softmax(row)[label] computed as log(sum exp(x - x_label)),
/// with the terms summed in ascending order.
inline double cross_entropy(const Mat& logits, const std::vector<int>& labels) {
  long double total = 0.0L;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    std::vector<long double> terms;
    for (double x : logits[i]) {
      terms.push_back(std::exp(static_cast<long double>(x) - logits[i][labels[i]]));
    }
    std::sort(terms.begin(), terms.end());
    long double s = 0.0L;
    for (auto t : terms) s += t;
    total += std::log(s);
  }
  return static_cast<double>(total / static_cast<long double>(logits.size()));
}

/// Brute-force host-connection graph: hosts by first appearance scanning
/// (src, dst) of each flow in order; typed edge set.
struct BruteGraph {
  std::vector<std::string> hosts;
  std::set<std::tuple<std::uint32_t, std::uint32_t, int>> edges;  // (a, b, type)
  std::map<std::string, std::size_t> degree;
};

inline BruteGraph brute_graph(const std::vector<std::pair<std::string, std::string>>& flows) {
  BruteGraph g;
  auto id = [&](const std::string& ip) -> std::uint32_t {
    for (std::size_t i = 0; i < g.hosts.size(); ++i)
      if (g.hosts[i] == ip) return static_cast<std::uint32_t>(i);
    g.hosts.push_back(ip);
    return static_cast<std::uint32_t>(g.hosts.size() - 1);
  };
  std::vector<std::pair<std::uint32_t, std::uint32_t>> ends;
  for (const auto& [s, d] : flows) {
    const auto a = id(s);
    const auto b = id(d);
    ends.emplace_back(a, b);
  }
  const auto h = static_cast<std::uint32_t>(g.hosts.size());
  for (std::size_t f = 0; f < ends.size(); ++f) {
    const auto node = h + static_cast<std::uint32_t>(f);
    g.edges.insert({ends[f].first, node, 0});
    g.edges.insert({node, ends[f].second, 1});
    g.degree[flows[f].first] += 1;
    g.degree[flows[f].second] += 1;
  }
  return g;
}

/// Scalar-loop GNN forward working directly from the edge list. Returns
/// per-flow logits; `states_out` (optional) receives the final node states.
inline Mat gnn_forward(const gnids::HostConnectionGraph& graph, const gnids::GnnModel& model,
                       Mat* states_out = nullptr) {
  const auto& c = model.config;
  const auto& P = model.params;
  const std::size_t n = c.hidden_dim;
  const std::size_t hosts = graph.host_count();
  const std::size_t nodes = graph.node_count();

  Mat h(nodes, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < hosts; ++i) h[i].assign(n, 1.0);
  for (std::size_t f = 0; f < graph.flow_count(); ++f)
    for (std::size_t k = 0; k < graph.flows[f].features.size(); ++k)
      h[hosts + f][k] = graph.flows[f].features[k];

  // Neighbours of each node, sorted by neighbour id, with the message group.
  std::vector<std::vector<std::pair<std::uint32_t, std::string>>> nb(nodes);
  for (const auto& e : graph.edges) {
    const std::string g = e.type == gnids::EdgeType::SrcToFlow ? "msg_sf" : "msg_fd";
    nb[e.a].emplace_back(e.b, g);
    nb[e.b].emplace_back(e.a, g);
  }
  for (auto& v : nb) std::stable_sort(v.begin(), v.end(), [](auto& x, auto& y) {
      return x.first < y.first;
    });

  auto gru_of = [&](const std::string& g) {
    return Gru{&P.at(g + ".w_z"), &P.at(g + ".u_z"), &P.at(g + ".b_z"),
               &P.at(g + ".w_r"), &P.at(g + ".u_r"), &P.at(g + ".b_r"),
               &P.at(g + ".w_c"), &P.at(g + ".u_c"), &P.at(g + ".b_c")};
  };
  const Gru gh = gru_of("upd_h");
  const Gru gf = gru_of("upd_f");

  for (int t = 0; t < c.iterations; ++t) {
    Mat next(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
      std::vector<double> agg(n, 0.0);
      for (const auto& [j, g] : nb[i]) {
        std::vector<double> cat = h[i];
        cat.insert(cat.end(), h[j].begin(), h[j].end());
        auto hid = relu(affine(cat, P.at(g + ".w1"), P.at(g + ".b1")));
        auto msg = relu(affine(hid, P.at(g + ".w2"), P.at(g + ".b2")));
        for (std::size_t k = 0; k < n; ++k) agg[k] += msg[k];
      }
      if (!nb[i].empty())
        for (double& v : agg) v /= static_cast<double>(nb[i].size());
      next[i] = gru(h[i], agg, i < hosts ? gh : gf);
    }
    h = std::move(next);
  }

  Mat logits;
  for (std::size_t f = 0; f < graph.flow_count(); ++f) {
    auto r1 = relu(affine(h[hosts + f], P.at("readout.w1"), P.at("readout.b1")));
    auto r2 = relu(affine(r1, P.at("readout.w2"), P.at("readout.b2")));
    logits.push_back(affine(r2, P.at("readout.w3"), P.at("readout.b3")));
  }
  if (states_out) *states_out = h;
  return logits;
}

/// Two-pass mean and population standard deviation.
inline std::pair<double, double> mean_std(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return {m, std::sqrt(s / static_cast<double>(v.size()))};
}

/// Per-class F1 and support-weighted F1 straight from (truth, predicted) pairs.
inline std::pair<std::vector<double>, double> f1_scores(const std::vector<int>& truth,
                                                        const std::vector<int>& pred,
                                                        int classes) {
  std::vector<double> f1(static_cast<std::size_t>(classes), 0.0);
  double weighted = 0.0;
  for (int c = 0; c < classes; ++c) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (pred[i] == c && truth[i] == c) ++tp;
      if (pred[i] == c && truth[i] != c) ++fp;
      if (pred[i] != c && truth[i] == c) ++fn;
    }
    const double denom = 2 * tp + fp + fn;
    f1[static_cast<std::size_t>(c)] = denom == 0 ? 0.0 : 2 * tp / denom;
    weighted += (tp + fn) * f1[static_cast<std::size_t>(c)];
  }
  return {f1, weighted / static_cast<double>(truth.size())};
}

inline double entropy(const std::vector<int>& labels) {
  std::map<int, double> count;
  for (int y : labels) count[y] += 1.0;
  double h = 0.0;
  for (const auto& [y, c] : count) {
    const double p = c / static_cast<double>(labels.size());
    h -= p * std::log2(p);
  }
  return h;
}

}  // namespace oracle

namespace testing_support {

/// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("gnids_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace testing_support

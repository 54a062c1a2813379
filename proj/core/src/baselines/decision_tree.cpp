#include "gnids/baselines/decision_tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "gnids/error.hpp"
#include "gnids/model_io.hpp"

namespace gnids {

namespace {

constexpr double kGainEps = 1e-12;

double entropy(std::span<const std::size_t> counts, std::size_t total) {
  if (total == 0) return 0.0;
  double h = 0.0;
  const double inv = 1.0 / static_cast<double>(total);
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) * inv;
    h -= p * std::log2(p);
  }
  return h;
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

class Builder {
 public:
  Builder(const LabeledVectors& data, const Id3Config& config, std::size_t per_split, Rng* rng)
      : data_(data), config_(config), per_split_(per_split), rng_(rng) {
    tree_.class_count = data.class_count;
    tree_.feature_count = data.x.empty() ? 0 : data.x.front().size();
  }

  DecisionTree build(std::vector<std::size_t> rows) {
    grow(rows, 0);
    return std::move(tree_);
  }

 private:
  int make_leaf(std::span<const std::size_t> rows) {
    TreeNode leaf;
    leaf.distribution.assign(data_.class_count, 0.0);
    for (auto r : rows) leaf.distribution[static_cast<std::size_t>(data_.y[r])] += 1.0;
    for (double& p : leaf.distribution) p /= static_cast<double>(rows.size());
    tree_.nodes.push_back(std::move(leaf));
    return static_cast<int>(tree_.nodes.size() - 1);
  }

  std::vector<std::size_t> candidate_features() {
    const std::size_t f = tree_.feature_count;
    std::vector<std::size_t> all(f);
    std::iota(all.begin(), all.end(), 0);
    if (per_split_ >= f || rng_ == nullptr) return all;
    for (std::size_t i = 0; i < per_split_; ++i) {
      std::swap(all[i], all[i + uniform_index(*rng_, f - i)]);
    }
    all.resize(per_split_);
    std::sort(all.begin(), all.end());
    return all;
  }

  Split best_split(std::span<const std::size_t> rows, const std::vector<std::size_t>& counts) {
    const std::size_t n = rows.size();
    const double parent = entropy(counts, n);
    Split best;
    std::vector<std::pair<double, int>> sorted(n);
    std::vector<std::size_t> left(data_.class_count);
    std::vector<std::size_t> right(data_.class_count);
    for (std::size_t f : candidate_features()) {
      for (std::size_t i = 0; i < n; ++i) sorted[i] = {data_.x[rows[i]][f], data_.y[rows[i]]};
      std::sort(sorted.begin(), sorted.end());
      std::fill(left.begin(), left.end(), 0);
      right = counts;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const auto c = static_cast<std::size_t>(sorted[i].second);
        ++left[c];
        --right[c];
        if (sorted[i].first == sorted[i + 1].first) continue;
        const std::size_t nl = i + 1, nr = n - nl;
        if (nl < config_.min_leaf || nr < config_.min_leaf) continue;
        const double gain = parent - (static_cast<double>(nl) * entropy(left, nl) +
                                      static_cast<double>(nr) * entropy(right, nr)) /
                                         static_cast<double>(n);
        if (gain > best.gain + kGainEps) {
          best.feature = static_cast<int>(f);
          best.threshold = 0.5 * (sorted[i].first + sorted[i + 1].first);
          best.gain = gain;
        }
      }
    }
    return best;
  }

  int grow(std::vector<std::size_t>& rows, int depth) {
    std::vector<std::size_t> counts(data_.class_count, 0);
    for (auto r : rows) ++counts[static_cast<std::size_t>(data_.y[r])];
    const bool pure =
        std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) <= 1;
    if (pure || depth >= config_.max_depth || rows.size() < 2 * config_.min_leaf) {
      return make_leaf(rows);
    }
    const Split s = best_split(rows, counts);
    if (s.feature < 0) return make_leaf(rows);

    std::vector<std::size_t> lrows, rrows;
    for (auto r : rows) {
      (data_.x[r][static_cast<std::size_t>(s.feature)] <= s.threshold ? lrows : rrows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    const int self = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back({s.feature, s.threshold, -1, -1, {}});
    const int l = grow(lrows, depth + 1);
    const int r = grow(rrows, depth + 1);
    tree_.nodes[static_cast<std::size_t>(self)].left = l;
    tree_.nodes[static_cast<std::size_t>(self)].right = r;
    return self;
  }

  const LabeledVectors& data_;
  Id3Config config_;
  std::size_t per_split_;
  Rng* rng_;
  DecisionTree tree_;
};

void validate(const LabeledVectors& data) {
  if (data.size() == 0) throw UsageError("cannot train on an empty dataset");
  if (data.x.size() != data.y.size()) throw ShapeError("vector and label counts differ");
  const std::size_t f = data.x.front().size();
  for (const auto& v : data.x) {
    if (v.size() != f) throw ShapeError("training vectors have differing lengths");
  }
  for (int y : data.y) {
    if (y < 0 || static_cast<std::size_t>(y) >= data.class_count) {
      throw UsageError("label " + std::to_string(y) + " out of range [0, " +
                       std::to_string(data.class_count) + ")");
    }
  }
}

nlohmann::json node_to_json(const DecisionTree& t, int i) {
  const TreeNode& n = t.nodes[static_cast<std::size_t>(i)];
  if (n.is_leaf()) return {{"distribution", n.distribution}};
  return {{"feature", n.feature},
          {"threshold", n.threshold},
          {"left", node_to_json(t, n.left)},
          {"right", node_to_json(t, n.right)}};
}

int node_from_json(const nlohmann::json& j, DecisionTree& t) {
  const int self = static_cast<int>(t.nodes.size());
  t.nodes.emplace_back();
  if (j.contains("distribution")) {
    t.nodes.back().distribution = j.at("distribution").get<std::vector<double>>();
    return self;
  }
  t.nodes.back().feature = j.at("feature").get<int>();
  t.nodes.back().threshold = j.at("threshold").get<double>();
  const int l = node_from_json(j.at("left"), t);
  const int r = node_from_json(j.at("right"), t);
  t.nodes[static_cast<std::size_t>(self)].left = l;
  t.nodes[static_cast<std::size_t>(self)].right = r;
  return self;
}

}  // namespace

std::size_t DecisionTree::leaf_index(std::span<const double> x) const {
  if (nodes.empty()) throw UsageError("decision tree is untrained");
  if (x.size() != feature_count) {
    throw ShapeError("tree expects " + std::to_string(feature_count) + " features, got " +
                     std::to_string(x.size()));
  }
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const TreeNode& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                                       : n.right);
  }
  return i;
}

Prediction DecisionTree::predict(std::span<const double> x) const {
  const auto& d = nodes[leaf_index(x)].distribution;
  return {argmax(d), d};
}

int DecisionTree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<int> d(nodes.size(), 0);
  int best = 0;
  // Children always follow their parent in the array.
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    best = std::max(best, d[i]);
    if (!nodes[i].is_leaf()) {
      d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    }
  }
  return best;
}

double information_gain(const LabeledVectors& data, std::span<const std::size_t> rows,
                        std::size_t f, double threshold) {
  std::vector<std::size_t> all(data.class_count), l(data.class_count), r(data.class_count);
  std::size_t nl = 0, nr = 0;
  for (auto i : rows) {
    const auto c = static_cast<std::size_t>(data.y[i]);
    ++all[c];
    if (data.x[i][f] <= threshold) {
      ++l[c];
      ++nl;
    } else {
      ++r[c];
      ++nr;
    }
  }
  const double n = static_cast<double>(rows.size());
  return entropy(all, rows.size()) -
         (static_cast<double>(nl) * entropy(l, nl) + static_cast<double>(nr) * entropy(r, nr)) / n;
}

DecisionTree grow_tree(const LabeledVectors& data, std::vector<std::size_t> rows,
                       const Id3Config& config, std::size_t features_per_split, Rng* rng) {
  validate(data);
  if (config.max_depth < 0) throw UsageError("max_depth must be >= 0");
  if (config.min_leaf < 1) throw UsageError("min_leaf must be >= 1");
  if (rows.empty()) throw UsageError("cannot grow a tree from zero rows");
  return Builder(data, config, features_per_split, rng).build(std::move(rows));
}

DecisionTree train_id3(const LabeledVectors& data, const Id3Config& config) {
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), 0);
  const std::size_t f = data.x.empty() ? 0 : data.x.front().size();
  return grow_tree(data, std::move(rows), config, f, nullptr);
}

nlohmann::json to_json(const DecisionTree& tree) {
  return {{"class_count", tree.class_count},
          {"feature_count", tree.feature_count},
          {"root", node_to_json(tree, 0)}};
}

DecisionTree decision_tree_from_json(const nlohmann::json& j) {
  DecisionTree t;
  t.class_count = j.at("class_count").get<std::size_t>();
  t.feature_count = j.at("feature_count").get<std::size_t>();
  node_from_json(j.at("root"), t);
  return t;
}

void save_tree(const DecisionTree& tree, const std::string& path) {
  write_envelope(path, "id3", {{"tree", to_json(tree)}});
}

DecisionTree load_tree(const std::string& path) {
  auto doc = read_envelope(path, "id3");
  try {
    return decision_tree_from_json(doc.at("tree"));
  } catch (const nlohmann::json::exception& e) {
    throw ChecksumError(path + ": malformed tree: " + e.what());
  }
}

}  // namespace gnids

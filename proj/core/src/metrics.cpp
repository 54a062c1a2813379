#include "gnids/metrics.hpp"

#include "gnids/csv.hpp"
#include "gnids/error.hpp"

namespace gnids {

void ConfusionMatrix::add(int truth, int predicted, std::uint64_t count) {
  if (truth < 0 || predicted < 0 || static_cast<std::size_t>(truth) >= c_ ||
      static_cast<std::size_t>(predicted) >= c_) {
    throw UsageError("confusion matrix index (" + std::to_string(truth) + ", " +
                     std::to_string(predicted) + ") out of range for " + std::to_string(c_) +
                     " classes");
  }
  counts_[static_cast<std::size_t>(truth) * c_ + static_cast<std::size_t>(predicted)] += count;
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (auto v : counts_) t += v;
  return t;
}

std::uint64_t ConfusionMatrix::row_sum(int truth) const {
  std::uint64_t t = 0;
  for (std::size_t j = 0; j < c_; ++j) t += at(truth, static_cast<int>(j));
  return t;
}

std::uint64_t ConfusionMatrix::col_sum(int predicted) const {
  std::uint64_t t = 0;
  for (std::size_t i = 0; i < c_; ++i) t += at(static_cast<int>(i), predicted);
  return t;
}

Metrics compute_metrics(const ConfusionMatrix& cm) {
  Metrics m;
  m.confusion = cm;
  const std::size_t c = cm.classes();
  m.per_class.resize(c);
  double weighted = 0.0;
  std::uint64_t support_total = 0;
  std::uint64_t correct = 0;
  for (std::size_t k = 0; k < c; ++k) {
    const int i = static_cast<int>(k);
    const auto tp = static_cast<double>(cm.at(i, i));
    const auto predicted = static_cast<double>(cm.col_sum(i));
    const auto support = cm.row_sum(i);
    ClassScores& s = m.per_class[k];
    s.support = support;
    s.precision = predicted > 0 ? tp / predicted : 0.0;
    s.recall = support > 0 ? tp / static_cast<double>(support) : 0.0;
    s.f1 = s.precision + s.recall > 0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
                                      : 0.0;
    weighted += static_cast<double>(support) * s.f1;
    support_total += support;
    correct += cm.at(i, i);
  }
  if (support_total > 0) {
    m.weighted_f1 = weighted / static_cast<double>(support_total);
    m.accuracy = static_cast<double>(correct) / static_cast<double>(support_total);
  }
  return m;
}

Metrics compute_metrics(std::span<const int> truth, std::span<const int> predicted,
                        std::size_t classes) {
  if (truth.size() != predicted.size()) {
    throw ShapeError("compute_metrics: " + std::to_string(truth.size()) + " labels vs " +
                     std::to_string(predicted.size()) + " predictions");
  }
  ConfusionMatrix cm(classes);
  for (std::size_t i = 0; i < truth.size(); ++i) cm.add(truth[i], predicted[i]);
  return compute_metrics(cm);
}

void write_metrics_csv(std::ostream& out, const std::vector<std::string>& class_names,
                       const std::vector<std::pair<std::string, Metrics>>& runs,
                       std::string_view key_column) {
  using csv::format_double;
  csv::write_row(out, {std::string(key_column), "class", "precision", "recall", "f1", "support"});
  for (const auto& [run, m] : runs) {
    for (std::size_t k = 0; k < m.per_class.size(); ++k) {
      const auto& s = m.per_class[k];
      const std::string name = k < class_names.size() ? class_names[k] : std::to_string(k);
      csv::write_row(out, {run, name, format_double(s.precision), format_double(s.recall),
                           format_double(s.f1), std::to_string(s.support)});
    }
    csv::write_row(out, {run, "weighted", "", "", format_double(m.weighted_f1),
                         std::to_string(m.confusion.total())});
  }
}

}  // namespace gnids

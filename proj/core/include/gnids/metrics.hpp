#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gnids {

/// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes = 0) : c_(classes), counts_(classes * classes, 0) {}

  void add(int truth, int predicted, std::uint64_t count = 1);
  std::uint64_t at(int truth, int predicted) const {
    return counts_[static_cast<std::size_t>(truth) * c_ + static_cast<std::size_t>(predicted)];
  }
  std::size_t classes() const { return c_; }
  std::uint64_t total() const;
  std::uint64_t row_sum(int truth) const;
  std::uint64_t col_sum(int predicted) const;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t c_;
  std::vector<std::uint64_t> counts_;
};

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;
};

struct Metrics {
  std::vector<ClassScores> per_class;
  double weighted_f1 = 0.0;
  double accuracy = 0.0;
  double loss = 0.0;  ///< mean per-flow cross-entropy when known, else 0
  ConfusionMatrix confusion;
};

/// 0/0 is defined as 0 for precision, recall and F1. Classes with zero support
/// contribute nothing to the weighted average.
Metrics compute_metrics(const ConfusionMatrix& cm);

Metrics compute_metrics(std::span<const int> truth, std::span<const int> predicted,
                        std::size_t classes);

/// Header: run,class,precision,recall,f1,support. One row per class, then a
/// "weighted" summary row whose f1 column is the weighted F1.
void write_metrics_csv(std::ostream& out, const std::vector<std::string>& class_names,
                       const std::vector<std::pair<std::string, Metrics>>& runs,
                       std::string_view key_column = "run");

}  // namespace gnids

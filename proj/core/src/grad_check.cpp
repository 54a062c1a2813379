#include "gnids/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "gnids/rng.hpp"

namespace gnids {

namespace {

double evaluate(const LossFn& loss, const ParameterStore& params) {
  Tape tape(false);
  auto vars = bind(tape, params);
  return loss(tape, vars).value().item();
}

}  // namespace

GradCheckReport grad_check(const LossFn& loss, ParameterStore& params,
                           const GradCheckOptions& options) {
  Gradients analytic = zero_gradients(params);
  {
    Tape tape(true);
    auto vars = bind(tape, params);
    tape.backward(loss(tape, vars), analytic);
  }

  std::map<std::string, std::vector<std::pair<std::size_t, std::size_t>>> by_group;
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto& list = by_group[params[p].group];
    for (std::size_t j = 0; j < params[p].value.size(); ++j) list.emplace_back(p, j);
  }

  Rng rng = make_rng(options.seed, "grad_check");
  GradCheckReport report;
  for (auto& [group, list] : by_group) {
    if (list.size() > options.samples_per_group) {
      for (std::size_t i = 0; i < options.samples_per_group; ++i) {
        std::size_t k = i + uniform_index(rng, list.size() - i);
        std::swap(list[i], list[k]);
      }
      list.resize(options.samples_per_group);
    }
    double group_max = 0.0;
    for (auto [p, j] : list) {
      double& theta = params[p].value[j];
      const double saved = theta;
      theta = saved + options.step;
      const double up = evaluate(loss, params);
      theta = saved - options.step;
      const double down = evaluate(loss, params);
      theta = saved;
      const double numeric = (up - down) / (2.0 * options.step);
      const double a = analytic[p][j];
      const double denom = std::max({std::abs(a), std::abs(numeric), options.denominator_floor});
      const double rel = std::abs(a - numeric) / denom;
      group_max = std::max(group_max, rel);
      if (rel > report.max_rel_error || report.worst_param.empty()) {
        if (rel >= report.max_rel_error) {
          report.max_rel_error = rel;
          report.worst_param = params[p].name;
          report.worst_index = j;
          report.worst_analytic = a;
          report.worst_numeric = numeric;
        }
      }
      ++report.checked;
    }
    report.per_group_max[group] = group_max;
    report.per_group_checked[group] = list.size();
  }
  return report;
}

}  // namespace gnids

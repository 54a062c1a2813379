#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "gnids/tape.hpp"

namespace gnids {

/// Builds a scalar loss from parameters bound on `tape` (one Var per store
/// entry, in store order). Must be deterministic.
using LossFn = std::function<Var(Tape& tape, const std::vector<Var>& params)>;

struct GradCheckOptions {
  double step = 1e-5;
  /// Scalars checked per group; groups at or below this size are checked fully.
  std::size_t samples_per_group = 200;
  /// Relative error is |analytic - numeric| / max(|analytic|, |numeric|, floor).
  double denominator_floor = 1e-6;
  std::uint64_t seed = 0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::map<std::string, double> per_group_max;
  std::map<std::string, std::size_t> per_group_checked;
  std::size_t checked = 0;
};

/// Central-difference check of the backward pass. Parameter values are
/// restored exactly before returning.
GradCheckReport grad_check(const LossFn& loss, ParameterStore& params,
                           const GradCheckOptions& options = {});

}  // namespace gnids

#pragma once

#include <cstdint>
#include <vector>

#include "gnids/tape.hpp"

namespace gnids {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::uint64_t step = 0;

  static AdamState init(const ParameterStore& params, AdamConfig config = {});
};

/// One bias-corrected Adam update of every parameter, in store order.
void adam_step(ParameterStore& params, const Gradients& grads, AdamState& state);

}  // namespace gnids

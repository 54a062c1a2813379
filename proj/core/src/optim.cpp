#include "gnids/optim.hpp"

#include <cmath>

#include "gnids/error.hpp"

namespace gnids {

AdamState AdamState::init(const ParameterStore& params, AdamConfig config) {
  AdamState s;
  s.config = config;
  for (const auto& p : params) {
    s.m.push_back(Tensor::zeros_like(p.value));
    s.v.push_back(Tensor::zeros_like(p.value));
  }
  return s;
}

void adam_step(ParameterStore& params, const Gradients& grads, AdamState& state) {
  if (grads.size() != params.size() || state.m.size() != params.size()) {
    throw ShapeError("adam_step: " + std::to_string(params.size()) + " parameters, " +
                     std::to_string(grads.size()) + " gradients, " +
                     std::to_string(state.m.size()) + " moment slots");
  }
  const AdamConfig& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto theta = params[i].value.data();
    auto g = grads[i].data();
    auto m = state.m[i].data();
    auto v = state.v[i].data();
    if (g.size() != theta.size() || m.size() != theta.size()) {
      throw ShapeError("adam_step: shape mismatch for " + params[i].name);
    }
    for (std::size_t j = 0; j < theta.size(); ++j) {
      m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * g[j];
      v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * g[j] * g[j];
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      theta[j] -= c.learning_rate * mhat / (std::sqrt(vhat) + c.epsilon);
    }
  }
}

}  // namespace gnids

#include "milattn/adam.hpp"

#include <cmath>
#include <string>

#include "milattn/error.hpp"

namespace milattn {

AdamState::AdamState(std::size_t parameter_count, double lr, double wd)
    : first_moment(parameter_count, 0.0),
      second_moment(parameter_count, 0.0),
      learning_rate(lr),
      weight_decay(wd) {}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state) {
  const std::size_t n = params.size();
  if (grads.size() != n || state.first_moment.size() != n || state.second_moment.size() != n) {
    throw ConfigError("adam_step: parameter, gradient and moment sizes differ");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(grads[i])) {
      throw DivergenceError("adam_step: non-finite gradient at index " + std::to_string(i));
    }
  }
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double bc1 = 1.0 - std::pow(state.beta1, t);
  const double bc2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grads[i] + state.weight_decay * params[i];
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g * g;
    const double m_hat = m / bc1;
    const double v_hat = v / bc2;
    params[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
}

}  // namespace milattn

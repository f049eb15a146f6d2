#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace milattn {

struct AdamState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::uint64_t step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double learning_rate = 1e-3;
  double weight_decay = 0.0;

  AdamState() = default;
  AdamState(std::size_t parameter_count, double learning_rate, double weight_decay = 0.0);
};

// One bias-corrected Adam update. Weight decay is L2-coupled: lambda * theta
// is added to the gradient before the moment updates. Throws DivergenceError
// (leaving params and state untouched) if any gradient entry is non-finite.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state);

}  // namespace milattn

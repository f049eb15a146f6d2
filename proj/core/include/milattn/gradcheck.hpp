#pragma once

#include <functional>
#include <span>
#include <vector>

namespace milattn {

// Evaluates the loss at `params`; when `grad` is non-null it is resized and
// filled with the analytic gradient.
using LossFunction = std::function<double(std::span<const double> params, std::vector<double>* grad)>;

// Largest entry-wise relative error |a - n| / max(|a|, |n|, 1e-8) between the
// analytic gradient and central differences with the given step.
double gradient_check(const LossFunction& fn, std::span<const double> params, double step = 1e-5);

}  // namespace milattn

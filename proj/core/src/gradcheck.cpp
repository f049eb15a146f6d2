#include "milattn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "milattn/error.hpp"

namespace milattn {

double gradient_check(const LossFunction& fn, std::span<const double> params, double step) {
  std::vector<double> analytic;
  fn(params, &analytic);
  if (analytic.size() != params.size()) {
    throw InternalError("gradient_check: gradient length differs from parameter count");
  }
  std::vector<double> probe(params.begin(), params.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + step;
    const double up = fn(probe, nullptr);
    probe[i] = orig - step;
    const double down = fn(probe, nullptr);
    probe[i] = orig;
    const double numeric = (up - down) / (2.0 * step);
    const double a = analytic[i];
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(a - numeric) / denom);
  }
  return worst;
}

}  // namespace milattn

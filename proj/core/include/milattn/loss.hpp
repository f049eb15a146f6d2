#pragma once

#include <span>

#include "milattn/matrix.hpp"

namespace milattn {

struct LossResult {
  double mean_loss = 0.0;
  Matrix logit_grad;  // d(mean_loss)/d(logits)
};

// Mean over rows of -log softmax(logits)[label], max-shifted.
LossResult softmax_cross_entropy(const Matrix& logits, std::span<const int> labels);

// Row-wise softmax, max-shifted.
std::vector<double> softmax(std::span<const double> scores);

}  // namespace milattn

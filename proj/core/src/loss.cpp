#include "milattn/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "milattn/error.hpp"

namespace milattn {

std::vector<double> softmax(std::span<const double> scores) {
  std::vector<double> out(scores.size());
  if (scores.empty()) return out;
  const double mx = *std::max_element(scores.begin(), scores.end());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp(scores[i] - mx);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

LossResult softmax_cross_entropy(const Matrix& logits, std::span<const int> labels) {
  if (labels.size() != logits.rows()) {
    throw ConfigError("softmax_cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                      std::to_string(logits.rows()) + " rows");
  }
  if (logits.rows() == 0) throw ConfigError("softmax_cross_entropy: empty batch");
  const auto classes = logits.cols();
  const double inv_batch = 1.0 / static_cast<double>(logits.rows());
  LossResult res{0.0, Matrix(logits.rows(), classes)};
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const int label = labels[r];
    if (label < 0 || static_cast<std::size_t>(label) >= classes) {
      throw ConfigError("softmax_cross_entropy: label " + std::to_string(label) + " out of range");
    }
    const auto row = logits.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (double v : row) total += std::exp(v - mx);
    const double log_total = std::log(total);
    res.mean_loss += (log_total - (row[label] - mx)) * inv_batch;
    auto g = res.logit_grad.row(r);
    for (std::size_t c = 0; c < classes; ++c) {
      const double p = std::exp(row[c] - mx - log_total);
      g[c] = (p - (static_cast<std::size_t>(label) == c ? 1.0 : 0.0)) * inv_batch;
    }
  }
  return res;
}

}  // namespace milattn

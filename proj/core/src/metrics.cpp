#include "milattn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "milattn/error.hpp"

namespace milattn {

std::vector<double> midranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // positions i..j-1 hold ranks i+1..j
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

double auroc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw MetricError("auroc: scores and labels differ in length");
  double n_pos = 0.0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw MetricError("auroc: labels must be 0 or 1");
    n_pos += y;
  }
  const double n_neg = static_cast<double>(labels.size()) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0) {
    throw MetricError("auroc: undefined without both positive and negative labels");
  }
  for (double s : scores) {
    if (std::isnan(s)) throw MetricError("auroc: NaN score");
  }
  const auto ranks = midranks(scores);
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == 1) rank_sum += ranks[i];
  const double u = rank_sum - n_pos * (n_pos + 1.0) / 2.0;
  return u / (n_pos * n_neg);
}

std::vector<int> key_instance_labels(std::span<const int> instance_labels, ProblemKind problem) {
  std::vector<int> keys(instance_labels.size());
  for (std::size_t i = 0; i < keys.size(); ++i)
    keys[i] = is_key_population(instance_labels[i], problem) ? 1 : 0;
  return keys;
}

namespace {

bool eligible(const Bag& bag, const std::vector<int>& keys, ProblemKind problem,
              Eligibility rule) {
  const bool any_key = std::find(keys.begin(), keys.end(), 1) != keys.end();
  const bool any_other = std::find(keys.begin(), keys.end(), 0) != keys.end();
  if (!any_key || !any_other) return false;
  if (rule == Eligibility::PositiveBagsOnly || problem == ProblemKind::MIL) return bag.label == 1;
  return true;
}

void check_alignment(std::span<const AttentionProfile> attention, std::span<const Bag> bags) {
  if (attention.size() != bags.size()) {
    throw DataError("attention profiles (" + std::to_string(attention.size()) +
                    ") do not cover the bags (" + std::to_string(bags.size()) + ")");
  }
  for (std::size_t i = 0; i < bags.size(); ++i) {
    if (attention[i].size() != bags[i].size()) {
      throw DataError("attention profile " + std::to_string(i) + " has wrong length");
    }
  }
}

}  // namespace

double iauc_of_run(std::span<const AttentionProfile> attention, std::span<const Bag> bags,
                   ProblemKind problem, Eligibility eligibility) {
  check_alignment(attention, bags);
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < bags.size(); ++i) {
    const auto keys = key_instance_labels(bags[i].instance_labels, problem);
    if (!eligible(bags[i], keys, problem, eligibility)) continue;
    total += auroc(attention[i], keys);
    ++count;
  }
  if (count == 0) throw MetricError("iauc: no eligible bags");
  return total / static_cast<double>(count);
}

double iauc_pooled(std::span<const AttentionProfile> attention, std::span<const Bag> bags,
                   ProblemKind problem, Eligibility eligibility) {
  check_alignment(attention, bags);
  std::vector<double> scores;
  std::vector<int> labels;
  for (std::size_t i = 0; i < bags.size(); ++i) {
    const auto keys = key_instance_labels(bags[i].instance_labels, problem);
    if (!eligible(bags[i], keys, problem, eligibility)) continue;
    scores.insert(scores.end(), attention[i].begin(), attention[i].end());
    labels.insert(labels.end(), keys.begin(), keys.end());
  }
  if (scores.empty()) throw MetricError("iauc: no eligible bags");
  return auroc(scores, labels);
}

double compute_iauc(std::span<const AttentionProfile> attention, std::span<const Bag> bags,
                    ProblemKind problem, const IaucSettings& settings) {
  return settings.aggregation == IaucAggregation::PerBag
             ? iauc_of_run(attention, bags, problem, settings.eligibility)
             : iauc_pooled(attention, bags, problem, settings.eligibility);
}

ConfigSummary summarize_config(std::string config_id, std::span<const double> iauc_values) {
  if (iauc_values.empty()) throw MetricError("summarize_config: no IAUC values");
  ConfigSummary s;
  s.config_id = std::move(config_id);
  s.iauc_values.assign(iauc_values.begin(), iauc_values.end());
  // Sum in sorted order so the mean does not depend on input order.
  std::vector<double> sorted = s.iauc_values;
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  std::size_t bad = 0;
  for (double v : sorted) {
    sum += v;
    if (v < kBadIauc) ++bad;
  }
  const auto n = static_cast<double>(sorted.size());
  s.mean_iauc = sum / n;
  s.bad_fraction = static_cast<double>(bad) / n;
  // The tolerance absorbs the inexact product 0.1 * n (e.g. 3.0000000000000004 for n = 30).
  s.is_bad = static_cast<double>(bad) >= kBadRunFraction * n - 1e-12;
  return s;
}

SpearmanResult spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw MetricError("spearman: length mismatch");
  if (xs.size() < 2) throw MetricError("spearman: need at least two pairs");
  const auto rx = midranks(xs);
  const auto ry = midranks(ys);
  const auto n = static_cast<double>(rx.size());
  const double mean = (n + 1.0) / 2.0;  // midranks always average to (n+1)/2
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return {0.0, true};
  const double rho = sxy / std::sqrt(sxx * syy);
  return {std::clamp(rho, -1.0, 1.0), false};
}

double percentile(std::span<const double> values, double q) {
  if (values.empty()) throw MetricError("percentile of an empty list");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double pos = q / 100.0 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

double delta_iauc(std::span<const AccuracyIauc> runs) {
  if (runs.empty()) throw MetricError("delta_iauc: no runs");
  std::vector<double> acc;
  acc.reserve(runs.size());
  for (const auto& r : runs) acc.push_back(r.validation_accuracy);
  const double cut = percentile(acc, 90.0);
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& r : runs) {
    if (r.validation_accuracy < cut) continue;
    lo = std::min(lo, r.iauc);
    hi = std::max(hi, r.iauc);
  }
  return hi - lo;
}

double accuracy(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) throw MetricError("accuracy: length mismatch");
  if (labels.empty()) throw MetricError("accuracy: empty input");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hit += predictions[i] == labels[i] ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(labels.size());
}

}  // namespace milattn

#pragma once

#include <span>
#include <string>
#include <vector>

#include "milattn/bag.hpp"
#include "milattn/model.hpp"
#include "milattn/problem.hpp"

namespace milattn {

// Average ranks (1-based) with ties sharing their midrank.
std::vector<double> midranks(std::span<const double> values);

// Area under the ROC curve via the Mann-Whitney rank sum with midranks:
// (#{pos > neg} + 0.5 #{pos == neg}) / (n_pos n_neg). Labels are 0/1.
// Throws MetricError unless both classes are present.
double auroc(std::span<const double> scores, std::span<const int> labels);

// 1 for instances of key populations, 0 otherwise.
std::vector<int> key_instance_labels(std::span<const int> instance_labels, ProblemKind problem);

enum class Eligibility {
  // MIL: positive bags; AND/XOR: any bag holding both key and non-key instances.
  KeyAndNonKey,
  // Positive bags only, for every problem.
  PositiveBagsOnly,
};

// Unweighted mean over eligible bags of the per-bag AUROC of attention
// against key-instance labels. Throws MetricError when no bag is eligible.
double iauc_of_run(std::span<const AttentionProfile> attention, std::span<const Bag> bags,
                   ProblemKind problem, Eligibility eligibility = Eligibility::KeyAndNonKey);

// Alternative: a single AUROC over all instances of all eligible bags.
double iauc_pooled(std::span<const AttentionProfile> attention, std::span<const Bag> bags,
                   ProblemKind problem, Eligibility eligibility = Eligibility::KeyAndNonKey);

enum class IaucAggregation { PerBag, Pooled };

struct IaucSettings {
  Eligibility eligibility = Eligibility::KeyAndNonKey;
  IaucAggregation aggregation = IaucAggregation::PerBag;
};

double compute_iauc(std::span<const AttentionProfile> attention, std::span<const Bag> bags,
                    ProblemKind problem, const IaucSettings& settings = {});

inline constexpr double kBadIauc = 0.65;         // a run is bad below this IAUC
inline constexpr double kBadRunFraction = 0.10;  // a config is bad at or above this fraction

struct ConfigSummary {
  std::string config_id;
  std::vector<double> iauc_values;
  double mean_iauc = 0.0;
  double bad_fraction = 0.0;
  bool is_bad = false;
};

ConfigSummary summarize_config(std::string config_id, std::span<const double> iauc_values);

struct SpearmanResult {
  double rho = 0.0;
  bool degenerate = false;  // one variable is constant; rho reported as 0
};

SpearmanResult spearman(std::span<const double> xs, std::span<const double> ys);

struct AccuracyIauc {
  double validation_accuracy = 0.0;
  double iauc = 0.0;
};

// Linear-interpolation percentile (q in [0, 100]) of unsorted values.
double percentile(std::span<const double> values, double q);

// IAUC spread (max - min) among runs whose validation accuracy is at least
// the 90th percentile of validation accuracies.
double delta_iauc(std::span<const AccuracyIauc> runs);

double accuracy(std::span<const int> predictions, std::span<const int> labels);

}  // namespace milattn

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "milattn/datagen.hpp"
#include "milattn/metrics.hpp"
#include "milattn/model.hpp"

namespace milattn {

/// One trained realization of a configuration.
struct RunRecord {
  std::string config_id;
  std::uint64_t seed = 0;
  double validation_accuracy = 0.0;   // final epoch
  double validation_loss = 0.0;       // final epoch, mean cross-entropy
  double test_accuracy = 0.0;
  double test_iauc = 0.5;
  bool training_diverged = false;
  std::size_t epochs_completed = 0;
  std::vector<double> validation_curve;       // accuracy after each epoch
  std::vector<AttentionProfile> test_attention;  // one per test bag, in order
};

struct TrainOptions {
  bool record_validation_curve = true;
  IaucSettings iauc;
};

struct EvalResult {
  double accuracy = 0.0;
  double mean_loss = 0.0;
  std::vector<AttentionProfile> attention;
};

EvalResult evaluate(const MilModel& model, const std::vector<Bag>& bags);

// Trains for config.epochs epochs of shuffled mini-batches with Adam and
// evaluates on validation and test. Deterministic in (config, seed, data).
// A non-finite loss or gradient stops training; the record is evaluated with
// the parameters reached so far and has training_diverged set.
RunRecord train(const ModelConfig& config, std::uint64_t seed, const DatasetSplits& data,
                const TrainOptions& options = {}, MilModel* trained = nullptr);

}  // namespace milattn

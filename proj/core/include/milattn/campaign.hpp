#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "milattn/datagen.hpp"
#include "milattn/ensemble.hpp"
#include "milattn/manifest.hpp"
#include "milattn/metrics.hpp"
#include "milattn/run_store.hpp"
#include "milattn/train.hpp"

namespace milattn {

// Runs fn(0) .. fn(n-1) on up to `workers` threads (0 = hardware
// concurrency). Once a job throws, no new jobs start; the first exception is
// rethrown after the running ones finish.
void run_parallel(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

std::uint64_t search_seed(std::uint64_t master_seed, const std::string& config_id, std::size_t k);
std::uint64_t repetition_seed(std::uint64_t master_seed, const std::string& config_id, std::size_t r);

// Builds the dataset the manifest describes (reading MNIST/CyTOF sources if
// needed). Pure in the manifest.
DatasetSplits prepare_dataset(const ExperimentManifest& manifest);

struct JobOptions {
  std::size_t jobs = 1;
  bool resume = false;  // keep records that already exist instead of retraining
  std::function<void(const std::string&)> log;
};

struct RankedConfig {
  ModelConfig config;
  std::string config_id;
  std::size_t n_runs = 0;       // persisted search runs
  std::size_t n_diverged = 0;   // excluded from the means
  double mean_validation_accuracy = 0.0;
  double mean_validation_loss = 0.0;
};

// Orders by mean validation accuracy (descending), then mean validation loss
// (ascending), then id. Configs without a converged run sort last.
void sort_ranking(std::vector<RankedConfig>& ranked);

// Ranking from the persisted search records of `configs`.
std::vector<RankedConfig> rank_configs(const RunStore& store, std::span<const ModelConfig> configs,
                                       std::size_t seeds_per_config);

std::vector<RankedConfig> run_grid_search(const ExperimentManifest& manifest, const DatasetSplits& data,
                                          RunStore& store, const JobOptions& options);

// n repetitions of each config; seeds from repetition_seed().
std::vector<RunRecord> run_repetitions(const ExperimentManifest& manifest, const DatasetSplits& data,
                                       RunStore& store, std::span<const std::string> config_ids,
                                       std::size_t n, const JobOptions& options);

std::vector<std::string> top_config_ids(std::span<const RankedConfig> ranked, std::size_t n);

struct CampaignResult {
  ExperimentManifest manifest;
  std::vector<RankedConfig> ranked;
  std::vector<std::string> top_ids;
  std::map<std::string, std::vector<RunRecord>> repetitions;  // by config, in repetition order
  std::vector<ConfigSummary> summaries;                       // aligned with top_ids
  std::vector<EnsembleCurve> curves;                          // single then multi, when available
  std::vector<Bag> test_bags;
  std::vector<std::string> gaps;                              // what is missing and why

  std::vector<const RunRecord*> top_runs() const;
};

// Reads everything persisted for the manifest's campaign. Missing pieces are
// listed in `gaps` rather than raised.
CampaignResult load_campaign(const ExperimentManifest& manifest);

std::vector<EnsembleCurve> compute_curves(const CampaignResult& campaign);

}  // namespace milattn

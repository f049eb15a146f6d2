#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "milattn/datagen.hpp"
#include "milattn/metrics.hpp"
#include "milattn/model.hpp"
#include "milattn/problem.hpp"

namespace milattn {

/// Hyperparameter grid; every field is the list of values to sweep.
struct ParameterGrid {
  std::vector<std::size_t> epochs;
  std::vector<double> learning_rate;
  std::vector<std::size_t> embed_dim;         // K
  std::vector<std::size_t> attention_dim;     // L
  std::vector<std::size_t> featurizer_depth;
  std::vector<std::size_t> classifier_depth;
  std::vector<std::size_t> batch_size{100};
  std::vector<double> weight_decay{1e-4};
  Activation hidden_activation = Activation::ReLU;

  std::size_t size() const noexcept;
  // Cartesian product in field order (epochs outermost). Duplicate configs
  // (same normalized id) are kept once.
  std::vector<ModelConfig> expand(std::size_t input_dim) const;

  friend bool operator==(const ParameterGrid&, const ParameterGrid&) = default;
};

ParameterGrid full_grid(Modality modality);
ParameterGrid desk_grid(Modality modality);

struct SourcePaths {
  std::filesystem::path mnist_images;
  std::filesystem::path mnist_labels;
  std::filesystem::path cytof_table;
  std::string cytof_cluster_column = "cluster";
  char cytof_delimiter = ',';
};

struct EnsembleSettings {
  std::vector<std::size_t> sizes{1, 2, 5, 10, 20};
  std::size_t n_ensembles = 30;
  std::size_t repetitions = 5;
};

struct DeskScale {
  bool enabled = false;
  ParameterGrid grid;  // empty fields fall back to desk_grid(modality)
  std::size_t seeds_per_config = 3;
  std::size_t n_top = 2;
  std::size_t n_repetitions = 30;
};

struct ExperimentManifest {
  Modality modality = Modality::Gaussian;
  ProblemKind problem = ProblemKind::MIL;
  DatasetOptions dataset;
  ParameterGrid grid;
  std::size_t seeds_per_config = 5;
  std::size_t n_top = 5;
  std::size_t n_repetitions = 100;
  DeskScale desk_scale;
  std::uint64_t master_seed = 0;
  std::filesystem::path output_dir = "results";
  SourcePaths sources;
  EnsembleSettings ensemble;
  IaucSettings iauc;

  // Values in effect once the desk-scale flag is taken into account.
  const ParameterGrid& effective_grid() const noexcept;
  std::size_t effective_seeds_per_config() const noexcept;
  std::size_t effective_n_top() const noexcept;
  std::size_t effective_n_repetitions() const noexcept;

  std::string task_name() const;  // e.g. "gaussian_mil"
  void validate() const;
};

// Relative paths in the document are resolved against `base_dir`.
ExperimentManifest parse_manifest(const std::string& text,
                                  const std::filesystem::path& base_dir = {});
ExperimentManifest load_manifest(const std::filesystem::path& path);
std::string dump_manifest(const ExperimentManifest& manifest);

}  // namespace milattn

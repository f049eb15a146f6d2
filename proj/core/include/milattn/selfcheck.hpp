#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "milattn/manifest.hpp"

namespace milattn {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Distinct (K, L, featurizer depth, classifier depth) shapes of the full
// grids for all modalities.
std::vector<ModelConfig> grid_architectures();

// Full-model analytic gradient against central differences (step 1e-5) for
// every shape of grid_architectures() on a small random batch.
CheckResult check_gradient_exactness(std::uint64_t seed, double tolerance = 1e-4);

// Random models, bags and permutations: logits agree within 1e-9 and
// attention is permuted exactly.
CheckResult check_permutation_invariance(std::uint64_t seed, std::size_t trials = 1000);

// auroc against brute-force pair counting, spearman against the rank
// difference formula, averaged attention normalization.
CheckResult check_metric_oracles(std::uint64_t seed, std::size_t trials = 1000);

// Loss non-negativity and zero-sum logit gradients, Adam determinism,
// identity of depth-0 networks.
CheckResult check_kernel_properties(std::uint64_t seed);

std::vector<CheckResult> run_self_checks(std::uint64_t seed);

}  // namespace milattn

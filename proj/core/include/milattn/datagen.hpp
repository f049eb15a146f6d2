#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "milattn/bag.hpp"
#include "milattn/matrix.hpp"
#include "milattn/problem.hpp"
#include "milattn/rng.hpp"

namespace milattn {

enum class Modality { Gaussian, MNIST, CyTOF, CyTOFSynthetic };

std::string_view to_string(Modality m) noexcept;
Modality parse_modality(std::string_view s);

/// Isotropic Gaussian populations in R^4.
struct GaussianSpec {
  std::array<std::vector<double>, 3> means{
      std::vector<double>{0.0, 0.0, 0.0, 0.0},
      std::vector<double>{1.0, 1.0, 1.0, 1.0},
      std::vector<double>{-1.0, 1.0, 1.0, 1.0},
  };
  double sigma = 1.0;

  std::size_t dim() const noexcept { return means[0].size(); }
};

/// Empirical instance distributions, one row-matrix per population.
struct PopulationPool {
  std::array<Matrix, 3> populations;

  std::size_t dim() const noexcept;
  std::size_t size(int pop) const noexcept { return populations[pop].rows(); }
};

using InstanceSource = std::variant<GaussianSpec, const PopulationPool*>;

// Mixing probabilities over populations {0, 1, 2} before restriction to the
// present set: 0.5/0.5 for MIL, 0.4/0.3/0.3 otherwise.
std::array<double, 3> mixing_probabilities(ProblemKind problem) noexcept;

// Draws a presence pattern consistent with the target bag label.
PresenceSet sample_presence_pattern(ProblemKind problem, int target_label, Rng& rng);

// Builds one bag. Instance populations are drawn i.i.d. from the mixing
// distribution restricted to `pattern`; draws whose realized label differs
// from the pattern's label are redrawn.
Bag compose_bag(PresenceSet pattern, ProblemKind problem, std::size_t bag_size,
                const InstanceSource& source, Rng& rng);

struct SplitSizes {
  std::size_t train = 500;
  std::size_t validation = 100;
  std::size_t test = 100;
};

struct DatasetSplits {
  Modality modality = Modality::Gaussian;
  ProblemKind problem = ProblemKind::MIL;
  std::uint64_t master_seed = 0;
  std::size_t bag_size = 250;
  double balance = 0.5;
  std::vector<Bag> train;
  std::vector<Bag> validation;
  std::vector<Bag> test;

  std::size_t input_dim() const noexcept;
};

struct DatasetOptions {
  SplitSizes sizes;
  std::size_t bag_size = 250;
  double balance = 0.5;  // fraction of positive bags per split
};

// Deterministic in (modality, problem, options, master_seed). Each bag uses
// its own generator seeded by derive_seed(master_seed, {split, index}).
DatasetSplits generate_dataset(Modality modality, ProblemKind problem,
                               const DatasetOptions& options, std::uint64_t master_seed,
                               const InstanceSource& source);

}  // namespace milattn

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "milattn/datagen.hpp"

namespace milattn {

struct IdxImages {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;  // count * rows * cols
};

// Big-endian IDX readers (images magic 0x00000803, labels magic 0x00000801).
// Errors report the byte offset where parsing failed.
IdxImages read_idx_images(const std::filesystem::path& path);
std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path);

// Digit 3 -> population 1, digit 9 -> population 2 (AND/XOR only; under MIL a
// 9 is background), everything else -> 0. Pixels are scaled to [0, 1].
PopulationPool load_mnist_idx(const std::filesystem::path& images_path,
                              const std::filesystem::path& labels_path,
                              ProblemKind problem = ProblemKind::AND);

/// Cluster-name to population mapping for cytometry tables.
///
/// Exact names are looked up first; otherwise names starting with one of the
/// luminal prefixes (case-insensitive) map to population 0. Anything else is
/// dropped.
struct CytofMapping {
  std::map<std::string, int> exact{{"B2", 1}, {"B1", 2}};
  std::vector<std::string> luminal_prefixes{"luminal", "L"};

  std::optional<int> population_of(const std::string& cluster) const;
};

struct CytofTableOptions {
  std::string cluster_column = "cluster";
  char delimiter = ',';
  CytofMapping mapping;
};

// Reads a delimited table with a header row; every column other than the
// cluster column is a numeric marker. Markers are standardized to zero mean
// and unit variance over the loaded pool (constant columns become zeros).
PopulationPool load_cytof_table(const std::filesystem::path& path,
                                const CytofTableOptions& options = {});

// Desk-scale stand-in for the cytometry data: three 27-marker Gaussian
// populations, 10000 cells each.
//   population 0: mean 0
//   population 1: +kSynthShift on markers 0..15
//   population 2: +kSynthShift on markers 8..23
// Per-marker standard deviation kSynthSigma.
inline constexpr std::size_t kSynthMarkers = 27;
inline constexpr std::size_t kSynthCellsPerPopulation = 10000;
inline constexpr double kSynthShift = 0.625;  // L2 separation 2.5 between any two means
inline constexpr double kSynthSigma = 0.8;

PopulationPool synth_cytof_pool(std::uint64_t seed);

}  // namespace milattn

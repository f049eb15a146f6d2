#pragma once

#include <filesystem>

#include "milattn/datagen.hpp"

namespace milattn {

// Directory layout:
//   manifest.json            modality, problem, seed, sizes, bag size, dim
//   {train,validation,test}.bags   binary split files
//
// Split file (little-endian):
//   char[8] "MILBAGS1", u64 n_bags, u64 bag_size, u64 dim,
//   u8 bag_label[n_bags], u8 instance_label[n_bags * bag_size],
//   f64 instances[n_bags * bag_size * dim]
void save_dataset(const DatasetSplits& data, const std::filesystem::path& dir);
DatasetSplits load_dataset(const std::filesystem::path& dir);

}  // namespace milattn

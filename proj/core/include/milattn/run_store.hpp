#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "milattn/model.hpp"
#include "milattn/train.hpp"

namespace milattn {

enum class Phase { Search, Repeat };

std::string_view to_string(Phase p) noexcept;

struct IndexEntry {
  Phase phase = Phase::Search;
  std::string config_id;
  std::size_t index = 0;  // seed number within the phase
  std::uint64_t seed = 0;
  double validation_accuracy = 0.0;
  double test_iauc = 0.0;
  bool training_diverged = false;
};

/// On-disk run records of one campaign.
///
///   <root>/index.json                    campaign index, sorted
///   <root>/configs/<id>/config.json      hyperparameters
///   <root>/configs/<id>/<phase>-<k>.json metrics and validation curve
///   <root>/configs/<id>/<phase>-<k>.attn attention profiles
///   <root>/configs/<id>/<phase>-<k>.model trained parameters
///
/// Attention file (little-endian): char[8] "MILATTN1", u64 bag_count,
/// u64 bag_size, f64 weights[bag_count * bag_size].
///
/// Every file is written atomically. save() is safe to call concurrently for
/// distinct (config, phase, index) keys.
class RunStore {
 public:
  explicit RunStore(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }
  std::filesystem::path config_dir(const std::string& config_id) const;
  std::filesystem::path record_stem(const std::string& config_id, Phase phase, std::size_t index) const;

  // A record counts as present once its metrics file exists; that file is
  // written last.
  bool has(const std::string& config_id, Phase phase, std::size_t index) const;

  void save_config(const ModelConfig& config) const;
  std::optional<ModelConfig> load_config(const std::string& config_id) const;
  std::vector<std::string> config_ids() const;

  void save(const RunRecord& record, Phase phase, std::size_t index, const MilModel* model);
  RunRecord load(const std::string& config_id, Phase phase, std::size_t index) const;

  std::vector<IndexEntry> index() const;

 private:
  std::vector<IndexEntry> read_index() const;
  void append_index(IndexEntry entry);

  std::filesystem::path root_;
  mutable std::mutex index_mutex_;
};

std::string encode_attention(const std::vector<AttentionProfile>& attention);
std::vector<AttentionProfile> decode_attention(std::string bytes, const std::string& name);

std::string encode_config(const ModelConfig& config);
ModelConfig decode_config(const std::string& text);

}  // namespace milattn

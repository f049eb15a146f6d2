#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "milattn/campaign.hpp"

namespace milattn {

// Rows of the report tables, computed only from a CampaignResult.

struct IaucTableRow {
  std::string task;
  std::size_t n_configs = 0;  // top configs with at least one repetition
  std::size_t n_runs = 0;
  double mean_iauc = 0.0;     // over all repetition runs of the top configs
  std::size_t n_bad_configs = 0;
};

struct DecouplingRow {
  std::string task;
  std::size_t n_runs = 0;
  SpearmanResult spearman;            // validation accuracy vs IAUC, pooled runs
  double spearman_bootstrap_std = 0.0;
  double spearman_config_mean = 0.0;  // per-config rho, averaged over configs
  double spearman_config_std = 0.0;
  double high_delta_iauc = 0.0;
  std::string high_delta_config;
  double low_delta_iauc = 0.0;
  std::string low_delta_config;
};

struct EnsemblingRow {
  std::string task;
  double pct_bad_n1 = 0.0;  // mean over top configs of the bad-run fraction, in %
  std::optional<std::size_t> single_size;
  double pct_bad_single = 0.0;
  std::optional<std::size_t> multi_size;
  double pct_bad_multi = 0.0;
};

inline constexpr std::size_t kBootstrapResamples = 1000;
inline constexpr std::size_t kEnsembleReportSize = 20;

IaucTableRow iauc_table_row(const CampaignResult& c);
DecouplingRow decoupling_row(const CampaignResult& c);
// Ensemble columns use size 20, or the largest computed size below it.
EnsemblingRow ensembling_row(const CampaignResult& c);

/// Heatmap of validation accuracy (columns) against IAUC (rows).
struct Heatmap {
  std::vector<double> acc_edges;   // 11 edges over [0.5, 1]
  std::vector<double> iauc_edges;  // 11 edges over [0, 1]
  std::vector<std::vector<std::size_t>> counts;  // [acc_bin][iauc_bin]
  std::vector<std::size_t> column_totals;
  double column_fraction(std::size_t acc_bin, std::size_t iauc_bin) const;
};

Heatmap accuracy_iauc_heatmap(std::span<const RunRecord* const> runs);

struct Histogram {
  std::vector<double> edges;  // 21 edges over [0, 1]
  std::vector<std::size_t> counts;
  std::vector<double> cumulative_fraction;
};

Histogram iauc_histogram(std::span<const double> values);

// Fixed-precision number formatting used by every table; non-finite -> "NA".
std::string format_number(double v, int decimals = 6);

// Writes every report artifact for the campaigns into `dir` and returns the
// written paths. Output is a pure function of the campaigns.
std::vector<std::filesystem::path> write_reports(std::span<const CampaignResult> campaigns,
                                                 const std::filesystem::path& dir);

// Only the ensemble artifacts: ensemble_curves.csv, ensembling_summary.csv and
// the curve figures.
std::vector<std::filesystem::path> write_ensemble_reports(std::span<const CampaignResult> campaigns,
                                                          const std::filesystem::path& dir);

std::string iauc_table_csv(std::span<const CampaignResult> campaigns);
std::string iauc_configs_csv(std::span<const CampaignResult> campaigns);
std::string decoupling_csv(std::span<const CampaignResult> campaigns);
std::string ensembling_csv(std::span<const CampaignResult> campaigns);
std::string ranking_csv(std::span<const CampaignResult> campaigns);
std::string histogram_csv(std::span<const CampaignResult> campaigns);
std::string heatmap_csv(std::span<const CampaignResult> campaigns);
std::string ensemble_curves_csv(std::span<const CampaignResult> campaigns);
std::string attention_export_csv(const CampaignResult& campaign);
std::string summary_json(std::span<const CampaignResult> campaigns);

}  // namespace milattn

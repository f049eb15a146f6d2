#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "milattn/metrics.hpp"
#include "milattn/train.hpp"

namespace milattn {

enum class EnsembleStrategy { SingleConfig, MultiConfig };

std::string_view to_string(EnsembleStrategy s) noexcept;

struct EnsembleSpec {
  std::vector<const RunRecord*> members;
  EnsembleStrategy strategy = EnsembleStrategy::MultiConfig;

  std::size_t size() const noexcept { return members.size(); }
};

// Element-wise mean of attention profiles over the same bag.
AttentionProfile average_attention(std::span<const AttentionProfile* const> profiles);
AttentionProfile average_attention(std::span<const AttentionProfile> profiles);

// Draws `n_ensembles` ensembles of `size` distinct runs each, uniformly from
// `pool`. Members are distinct within an ensemble; runs are reused across
// ensembles. SingleConfig requires every run in `pool` to share one config.
std::vector<EnsembleSpec> build_ensembles(std::span<const RunRecord* const> pool,
                                          EnsembleStrategy strategy, std::size_t size,
                                          std::size_t n_ensembles, std::uint64_t seed);

// IAUC of the per-bag averaged attention of the members.
double ensemble_iauc(const EnsembleSpec& ensemble, std::span<const Bag> test_bags,
                     ProblemKind problem, const IaucSettings& iauc = {});

// An ensemble is bad when its IAUC is at or below this value.
inline constexpr double kBadEnsembleIauc = 0.65;

struct CurvePoint {
  std::size_t size = 0;
  double mean_bad_fraction = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  // Multi: one bad fraction per repetition. Single: one per configuration.
  std::vector<double> samples;
};

struct ConfigCurve {
  std::string config_id;
  std::vector<double> bad_fraction;  // aligned with sizes
};

struct EnsembleCurve {
  EnsembleStrategy strategy = EnsembleStrategy::MultiConfig;
  std::vector<CurvePoint> points;
  std::vector<ConfigCurve> per_config;  // SingleConfig only
};

struct CurveOptions {
  std::vector<std::size_t> sizes{1, 2, 5, 10, 20};
  std::size_t n_ensembles = 30;
  std::size_t repetitions = 5;  // MultiConfig only
  std::uint64_t seed = 0;
  IaucSettings iauc;
};

// Fraction of bad ensembles per ensemble size.
//   MultiConfig: sampling over the union of `pool` is repeated
//     `repetitions` times; mean and normal 95% CI over repetitions.
//   SingleConfig: one curve per config in `pool`; mean and normal 95% CI
//     over configs.
// CI bounds are clipped to [0, 1].
EnsembleCurve bad_ensemble_curve(std::span<const RunRecord* const> pool, EnsembleStrategy strategy,
                                 std::span<const Bag> test_bags, ProblemKind problem,
                                 const CurveOptions& options);

}  // namespace milattn

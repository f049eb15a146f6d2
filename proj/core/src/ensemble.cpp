#include "milattn/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "milattn/error.hpp"

namespace milattn {

std::string_view to_string(EnsembleStrategy s) noexcept {
  return s == EnsembleStrategy::SingleConfig ? "single_config" : "multi_config";
}

AttentionProfile average_attention(std::span<const AttentionProfile* const> profiles) {
  if (profiles.empty()) throw DataError("average_attention: no profiles");
  const std::size_t m = profiles.front()->size();
  AttentionProfile out(m, 0.0);
  for (const auto* p : profiles) {
    if (p->size() != m) throw DataError("average_attention: profile lengths differ");
    for (std::size_t i = 0; i < m; ++i) out[i] += (*p)[i];
  }
  const double inv = 1.0 / static_cast<double>(profiles.size());
  for (double& v : out) v *= inv;
  return out;
}

AttentionProfile average_attention(std::span<const AttentionProfile> profiles) {
  std::vector<const AttentionProfile*> ptrs;
  ptrs.reserve(profiles.size());
  for (const auto& p : profiles) ptrs.push_back(&p);
  return average_attention(std::span<const AttentionProfile* const>(ptrs));
}

std::vector<EnsembleSpec> build_ensembles(std::span<const RunRecord* const> pool,
                                          EnsembleStrategy strategy, std::size_t size,
                                          std::size_t n_ensembles, std::uint64_t seed) {
  if (size == 0) throw ConfigError("ensemble size must be positive");
  if (size > pool.size()) {
    throw ConfigError("ensemble size " + std::to_string(size) + " exceeds run pool of " +
                      std::to_string(pool.size()));
  }
  if (strategy == EnsembleStrategy::SingleConfig) {
    for (const auto* r : pool) {
      if (r->config_id != pool.front()->config_id) {
        throw ConfigError("single-config ensemble pool mixes configurations");
      }
    }
  }
  Rng rng(seed);
  std::vector<std::size_t> idx(pool.size());
  std::vector<EnsembleSpec> out;
  out.reserve(n_ensembles);
  for (std::size_t e = 0; e < n_ensembles; ++e) {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    EnsembleSpec spec;
    spec.strategy = strategy;
    for (std::size_t k = 0; k < size; ++k) {
      const auto j = k + uniform_index(rng, idx.size() - k);
      std::swap(idx[k], idx[j]);
      spec.members.push_back(pool[idx[k]]);
    }
    out.push_back(std::move(spec));
  }
  return out;
}

double ensemble_iauc(const EnsembleSpec& ensemble, std::span<const Bag> test_bags,
                     ProblemKind problem, const IaucSettings& iauc) {
  if (ensemble.members.empty()) throw DataError("ensemble has no members");
  for (const auto* r : ensemble.members) {
    if (r->test_attention.size() != test_bags.size()) {
      throw DataError("run " + r->config_id + "/" + std::to_string(r->seed) +
                      " lacks attention for some test bags");
    }
  }
  std::vector<AttentionProfile> averaged;
  averaged.reserve(test_bags.size());
  std::vector<const AttentionProfile*> per_bag(ensemble.members.size());
  for (std::size_t b = 0; b < test_bags.size(); ++b) {
    for (std::size_t k = 0; k < ensemble.members.size(); ++k)
      per_bag[k] = &ensemble.members[k]->test_attention[b];
    averaged.push_back(average_attention(std::span<const AttentionProfile* const>(per_bag)));
  }
  return compute_iauc(averaged, test_bags, problem, iauc);
}

namespace {

struct MeanCi {
  double mean, lo, hi;
};

// Normal-approximation 95% interval of the mean.
MeanCi mean_ci(const std::vector<double>& xs) {
  const auto n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (xs.size() < 2) return {mean, mean, mean};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double half = 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return {mean, std::max(0.0, mean - half), std::min(1.0, mean + half)};
}

double bad_fraction(std::span<const RunRecord* const> pool, EnsembleStrategy strategy,
                    std::size_t size, std::span<const Bag> test_bags, ProblemKind problem,
                    const CurveOptions& options, std::uint64_t seed) {
  const auto ensembles = build_ensembles(pool, strategy, size, options.n_ensembles, seed);
  std::size_t bad = 0;
  for (const auto& e : ensembles) {
    if (ensemble_iauc(e, test_bags, problem, options.iauc) <= kBadEnsembleIauc) ++bad;
  }
  return ensembles.empty() ? 0.0
                           : static_cast<double>(bad) / static_cast<double>(ensembles.size());
}

}  // namespace

EnsembleCurve bad_ensemble_curve(std::span<const RunRecord* const> pool, EnsembleStrategy strategy,
                                 std::span<const Bag> test_bags, ProblemKind problem,
                                 const CurveOptions& options) {
  EnsembleCurve curve;
  curve.strategy = strategy;
  if (strategy == EnsembleStrategy::MultiConfig) {
    for (std::size_t s : options.sizes) {
      CurvePoint pt;
      pt.size = s;
      for (std::size_t rep = 0; rep < std::max<std::size_t>(1, options.repetitions); ++rep) {
        const auto seed = derive_seed(options.seed, {0x6d756c7469ULL, s, rep});
        pt.samples.push_back(bad_fraction(pool, strategy, s, test_bags, problem, options, seed));
      }
      const auto ci = mean_ci(pt.samples);
      pt.mean_bad_fraction = ci.mean;
      pt.ci_low = ci.lo;
      pt.ci_high = ci.hi;
      curve.points.push_back(std::move(pt));
    }
    return curve;
  }

  std::map<std::string, std::vector<const RunRecord*>> by_config;
  for (const auto* r : pool) by_config[r->config_id].push_back(r);
  for (const auto& [id, runs] : by_config) {
    ConfigCurve cc{id, {}};
    for (std::size_t s : options.sizes) {
      const auto seed = derive_seed(options.seed, {0x73696e676cULL, hash_string(id), s});
      cc.bad_fraction.push_back(bad_fraction(runs, strategy, s, test_bags, problem, options, seed));
    }
    curve.per_config.push_back(std::move(cc));
  }
  for (std::size_t i = 0; i < options.sizes.size(); ++i) {
    CurvePoint pt;
    pt.size = options.sizes[i];
    for (const auto& cc : curve.per_config) pt.samples.push_back(cc.bad_fraction[i]);
    if (!pt.samples.empty()) {
      const auto ci = mean_ci(pt.samples);
      pt.mean_bad_fraction = ci.mean;
      pt.ci_low = ci.lo;
      pt.ci_high = ci.hi;
    }
    curve.points.push_back(std::move(pt));
  }
  return curve;
}

}  // namespace milattn

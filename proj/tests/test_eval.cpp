#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "milattn/ensemble.hpp"
#include "milattn/error.hpp"
#include "milattn/metrics.hpp"
#include "test_util.hpp"

namespace milattn {
namespace {

using testing::labelled_bag;
using testing::pair_count_auc;

TEST(Auroc, PerfectSeparation) {
  const std::vector<double> s{0.9, 0.8, 0.7, 0.1};
  const std::vector<int> y{1, 1, 0, 0};
  EXPECT_DOUBLE_EQ(auroc(s, y), 1.0);
}

TEST(Auroc, TieCountsHalf) {
  const std::vector<double> s{0.8, 0.5, 0.5, 0.2};
  const std::vector<int> y{1, 1, 0, 0};
  EXPECT_DOUBLE_EQ(auroc(s, y), 0.875);
}

TEST(Auroc, MatchesPairCounting) {
  Rng rng(1);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + uniform_index(rng, 15);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(uniform_index(rng, 5)) / 4.0;
      y[i] = static_cast<int>(uniform_index(rng, 2));
    }
    y[0] = 0;
    y[1] = 1;
    EXPECT_DOUBLE_EQ(auroc(s, y), pair_count_auc(s, y));
  }
}

TEST(Auroc, PermutationNull) {
  Rng rng(2);
  std::vector<double> s(10000);
  std::vector<int> y(10000);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = uniform01(rng);
    y[i] = static_cast<int>(i % 2);
  }
  shuffle(y.begin(), y.end(), rng);
  EXPECT_NEAR(auroc(s, y), 0.5, 0.02);
}

TEST(Auroc, SingleClassRejected) {
  const std::vector<double> s{0.1, 0.2};
  EXPECT_THROW(auroc(s, std::vector<int>{1, 1}), MetricError);
  EXPECT_THROW(auroc(s, std::vector<int>{0, 0}), MetricError);
}

TEST(Midranks, Ties) {
  const std::vector<double> v{3.0, 1.0, 3.0, 2.0};
  EXPECT_EQ(midranks(v), (std::vector<double>{3.5, 1.0, 3.5, 2.0}));
}

TEST(Iauc, KeyAlignedIsPerfect) {
  std::vector<Bag> bags{labelled_bag({0, 1, 0, 1}, 1), labelled_bag({1, 0, 0}, 1), labelled_bag({0, 0}, 0)};
  std::vector<AttentionProfile> att;
  for (const auto& b : bags) {
    AttentionProfile a;
    double n1 = 0;
    for (int y : b.instance_labels) n1 += y;
    for (int y : b.instance_labels) a.push_back(n1 > 0 ? y / n1 : 1.0 / b.size());
    att.push_back(a);
  }
  EXPECT_DOUBLE_EQ(iauc_of_run(att, bags, ProblemKind::MIL), 1.0);
}

TEST(Iauc, UniformAttentionIsHalf) {
  std::vector<Bag> bags{labelled_bag({0, 1, 2, 0}, 0), labelled_bag({0, 2, 0, 0}, 1)};
  std::vector<AttentionProfile> att{AttentionProfile(4, 0.25), AttentionProfile(4, 0.25)};
  EXPECT_DOUBLE_EQ(iauc_of_run(att, bags, ProblemKind::XOR), 0.5);
  EXPECT_DOUBLE_EQ(iauc_pooled(att, bags, ProblemKind::XOR), 0.5);
}

TEST(Iauc, TwoBagHandCase) {
  std::vector<Bag> bags{labelled_bag({1, 0, 1, 0, 0}, 1), labelled_bag({0, 1, 0, 0}, 1)};
  std::vector<AttentionProfile> att{{0.3, 0.2, 0.1, 0.3, 0.1}, {0.4, 0.3, 0.2, 0.1}};
  const double expected = 0.5 * (pair_count_auc(att[0], {1, 0, 1, 0, 0}) + pair_count_auc(att[1], {0, 1, 0, 0}));
  EXPECT_DOUBLE_EQ(iauc_of_run(att, bags, ProblemKind::MIL), expected);
}

TEST(Iauc, Eligibility) {
  // AND: the negative bag {0,1} holds key and non-key instances.
  std::vector<Bag> bags{labelled_bag({0, 1, 0}, 0), labelled_bag({0, 1, 2}, 1), labelled_bag({0, 0}, 0)};
  std::vector<AttentionProfile> att{{0.5, 0.1, 0.4}, {0.2, 0.4, 0.4}, {0.5, 0.5}};
  const double neg = pair_count_auc(att[0], {0, 1, 0});
  const double pos = pair_count_auc(att[1], {0, 1, 1});
  EXPECT_DOUBLE_EQ(iauc_of_run(att, bags, ProblemKind::AND), 0.5 * (neg + pos));
  EXPECT_DOUBLE_EQ(iauc_of_run(att, bags, ProblemKind::AND, Eligibility::PositiveBagsOnly), pos);
  IaucSettings pooled{Eligibility::KeyAndNonKey, IaucAggregation::Pooled};
  std::vector<double> s{0.5, 0.1, 0.4, 0.2, 0.4, 0.4};
  EXPECT_DOUBLE_EQ(compute_iauc(att, bags, ProblemKind::AND, pooled), pair_count_auc(s, {0, 1, 0, 0, 1, 1}));
}

TEST(Iauc, NoEligibleBag) {
  std::vector<Bag> bags{labelled_bag({0, 0}, 0)};
  std::vector<AttentionProfile> att{{0.5, 0.5}};
  EXPECT_THROW(iauc_of_run(att, bags, ProblemKind::MIL), MetricError);
}

TEST(Summary, Thresholds) {
  std::vector<double> v(100, 0.8);
  for (int i = 0; i < 12; ++i) v[i] = 0.6;
  auto s = summarize_config("a", v);
  EXPECT_DOUBLE_EQ(s.bad_fraction, 0.12);
  EXPECT_TRUE(s.is_bad);

  std::fill(v.begin(), v.end(), 0.8);
  for (int i = 0; i < 9; ++i) v[i] = 0.6;
  EXPECT_FALSE(summarize_config("b", v).is_bad);

  std::fill(v.begin(), v.end(), 0.8);
  for (int i = 0; i < 10; ++i) v[i] = 0.6499;
  EXPECT_TRUE(summarize_config("c", v).is_bad);

  // 0.65 itself is not bad.
  std::fill(v.begin(), v.end(), 0.65);
  EXPECT_DOUBLE_EQ(summarize_config("d", v).bad_fraction, 0.0);

  const auto all = summarize_config("e", std::vector<double>(100, 0.75));
  EXPECT_DOUBLE_EQ(all.mean_iauc, 0.75);
  EXPECT_FALSE(all.is_bad);
}

TEST(Spearman, Cases) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  EXPECT_DOUBLE_EQ(spearman(x, x).rho, 1.0);
  EXPECT_NEAR(spearman(std::vector<double>{1, 2, 3}, std::vector<double>{3, 1, 2}).rho, -0.5, 1e-15);
  const auto d = spearman(std::vector<double>{1, 1, 1}, std::vector<double>{3, 1, 2});
  EXPECT_TRUE(d.degenerate);
  EXPECT_EQ(d.rho, 0.0);
}

TEST(Spearman, RankFormulaOnDistinctValues) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + uniform_index(rng, 20);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = uniform01(rng);
      y[i] = uniform01(rng);
    }
    auto rank = [](const std::vector<double>& v) {
      std::vector<double> r(v.size());
      for (std::size_t i = 0; i < v.size(); ++i)
        r[i] = 1.0 + static_cast<double>(std::count_if(v.begin(), v.end(), [&](double o) { return o < v[i]; }));
      return r;
    };
    const auto rx = rank(x), ry = rank(y);
    double d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
    const double nn = static_cast<double>(n);
    EXPECT_NEAR(spearman(x, y).rho, 1.0 - 6.0 * d2 / (nn * (nn * nn - 1.0)), 1e-12);
  }
}

TEST(Percentile, LinearInterpolation) {
  const std::vector<double> v{4, 1, 3, 2};
  EXPECT_DOUBLE_EQ(percentile(v, 0), 1.0);
  EXPECT_DOUBLE_EQ(percentile(v, 100), 4.0);
  EXPECT_DOUBLE_EQ(percentile(v, 50), 2.5);
  EXPECT_DOUBLE_EQ(percentile(v, 90), 3.7);
}

TEST(DeltaIauc, Cases) {
  std::vector<AccuracyIauc> same{{0.9, 0.7}, {0.95, 0.7}, {1.0, 0.7}};
  EXPECT_DOUBLE_EQ(delta_iauc(same), 0.0);

  std::vector<AccuracyIauc> ten;
  for (int i = 0; i < 10; ++i) ten.push_back({0.90 + 0.01 * i, 0.5 + 0.03 * i});
  EXPECT_DOUBLE_EQ(delta_iauc(ten), 0.0);
}

TEST(DeltaIauc, TwentyRunHandCase) {
  Rng rng(4);
  std::vector<AccuracyIauc> runs;
  for (int i = 0; i < 20; ++i) {
    runs.push_back({0.8 + 0.01 * static_cast<double>(uniform_index(rng, 21)), uniform01(rng)});
  }
  std::vector<double> acc;
  for (const auto& r : runs) acc.push_back(r.validation_accuracy);
  std::sort(acc.begin(), acc.end());
  const double pos = 0.9 * 19.0;
  const auto lo = static_cast<std::size_t>(pos);
  const double cut = acc[lo] + (pos - static_cast<double>(lo)) * (acc[lo + 1] - acc[lo]);
  double mn = 2.0, mx = -1.0;
  for (const auto& r : runs)
    if (r.validation_accuracy >= cut) {
      mn = std::min(mn, r.iauc);
      mx = std::max(mx, r.iauc);
    }
  EXPECT_DOUBLE_EQ(delta_iauc(runs), mx - mn);
}

TEST(Accuracy, Cases) {
  EXPECT_DOUBLE_EQ(accuracy(std::vector<int>{1, 0, 1}, std::vector<int>{1, 0, 1}), 1.0);
  EXPECT_DOUBLE_EQ(accuracy(std::vector<int>{1, 1, 0, 0}, std::vector<int>{1, 0, 1, 0}), 0.5);
  Rng rng(5);
  std::vector<int> p(10000), y(10000);
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = static_cast<int>(uniform_index(rng, 2));
    y[i] = static_cast<int>(i % 2);
  }
  EXPECT_NEAR(accuracy(p, y), 0.5, 0.02);
}

TEST(AverageAttention, Cases) {
  const std::vector<AttentionProfile> two{{0.6, 0.4}, {0.2, 0.8}};
  const auto a = average_attention(two);
  EXPECT_NEAR(a[0], 0.4, 1e-15);
  EXPECT_NEAR(a[1], 0.6, 1e-15);

  const std::vector<AttentionProfile> same(4, AttentionProfile{0.1, 0.2, 0.7});
  EXPECT_EQ(average_attention(same), same[0]);

  Rng rng(6);
  std::vector<AttentionProfile> five(5, AttentionProfile(6));
  for (auto& p : five) {
    double s = 0.0;
    for (double& v : p) s += (v = uniform01(rng));
    for (double& v : p) v /= s;
  }
  const auto m = average_attention(five);
  double total = 0.0;
  for (std::size_t i = 0; i < 6; ++i) {
    double ref = 0.0;
    for (const auto& p : five) ref += p[i];
    EXPECT_NEAR(m[i], ref / 5.0, 1e-15);
    total += m[i];
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

std::vector<Bag> hand_bags() {
  return {labelled_bag({0, 1, 0, 1}, 1), labelled_bag({1, 0, 0}, 1), labelled_bag({0, 0, 1, 0}, 1)};
}

RunRecord run_with(std::string id, std::vector<AttentionProfile> att, const std::vector<Bag>& bags) {
  RunRecord r;
  r.config_id = std::move(id);
  r.test_attention = std::move(att);
  r.test_iauc = iauc_of_run(r.test_attention, bags, ProblemKind::MIL);
  return r;
}

std::vector<AttentionProfile> uniform_attention(const std::vector<Bag>& bags) {
  std::vector<AttentionProfile> att;
  for (const auto& b : bags) att.emplace_back(b.size(), 1.0 / static_cast<double>(b.size()));
  return att;
}

std::vector<AttentionProfile> key_attention(const std::vector<Bag>& bags) {
  std::vector<AttentionProfile> att;
  for (const auto& b : bags) {
    double n1 = 0;
    for (int y : b.instance_labels) n1 += y;
    AttentionProfile a;
    for (int y : b.instance_labels) a.push_back(y / n1);
    att.push_back(a);
  }
  return att;
}

TEST(BuildEnsembles, DistinctMembersAndDeterminism) {
  const auto bags = hand_bags();
  std::vector<RunRecord> runs;
  for (int i = 0; i < 100; ++i) runs.push_back(run_with("c" + std::to_string(i % 5), uniform_attention(bags), bags));
  std::vector<const RunRecord*> pool;
  for (const auto& r : runs) pool.push_back(&r);

  const auto e = build_ensembles(pool, EnsembleStrategy::MultiConfig, 20, 30, 7);
  ASSERT_EQ(e.size(), 30u);
  for (const auto& spec : e) {
    EXPECT_EQ(spec.size(), 20u);
    EXPECT_EQ(std::set<const RunRecord*>(spec.members.begin(), spec.members.end()).size(), 20u);
  }
  const auto again = build_ensembles(pool, EnsembleStrategy::MultiConfig, 20, 30, 7);
  for (std::size_t i = 0; i < e.size(); ++i) EXPECT_EQ(e[i].members, again[i].members);

  EXPECT_ANY_THROW(build_ensembles(pool, EnsembleStrategy::SingleConfig, 2, 3, 7));
  EXPECT_ANY_THROW(build_ensembles(pool, EnsembleStrategy::MultiConfig, 101, 3, 7));
}

TEST(BuildEnsembles, SizeOneMatchesRuns) {
  const auto bags = hand_bags();
  Rng rng(8);
  std::vector<RunRecord> runs;
  for (int i = 0; i < 10; ++i) {
    auto att = uniform_attention(bags);
    for (auto& a : att) {
      double s = 0.0;
      for (double& v : a) s += (v = uniform01(rng));
      for (double& v : a) v /= s;
    }
    runs.push_back(run_with("c", att, bags));
  }
  std::vector<const RunRecord*> pool;
  for (const auto& r : runs) pool.push_back(&r);
  for (const auto& spec : build_ensembles(pool, EnsembleStrategy::SingleConfig, 1, 20, 9)) {
    ASSERT_EQ(spec.size(), 1u);
    EXPECT_DOUBLE_EQ(ensemble_iauc(spec, bags, ProblemKind::MIL), spec.members[0]->test_iauc);
  }
}

TEST(EnsembleIauc, HandCases) {
  const auto bags = hand_bags();
  const auto good = run_with("a", key_attention(bags), bags);
  const auto flat = run_with("b", uniform_attention(bags), bags);
  EnsembleSpec same{{&good, &good}, EnsembleStrategy::SingleConfig};
  EXPECT_DOUBLE_EQ(ensemble_iauc(same, bags, ProblemKind::MIL), good.test_iauc);

  EnsembleSpec mixed{{&good, &flat}, EnsembleStrategy::MultiConfig};
  EXPECT_DOUBLE_EQ(ensemble_iauc(mixed, bags, ProblemKind::MIL), 1.0);

  const auto x = run_with("c", {{0.1, 0.2, 0.3, 0.4}, {0.2, 0.5, 0.3}, {0.4, 0.3, 0.2, 0.1}}, bags);
  const auto y = run_with("d", {{0.4, 0.1, 0.4, 0.1}, {0.6, 0.2, 0.2}, {0.1, 0.1, 0.1, 0.7}}, bags);
  const auto z = run_with("e", {{0.25, 0.25, 0.25, 0.25}, {0.1, 0.1, 0.8}, {0.3, 0.3, 0.3, 0.1}}, bags);
  EnsembleSpec three{{&x, &y, &z}, EnsembleStrategy::MultiConfig};
  double expected = 0.0;
  for (std::size_t b = 0; b < bags.size(); ++b) {
    std::vector<double> avg(bags[b].size());
    for (std::size_t i = 0; i < avg.size(); ++i)
      avg[i] = (x.test_attention[b][i] + y.test_attention[b][i] + z.test_attention[b][i]) / 3.0;
    expected += pair_count_auc(avg, bags[b].instance_labels) / 3.0;
  }
  EXPECT_NEAR(ensemble_iauc(three, bags, ProblemKind::MIL), expected, 1e-15);
}

EnsembleCurve curve_of(const std::vector<RunRecord>& runs, const std::vector<Bag>& bags, EnsembleStrategy s) {
  std::vector<const RunRecord*> pool;
  for (const auto& r : runs) pool.push_back(&r);
  CurveOptions o;
  o.sizes = s == EnsembleStrategy::MultiConfig ? std::vector<std::size_t>{1, 2, 5, 20}
                                               : std::vector<std::size_t>{1, 2, 5};
  o.seed = 3;
  return bad_ensemble_curve(pool, s, bags, ProblemKind::MIL, o);
}

TEST(BadEnsembleCurve, ConstantPools) {
  const auto bags = hand_bags();
  std::vector<RunRecord> good, bad;
  for (int i = 0; i < 30; ++i) {
    good.push_back(run_with("g" + std::to_string(i % 3), key_attention(bags), bags));
    bad.push_back(run_with("b" + std::to_string(i % 3), uniform_attention(bags), bags));
  }
  for (auto s : {EnsembleStrategy::MultiConfig, EnsembleStrategy::SingleConfig}) {
    for (const auto& p : curve_of(good, bags, s).points) EXPECT_EQ(p.mean_bad_fraction, 0.0);
    const auto c = curve_of(bad, bags, s);
    ASSERT_EQ(c.points.size(), s == EnsembleStrategy::MultiConfig ? 4u : 3u);
    for (const auto& p : c.points) EXPECT_EQ(p.mean_bad_fraction, 1.0);
  }
}

TEST(BadEnsembleCurve, AveragingRestoresRanking) {
  const auto bags = hand_bags();
  std::vector<RunRecord> runs;
  for (int i = 0; i < 100; ++i) {
    runs.push_back(run_with("c" + std::to_string(i % 5), i % 10 < 3 ? uniform_attention(bags) : key_attention(bags), bags));
  }
  const auto c = curve_of(runs, bags, EnsembleStrategy::MultiConfig);
  ASSERT_EQ(c.points.front().size, 1u);
  ASSERT_EQ(c.points.back().size, 20u);
  EXPECT_GT(c.points.front().mean_bad_fraction, 0.1);
  EXPECT_LT(c.points.back().mean_bad_fraction, c.points.front().mean_bad_fraction);
  EXPECT_EQ(c.points.front().samples.size(), 5u);
}

}  // namespace
}  // namespace milattn

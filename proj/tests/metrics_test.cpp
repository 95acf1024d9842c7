#include "cohere/metrics.hpp"

#include <gtest/gtest.h>

#include "cohere/agreement.hpp"
#include "cohere/rng.hpp"
#include "oracles.hpp"

using namespace cohere;

namespace {

TEST(Accuracy, Basics) {
  EXPECT_DOUBLE_EQ(accuracy<int>({1, 2, 3}, {1, 2, 3}), 1.0);
  EXPECT_DOUBLE_EQ(accuracy<int>({1, 1, 2, 2}, {1, 2, 2, 1}), 0.5);
  EXPECT_THROW(accuracy<int>({1}, {1, 2}), DomainError);
  EXPECT_THROW(accuracy<int>({}, {}), DomainError);
}

TEST(Spearman, KnownValues) {
  EXPECT_NEAR(*spearman({1, 2, 3, 4}, {1, 3, 2, 4}), 0.8, 1e-12);
  EXPECT_NEAR(*spearman({1, 2, 3}, {10, 20, 30}), 1.0, 1e-12);
  EXPECT_NEAR(*spearman({1, 2, 3}, {30, 20, 10}), -1.0, 1e-12);
  EXPECT_FALSE(spearman({2, 2, 2}, {1, 2, 3}).has_value());
}

TEST(FBeta, KnownValues) {
  const auto perfect = f_beta({true, false, true}, {true, false, true}, 0.5);
  EXPECT_DOUBLE_EQ(perfect.precision, 1.0);
  EXPECT_DOUBLE_EQ(perfect.recall, 1.0);
  EXPECT_DOUBLE_EQ(perfect.f, 1.0);

  // P = R = 0.5 -> f = 0.5 for any beta
  const auto half = f_beta({true, true, false, false}, {true, false, true, false}, 0.5);
  EXPECT_DOUBLE_EQ(half.precision, 0.5);
  EXPECT_DOUBLE_EQ(half.recall, 0.5);
  EXPECT_DOUBLE_EQ(half.f, 0.5);
}

TEST(FBeta, FormulaAtPaperScale) {
  // P=0.43, R=0.51, beta=0.5 -> ~0.4439
  const double p = 0.43, r = 0.51, b2 = 0.25;
  const double f = (1 + b2) * p * r / (b2 * p + r);
  EXPECT_NEAR(f, 0.4439271256, 1e-9);
}

TEST(OrderingPairAccuracy, TieRule) {
  EXPECT_DOUBLE_EQ(ordering_pair_accuracy({{2, 1}, {3, 1}}), 1.0);
  EXPECT_DOUBLE_EQ(ordering_pair_accuracy({{1, 1}, {2, 2}}), 0.0);
  EXPECT_DOUBLE_EQ(ordering_pair_accuracy({{2, 1}, {1, 2}}), 0.5);
}

TEST(Wilcoxon, SpecExamples) {
  // n=10 all above mu, no ties: W+ = 55, p = 2/1024
  std::vector<double> v;
  for (int i = 1; i <= 10; ++i) v.push_back(i + 0.5);
  const auto r = wilcoxon_one_sample(v, 0.0);
  EXPECT_DOUBLE_EQ(r.w_plus, 55.0);
  EXPECT_NEAR(r.p, 2.0 / 1024.0, 1e-12);

  // single value above mu -> p = 1 two-sided
  const auto single = wilcoxon_one_sample({3.0}, 0.0);
  EXPECT_DOUBLE_EQ(single.p, 1.0);

  // all equal to mu -> degenerate
  const auto degen = wilcoxon_one_sample({2.0, 2.0}, 2.0);
  EXPECT_TRUE(degen.degenerate);
  EXPECT_DOUBLE_EQ(degen.p, 1.0);
}

TEST(Wilcoxon, SymmetricNearOne) {
  const auto r = wilcoxon_one_sample({-3, -2, -1, 1, 2, 3}, 0.0);
  EXPECT_GT(r.p, 0.9);
}

TEST(Wilcoxon, ExactMatchesEnumeration) {
  Rng rng(808);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + int(rng.next_below(12));
    std::vector<double> v(n);
    for (auto& x : v) x = std::round(rng.next_range(-3, 3) * 4.0) / 4.0;  // induce ties
    const double mu = 0.0;
    bool all_zero = true;
    for (double x : v)
      if (x != mu) all_zero = false;
    if (all_zero) continue;
    const auto fast = wilcoxon_one_sample(v, mu);
    EXPECT_NEAR(fast.p, oracle::wilcoxon_exact(v, mu), 1e-9) << "n=" << n;
  }
}

TEST(Wilcoxon, NormalApproxSane) {
  std::vector<double> v;
  Rng rng(5);
  for (int i = 0; i < 40; ++i) v.push_back(rng.next_range(0.5, 1.5));
  const auto above = wilcoxon_one_sample(v, 0.0);
  EXPECT_LT(above.p, 1e-6);
  std::vector<double> sym;
  for (int i = 0; i < 40; ++i) sym.push_back(rng.next_range(-1.0, 1.0));
  const auto centered = wilcoxon_one_sample(sym, 0.0);
  EXPECT_GT(centered.p, 0.01);
}

TEST(Fdr, SpecExamples) {
  EXPECT_EQ(fdr_adjust({0.03}), (std::vector<double>{0.03}));
  const auto adj = fdr_adjust({0.01, 0.02, 0.03, 0.04});
  for (double a : adj) EXPECT_NEAR(a, 0.04, 1e-12);
}

TEST(Fdr, AdjustedAtLeastRaw) {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 1 + int(rng.next_below(10));
    std::vector<double> p(m);
    for (auto& x : p) x = rng.next_double();
    const auto adj = fdr_adjust(p);
    for (int i = 0; i < m; ++i) {
      EXPECT_GE(adj[i] + 1e-15, p[i]);
      EXPECT_LE(adj[i], 1.0);
    }
  }
}

TEST(Fdr, RejectsOutOfRange) {
  EXPECT_THROW(fdr_adjust({0.5, 1.5}), DomainError);
  EXPECT_THROW(fdr_adjust({-0.1}), DomainError);
}

TEST(WeightedKappa, KnownValues) {
  EXPECT_NEAR(*weighted_kappa({1, 2, 3}, {1, 2, 3}, 3), 1.0, 1e-12);
  EXPECT_NEAR(*weighted_kappa({1, 2, 3}, {3, 2, 1}, 3), -1.0, 1e-12);
  EXPECT_FALSE(weighted_kappa({2, 2, 2}, {1, 2, 3}, 3).has_value());
}

TEST(WeightedKappa, IndependentShufflesNearZero) {
  Rng rng(2024);
  const int n = 60000;
  std::vector<int> a(n), b(n);
  for (int i = 0; i < n; ++i) {
    a[i] = 1 + int(rng.next_below(3));
    b[i] = 1 + int(rng.next_below(3));
  }
  EXPECT_NEAR(*weighted_kappa(a, b, 3), 0.0, 0.02);
}

TEST(Icc, KnownValues) {
  // identical raters, items vary -> 1
  EXPECT_NEAR(*icc({{1, 1}, {2, 2}, {3, 3}}), 1.0, 1e-12);
  // ANOVA-table oracle on a 4-item example
  const std::vector<std::pair<double, double>> pairs = {{1, 2}, {2, 2}, {3, 3}, {1, 1}};
  EXPECT_NEAR(*icc(pairs), *oracle::icc(pairs), 1e-12);
  EXPECT_FALSE(icc({{2, 2}, {2, 2}}).has_value());
}

TEST(Icc, IndependentRatingsNearZero) {
  Rng rng(31415);
  std::vector<std::pair<double, double>> pairs;
  for (int i = 0; i < 60000; ++i)
    pairs.push_back({1.0 + double(rng.next_below(3)), 1.0 + double(rng.next_below(3))});
  EXPECT_NEAR(*icc(pairs), 0.0, 0.02);
}

// --------------------------------------------------------------------------
// Oracle sweeps: exhaustive (size <= 6 over a discrete alphabet) plus random.

TEST(OracleSweep, AccuracyAndKappaExhaustive) {
  for (int n = 2; n <= 4; ++n) {
    const int total = int(std::pow(3, n));
    for (int ca = 0; ca < total; ++ca) {
      for (int cb = 0; cb < total; ++cb) {
        std::vector<int> a(n), b(n);
        int xa = ca, xb = cb;
        for (int i = 0; i < n; ++i) {
          a[i] = 1 + xa % 3;
          xa /= 3;
          b[i] = 1 + xb % 3;
          xb /= 3;
        }
        EXPECT_NEAR(accuracy(a, b), oracle::accuracy(a, b), 1e-12);
        const auto mine = weighted_kappa(a, b, 3);
        const auto ref = oracle::weighted_kappa(a, b, 3);
        ASSERT_EQ(mine.has_value(), ref.has_value());
        if (mine) { EXPECT_NEAR(*mine, *ref, 1e-9); }
      }
    }
  }
}

TEST(OracleSweep, RandomInputs) {
  Rng rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + int(rng.next_below(49));
    std::vector<double> sa(n), sb(n);
    std::vector<int> la(n), lb(n);
    std::vector<bool> pa(n), pb(n);
    std::vector<std::pair<double, double>> pairs(n);
    for (int i = 0; i < n; ++i) {
      sa[i] = std::round(rng.next_range(-5, 5) * 2.0) / 2.0;
      sb[i] = std::round(rng.next_range(-5, 5) * 2.0) / 2.0;
      la[i] = 1 + int(rng.next_below(3));
      lb[i] = 1 + int(rng.next_below(3));
      pa[i] = rng.next_below(2) == 1;
      pb[i] = rng.next_below(2) == 1;
      pairs[i] = {double(1 + rng.next_below(3)), double(1 + rng.next_below(3))};
    }
    const auto s1 = spearman(sa, sb);
    const auto s2 = oracle::spearman(sa, sb);
    ASSERT_EQ(s1.has_value(), s2.has_value());
    if (s1) { EXPECT_NEAR(*s1, *s2, 1e-9); }

    const auto f1 = f_beta(pa, pb, 0.5);
    const auto f2 = oracle::f_beta(pa, pb, 0.5);
    EXPECT_NEAR(f1.f, f2.f, 1e-9);
    EXPECT_NEAR(f1.precision, f2.p, 1e-9);
    EXPECT_NEAR(f1.recall, f2.r, 1e-9);

    const auto k1 = weighted_kappa(la, lb, 3);
    const auto k2 = oracle::weighted_kappa(la, lb, 3);
    ASSERT_EQ(k1.has_value(), k2.has_value());
    if (k1) { EXPECT_NEAR(*k1, *k2, 1e-9); }

    const auto i1 = icc(pairs);
    const auto i2 = oracle::icc(pairs);
    ASSERT_EQ(i1.has_value(), i2.has_value());
    if (i1) { EXPECT_NEAR(*i1, *i2, 1e-9); }

    std::vector<double> pv(1 + rng.next_below(8));
    for (auto& x : pv) x = rng.next_double();
    const auto adj1 = fdr_adjust(pv);
    const auto adj2 = oracle::bh_adjust(pv);
    for (std::size_t i = 0; i < pv.size(); ++i) EXPECT_NEAR(adj1[i], adj2[i], 1e-9);
  }
}

// --------------------------------------------------------------------------
// Agreement simulation

TEST(SimulateAgreement, UnanimousRatersPerfectAgreement) {
  std::vector<std::vector<int>> ratings = {{1, 1, 1}, {2, 2, 2}, {3, 3, 3}, {1, 1, 1}, {2, 2, 2}};
  const auto report = simulate_agreement(ratings, 50, 7);
  EXPECT_NEAR(report.icc_mean, 1.0, 1e-12);
  EXPECT_NEAR(report.icc_std, 0.0, 1e-12);
  EXPECT_NEAR(report.kappa_mean, 1.0, 1e-12);
}

TEST(SimulateAgreement, DeterministicForSeed) {
  std::vector<std::vector<int>> ratings;
  Rng rng(1);
  for (int i = 0; i < 40; ++i)
    ratings.push_back({1 + int(rng.next_below(3)), 1 + int(rng.next_below(3)), 1 + int(rng.next_below(3))});
  const auto a = simulate_agreement(ratings, 100, 42);
  const auto b = simulate_agreement(ratings, 100, 42);
  EXPECT_DOUBLE_EQ(a.icc_mean, b.icc_mean);
  EXPECT_DOUBLE_EQ(a.kappa_mean, b.kappa_mean);
  EXPECT_DOUBLE_EQ(a.icc_std, b.icc_std);
}

TEST(SimulateAgreement, RequiresTwoRatings) {
  EXPECT_THROW(simulate_agreement({{1}}, 10, 1), DomainError);
}

TEST(MeanStd, Basics) {
  EXPECT_DOUBLE_EQ(mean_of({1, 2, 3}), 2.0);
  EXPECT_DOUBLE_EQ(stddev_of({2, 2, 2}), 0.0);
  EXPECT_NEAR(stddev_of({1, 2, 3}), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(stddev_of({5}), 0.0);
}

}  // namespace

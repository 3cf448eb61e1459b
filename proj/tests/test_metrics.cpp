#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <vector>

#include "oracles.hpp"
#include "portastat/metrics.hpp"
#include "portastat/random.hpp"

using namespace portastat;

namespace {

Eigen::ArrayXd arr(std::initializer_list<double> v) {
  Eigen::ArrayXd a(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) a(i++) = x;
  return a;
}

Eigen::ArrayXi ints(std::initializer_list<int> v) {
  Eigen::ArrayXi a(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (int x : v) a(i++) = x;
  return a;
}

std::vector<double> to_vec(const Eigen::ArrayXd& a) { return {a.data(), a.data() + a.size()}; }

/// Scores on a coarse grid so ties are common.
void random_instance(Rng& rng, std::size_t n, Eigen::ArrayXd& scores, Eigen::ArrayXi& labels) {
  scores.resize(static_cast<Eigen::Index>(n));
  labels.resize(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    scores(i) = static_cast<double>(rng.index(20)) / 20.0;
    labels(i) = rng.bernoulli(0.4) ? 1 : 0;
  }
  labels(0) = 0;
  labels(1) = 1;
}

}  // namespace

TEST(Auc, PerfectSeparation) { EXPECT_EQ(auc(arr({0.1, 0.9}), ints({0, 1})), 1.0); }

TEST(Auc, CompleteTies) { EXPECT_EQ(auc(arr({0.5, 0.5}), ints({0, 1})), 0.5); }

TEST(Auc, ThreeOfFourPairsConcordant) {
  EXPECT_DOUBLE_EQ(auc(arr({0.2, 0.6, 0.4, 0.8}), ints({0, 0, 1, 1})), 0.75);
}

TEST(Auc, SingleClassIsAnError) {
  try {
    auc(arr({0.1, 0.2}), ints({1, 1}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateLabels);
  }
  EXPECT_THROW(auc(arr({0.1, 0.2}), ints({1})), Error);
}

TEST(Auc, MatchesPairwiseOracle) {
  Rng rng(RngHandle{11, "auc-oracle"});
  for (int t = 0; t < 200; ++t) {
    Eigen::ArrayXd s;
    Eigen::ArrayXi y;
    random_instance(rng, 2 + rng.index(150), s, y);
    std::vector<int> yv(y.data(), y.data() + y.size());
    EXPECT_NEAR(auc(s, y), oracle::auc_pairwise(to_vec(s), yv), 1e-12);
  }
}

TEST(Auc, InvariantUnderMonotoneMaps) {
  Rng rng(RngHandle{12, "auc-monotone"});
  for (int t = 0; t < 100; ++t) {
    Eigen::ArrayXd s;
    Eigen::ArrayXi y;
    random_instance(rng, 100, s, y);
    const double base = auc(s, y);
    const double k = 0.5 + 3.0 * rng.uniform();
    EXPECT_EQ(auc(Eigen::ArrayXd((k * s).exp()), y), base);
    EXPECT_EQ(auc(Eigen::ArrayXd(s.cube() - 7.0), y), base);
    EXPECT_EQ(auc(Eigen::ArrayXd(1.0 / (1.0 + (-k * s).exp())), y), base);
  }
}

TEST(Auc, ComplementLabelsSumToOne) {
  Rng rng(RngHandle{13, "auc-complement"});
  for (int t = 0; t < 100; ++t) {
    Eigen::ArrayXd s;
    Eigen::ArrayXi y;
    random_instance(rng, 80, s, y);
    const Eigen::ArrayXi flipped = 1 - y;
    EXPECT_NEAR(auc(s, y) + auc(s, flipped), 1.0, 1e-12);
  }
}

TEST(Ecdf, SinglePoint) {
  Ecdf<> f(arr({5.0}));
  EXPECT_EQ(f(4.999), 0.0);
  EXPECT_EQ(f(5.0), 1.0);
  EXPECT_EQ(f(1e9), 1.0);
}

TEST(Ecdf, Duplicates) {
  Ecdf<> f(arr({1, 1, 2}));
  EXPECT_DOUBLE_EQ(f(1), 2.0 / 3.0);
  EXPECT_EQ(f(2), 1.0);
  EXPECT_EQ(f.support().size(), 2u);
}

TEST(Ecdf, SortedSupportAndFractions) {
  Ecdf<> f(arr({0.3, 0.1, 0.2}));
  EXPECT_EQ(f.support(), (std::vector<double>{0.1, 0.2, 0.3}));
  ASSERT_EQ(f.cumulative().size(), 3u);
  EXPECT_DOUBLE_EQ(f.cumulative()[0], 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(f.cumulative()[1], 2.0 / 3.0);
  EXPECT_EQ(f.cumulative()[2], 1.0);
  EXPECT_EQ(f(-1e300), 0.0);
}

TEST(Ecdf, MatchesCountingOracle) {
  Rng rng(RngHandle{14, "ecdf"});
  for (int t = 0; t < 50; ++t) {
    Eigen::ArrayXd s(1 + static_cast<Eigen::Index>(rng.index(60)));
    for (auto& x : s) x = static_cast<double>(rng.index(15));
    Ecdf<> f(s);
    for (double q = -1.0; q <= 16.0; q += 0.5) EXPECT_DOUBLE_EQ(f(q), oracle::ecdf_at(to_vec(s), q));
  }
}

TEST(Ecdf, RejectsEmptyAndNonFinite) {
  try {
    Ecdf<> f{Eigen::ArrayXd()};
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptySample);
  }
  EXPECT_THROW(Ecdf<>(arr({1.0, std::nan("")})), Error);
}

TEST(KsTwoSample, IdenticalSamples) {
  const auto r = ks_two_sample(arr({0.1, 0.4, 0.7}), arr({0.1, 0.4, 0.7}));
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_EQ(r.p_value, 1.0);
}

TEST(KsTwoSample, DisjointSupports) {
  EXPECT_EQ(ks_two_sample(arr({1, 2, 3}), arr({10, 11, 12})).statistic, 1.0);
}

TEST(KsTwoSample, TwoThirdsAtHalf) {
  const auto r = ks_two_sample(arr({0.1, 0.5}), arr({0.3, 0.7, 0.9}));
  EXPECT_NEAR(r.statistic, 2.0 / 3.0, 1e-15);
  EXPECT_EQ(r.n_a, 2u);
  EXPECT_EQ(r.n_b, 3u);
}

TEST(KsTwoSample, EmptySideIsAnError) {
  try {
    ks_two_sample(Eigen::ArrayXd(), arr({1.0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptySample);
  }
}

TEST(KsTwoSample, MatchesPooledOracleAndIsSymmetric) {
  Rng rng(RngHandle{15, "ks-oracle"});
  for (int t = 0; t < 100; ++t) {
    Eigen::ArrayXd a(1 + static_cast<Eigen::Index>(rng.index(300)));
    Eigen::ArrayXd b(1 + static_cast<Eigen::Index>(rng.index(300)));
    const bool grid = t % 2 == 0;
    for (auto& x : a) x = grid ? static_cast<double>(rng.index(30)) : rng.normal();
    for (auto& x : b) x = grid ? static_cast<double>(rng.index(30)) : rng.normal(0.2, 1.0);
    const auto ab = ks_two_sample(a, b);
    const auto ba = ks_two_sample(b, a);
    EXPECT_NEAR(ab.statistic, oracle::ks_pooled(to_vec(a), to_vec(b)), 1e-12);
    EXPECT_EQ(ab.statistic, ba.statistic);
    EXPECT_EQ(ab.p_value, ba.p_value);
    EXPECT_GE(ab.statistic, 0.0);
    EXPECT_LE(ab.statistic, 1.0);
  }
}

TEST(KolmogorovSurvival, KnownValues) {
  EXPECT_EQ(kolmogorov_survival(0.0), 1.0);
  EXPECT_NEAR(kolmogorov_survival(1.36), 0.0494, 2e-4);
  EXPECT_NEAR(kolmogorov_survival(1.0), 0.26999967, 1e-7);
  EXPECT_NEAR(kolmogorov_survival(0.5), 0.96394524, 1e-7);
  EXPECT_LT(kolmogorov_survival(5.0), 1e-20);
}

TEST(KolmogorovSurvival, SeriesAndThetaFormsAgreeNearOne) {
  // Direct alternating series, evaluated where it converges fast enough.
  for (double lambda = 0.6; lambda < 1.4; lambda += 0.05) {
    double direct = 0.0;
    for (int k = 1; k < 200; ++k) direct += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    EXPECT_NEAR(kolmogorov_survival(lambda), direct, 1e-10) << lambda;
  }
}

TEST(KolmogorovSurvival, DecreasingInLambda) {
  double prev = 1.0;
  for (double lambda = 0.01; lambda < 3.0; lambda += 0.01) {
    const double q = kolmogorov_survival(lambda);
    EXPECT_LE(q, prev + 1e-15);
    prev = q;
  }
}

TEST(GeneralizationMatrix, IdenticalInputsGiveEqualRows) {
  ScoredSet set{"m",
                {{"a", 0.1, 0, Population::Low},
                 {"b", 0.7, 1, Population::Low},
                 {"c", 0.4, 0, Population::High},
                 {"d", 0.3, 1, Population::High}}};
  const auto m = generalization_matrix(FeatureKind::Ehr, {{Population::Low, set}, {Population::High, set}});
  for (auto test : kPopulations) EXPECT_EQ(m(Population::Low, test), m(Population::High, test));
}

TEST(GeneralizationMatrix, OracleClassifierScoresOne) {
  ScoredSet set{"m",
                {{"a", 0, 0, Population::Low},
                 {"b", 1, 1, Population::Low},
                 {"c", 0, 0, Population::High},
                 {"d", 1, 1, Population::High}}};
  const auto m = generalization_matrix(FeatureKind::Ekg, {{Population::Low, set}, {Population::High, set}});
  for (const auto& cell : m.cells) EXPECT_EQ(cell.auc, 1.0);
}

TEST(GeneralizationMatrix, HandBuiltCellsMatchOracle) {
  ScoredSet from_low{"low",
                     {{"l1", 0.10, 0, Population::Low},
                      {"h1", 0.15, 1, Population::High},
                      {"l2", 0.20, 1, Population::Low},
                      {"h2", 0.25, 0, Population::High},
                      {"l3", 0.30, 0, Population::Low},
                      {"h3", 0.35, 1, Population::High},
                      {"l4", 0.40, 1, Population::Low},
                      {"h4", 0.45, 0, Population::High}}};
  ScoredSet from_high = from_low;
  from_high.model_id = "high";
  for (auto& e : from_high.entries) e.score = 1.0 - e.score * e.score;
  const std::map<Population, ScoredSet> scored{{Population::Low, from_low}, {Population::High, from_high}};
  const auto m = generalization_matrix(FeatureKind::Ehr, scored);
  for (auto train : kPopulations) {
    for (auto test : kPopulations) {
      const auto part = partition_by(scored.at(train), test);
      std::vector<double> s;
      std::vector<int> y;
      for (const auto& e : part.entries) {
        s.push_back(e.score);
        y.push_back(e.label);
      }
      EXPECT_NEAR(m(train, test), oracle::auc_pairwise(s, y), 1e-12);
      EXPECT_EQ(m.at(train, test).train, train);
      EXPECT_EQ(m.at(train, test).test, test);
    }
  }
  EXPECT_DOUBLE_EQ(m(Population::Low, Population::Low), 0.75);
}

TEST(GeneralizationMatrix, DegenerateCellIsNamed) {
  ScoredSet set{"m",
                {{"a", 0.1, 0, Population::Low},
                 {"b", 0.7, 1, Population::Low},
                 {"c", 0.4, 1, Population::High},
                 {"d", 0.3, 1, Population::High}}};
  try {
    generalization_matrix(FeatureKind::Ehr, {{Population::Low, set}, {Population::High, set}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateLabels);
    EXPECT_NE(std::string(e.what()).find("high"), std::string::npos);
  }
}

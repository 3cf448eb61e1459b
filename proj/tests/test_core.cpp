#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "portastat/core.hpp"
#include "portastat/random.hpp"

using namespace portastat;

namespace {

ScoredSet mixed_set() {
  ScoredSet set{"m", {}};
  const int labels[] = {0, 1, 1};
  for (int i = 0; i < 3; ++i) {
    set.entries.push_back({"low-" + std::to_string(i), 0.1 * (i + 1), labels[i], Population::Low});
    set.entries.push_back({"high-" + std::to_string(i), 0.1 * (i + 4), labels[i], Population::High});
  }
  return set;
}

ScoredSet random_set(std::uint64_t seed, std::size_t n) {
  Rng rng(RngHandle{seed, "core-test"});
  ScoredSet set{"r", {}};
  for (std::size_t i = 0; i < n; ++i) {
    set.entries.push_back({"id" + std::to_string(i), rng.uniform(), rng.bernoulli(0.3) ? 1 : 0,
                           rng.bernoulli(0.5) ? Population::High : Population::Low});
  }
  return set;
}

Cohort small_cohort(std::size_t n) {
  Cohort cohort{2, FeatureKind::Ekg, {}};
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::VectorXd x(2);
    x << static_cast<double>(i), -static_cast<double>(i);
    cohort.records.push_back({"r" + std::to_string(i), x, static_cast<int>(i % 2),
                              i < n / 2 ? Population::Low : Population::High, kSplits[i % 3]});
  }
  return cohort;
}

}  // namespace

TEST(Enums, RoundTripText) {
  for (auto p : kPopulations) EXPECT_EQ(parse_population(to_string(p)), p);
  for (auto s : kSplits) EXPECT_EQ(parse_split(to_string(s)), s);
  for (auto k : kFeatureKinds) EXPECT_EQ(parse_feature_kind(to_string(k)), k);
  EXPECT_THROW(parse_population("medium"), Error);
}

TEST(PartitionBy, KeepsOnlyTheRequestedPopulation) {
  ScoredSet set{"m",
                {{"a", 0.1, 0, Population::Low},
                 {"b", 0.2, 1, Population::High},
                 {"c", 0.3, 0, Population::Low},
                 {"d", 0.4, 1, Population::High}}};
  const auto low = partition_by(set, Population::Low);
  ASSERT_EQ(low.size(), 2u);
  EXPECT_EQ(low.entries[0].record_id, "a");
  EXPECT_EQ(low.entries[1].record_id, "c");
  EXPECT_EQ(low.model_id, "m");
}

TEST(PartitionBy, LabelFilterWithNoMatchesIsEmpty) {
  ScoredSet set{"m", {{"a", 0.1, 0, Population::Low}, {"b", 0.2, 0, Population::High}}};
  EXPECT_TRUE(partition_by(set, Population::Low, 1).empty());
}

TEST(PartitionBy, HighUsePositivesOfMixedSet) {
  const auto out = partition_by(mixed_set(), Population::High, 1);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out.entries[0].record_id, "high-1");
  EXPECT_EQ(out.entries[1].record_id, "high-2");
}

TEST(PartitionBy, IsIdempotent) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto set = random_set(seed, 50);
    for (auto p : kPopulations) {
      for (std::optional<int> label : {std::optional<int>{}, std::optional<int>{0}, std::optional<int>{1}}) {
        const auto once = partition_by(set, p, label);
        EXPECT_EQ(partition_by(once, p, label), once);
      }
    }
  }
}

TEST(PartitionBy, PopulationsAreDisjointAndCover) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto set = random_set(seed, 60);
    const auto low = partition_by(set, Population::Low);
    const auto high = partition_by(set, Population::High);
    std::set<std::string> low_ids, high_ids, all_ids;
    for (const auto& e : low.entries) low_ids.insert(e.record_id);
    for (const auto& e : high.entries) high_ids.insert(e.record_id);
    for (const auto& e : set.entries) all_ids.insert(e.record_id);
    std::vector<std::string> both;
    std::set_intersection(low_ids.begin(), low_ids.end(), high_ids.begin(), high_ids.end(),
                          std::back_inserter(both));
    EXPECT_TRUE(both.empty());
    std::set<std::string> merged = low_ids;
    merged.insert(high_ids.begin(), high_ids.end());
    EXPECT_EQ(merged, all_ids);
  }
}

TEST(CheckScoredSet, RejectsBadEntries) {
  EXPECT_NO_THROW(check_scored_set(mixed_set()));
  ScoredSet bad_score{"m", {{"a", 1.2, 0, Population::Low}}};
  EXPECT_THROW(check_scored_set(bad_score), Error);
  ScoredSet bad_label{"m", {{"a", 0.2, 2, Population::Low}}};
  EXPECT_THROW(check_scored_set(bad_label), Error);
  ScoredSet duplicate{"m", {{"a", 0.2, 0, Population::Low}, {"a", 0.3, 1, Population::High}}};
  EXPECT_THROW(check_scored_set(duplicate), Error);
}

TEST(ValidateCohort, WellFormedCohortHasNoViolations) {
  EXPECT_TRUE(validate_cohort(small_cohort(10)).empty());
}

TEST(ValidateCohort, WrongFeatureLengthNamesTheRecord) {
  auto cohort = small_cohort(10);
  cohort.records[4].features = Eigen::VectorXd::Zero(3);
  const auto v = validate_cohort(cohort);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].record_id, "r4");
  EXPECT_NE(v[0].describe().find("r4"), std::string::npos);
}

TEST(ValidateCohort, DuplicateIdAndNonFiniteFeature) {
  auto cohort = small_cohort(10);
  cohort.records[3].id = "r2";
  cohort.records[7].features(1) = std::numeric_limits<double>::quiet_NaN();
  const auto v = validate_cohort(cohort);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0].record_id, "r2");
  EXPECT_EQ(v[1].record_id, "r7");
}

TEST(ValidateCohort, EmptyCellsOnlyWhenRequested) {
  auto cohort = small_cohort(3);
  EXPECT_TRUE(validate_cohort(cohort).empty());
  EXPECT_FALSE(validate_cohort(cohort, CellRequirement::AllCellsNonEmpty).empty());
}

TEST(ValidateCohort, NonBinaryLabel) {
  auto cohort = small_cohort(6);
  cohort.records[0].label = 3;
  const auto v = validate_cohort(cohort);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].record_id, "r0");
}

TEST(CohortAccessors, CellMatricesFollowRecordOrder) {
  const auto cohort = small_cohort(12);
  const auto x = cohort.features(Population::Low, Split::Train);
  const auto y = cohort.labels(Population::Low, Split::Train);
  ASSERT_EQ(x.rows(), 2);
  EXPECT_EQ(x(0, 0), 0.0);
  EXPECT_EQ(x(1, 0), 3.0);
  EXPECT_EQ(y(1), 1.0);
  EXPECT_EQ(cohort.count(Population::High, Split::Test), 2u);
}

TEST(Rng, SameHandleSameSequence) {
  Rng a(RngHandle{42, "x"});
  Rng b(RngHandle{42, "x"});
  Rng c(RngHandle{42, "y"});
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next_u64();
    EXPECT_EQ(va, b.next_u64());
    differs |= va != c.next_u64();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, ChildrenAreDistinctStreams) {
  const RngHandle root{7, "root"};
  EXPECT_EQ(root.child("a"), root.child("a"));
  EXPECT_NE(Rng(root.child(0)).next_u64(), Rng(root.child(1)).next_u64());
}

TEST(Rng, UniformAndIndexRanges) {
  Rng rng(RngHandle{3, "ranges"});
  double sum = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    ASSERT_LT(rng.index(7), 7u);
  }
  EXPECT_NEAR(sum / 20000, 0.5, 0.01);
}

TEST(Rng, NormalMoments) {
  Rng rng(RngHandle{5, "normal"});
  double s = 0.0, s2 = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.02);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

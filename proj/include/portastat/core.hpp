#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "portastat/errors.hpp"
#include "portastat/random.hpp"

namespace portastat {

/// HIGH_USE is the population P (more than 8 visits in the prior year);
/// LOW_USE is Q.
enum class Population : std::uint8_t { Low, High };
enum class Split : std::uint8_t { Train, Val, Test };
enum class FeatureKind : std::uint8_t { Ehr, Ekg };

inline constexpr Population kPopulations[] = {Population::Low, Population::High};
inline constexpr Split kSplits[] = {Split::Train, Split::Val, Split::Test};
inline constexpr FeatureKind kFeatureKinds[] = {FeatureKind::Ehr, FeatureKind::Ekg};

std::string_view to_string(Population p);
std::string_view to_string(Split s);
std::string_view to_string(FeatureKind k);

Population parse_population(std::string_view text);
Split parse_split(std::string_view text);
FeatureKind parse_feature_kind(std::string_view text);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool operator==(const Interval&) const = default;
  bool contains(double x) const { return lo <= x && x <= hi; }
};

struct Record {
  std::string id;
  Eigen::VectorXd features;
  int label = 0;
  Population population = Population::Low;
  Split split = Split::Train;

  bool operator==(const Record& other) const {
    return id == other.id && label == other.label && population == other.population &&
           split == other.split && features.size() == other.features.size() &&
           features == other.features;
  }
};

struct Cohort {
  Eigen::Index dimension = 0;
  FeatureKind feature_kind = FeatureKind::Ehr;
  std::vector<Record> records;

  bool operator==(const Cohort&) const = default;

  /// Row-stacked features and labels of the records in one (population, split) cell.
  Eigen::MatrixXd features(Population p, Split s) const;
  Eigen::VectorXd labels(Population p, Split s) const;
  std::size_t count(Population p, Split s) const;
};

struct ScoredEntry {
  std::string record_id;
  double score = 0.0;
  int label = 0;
  Population population = Population::Low;

  bool operator==(const ScoredEntry&) const = default;
};

struct ScoredSet {
  std::string model_id;
  std::vector<ScoredEntry> entries;

  bool operator==(const ScoredSet&) const = default;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  Eigen::ArrayXd scores() const;
  Eigen::ArrayXi labels() const;
};

/// Entries matching the population (and label, when given), in original order.
ScoredSet partition_by(const ScoredSet& set, Population population,
                       std::optional<int> label = std::nullopt);

/// Throws InvalidArgument on an out-of-range score, non-binary label, or duplicate id.
void check_scored_set(const ScoredSet& set);

struct Violation {
  std::string record_id;  // empty for cohort-level rules
  std::string rule;

  bool operator==(const Violation&) const = default;
  std::string describe() const;
};

enum class CellRequirement { None, AllCellsNonEmpty };

/// Returns every broken Cohort invariant; never throws.
std::vector<Violation> validate_cohort(const Cohort& cohort,
                                       CellRequirement cells = CellRequirement::None);

}  // namespace portastat

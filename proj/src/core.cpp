#include "portastat/core.hpp"

#include <cmath>
#include <unordered_set>

namespace portastat {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateLabels: return "DegenerateLabels";
    case ErrorKind::EmptySample: return "EmptySample";
    case ErrorKind::EmptyConditional: return "EmptyConditional";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NoComparableBins: return "NoComparableBins";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::CalibrationFailure: return "CalibrationFailure";
    case ErrorKind::StatisticFailure: return "StatisticFailure";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

std::string_view to_string(Population p) { return p == Population::Low ? "low" : "high"; }

std::string_view to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "?";
}

std::string_view to_string(FeatureKind k) { return k == FeatureKind::Ehr ? "ehr" : "ekg"; }

Population parse_population(std::string_view text) {
  if (text == "low") return Population::Low;
  if (text == "high") return Population::High;
  fail(ErrorKind::ParseError, "unknown population '" + std::string(text) + "'");
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::Train;
  if (text == "val") return Split::Val;
  if (text == "test") return Split::Test;
  fail(ErrorKind::ParseError, "unknown split '" + std::string(text) + "'");
}

FeatureKind parse_feature_kind(std::string_view text) {
  if (text == "ehr") return FeatureKind::Ehr;
  if (text == "ekg") return FeatureKind::Ekg;
  fail(ErrorKind::ParseError, "unknown feature kind '" + std::string(text) + "'");
}

std::size_t Cohort::count(Population p, Split s) const {
  std::size_t n = 0;
  for (const auto& r : records) n += (r.population == p && r.split == s);
  return n;
}

Eigen::MatrixXd Cohort::features(Population p, Split s) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(count(p, s)), dimension);
  Eigen::Index row = 0;
  for (const auto& r : records) {
    if (r.population == p && r.split == s) out.row(row++) = r.features.transpose();
  }
  return out;
}

Eigen::VectorXd Cohort::labels(Population p, Split s) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(count(p, s)));
  Eigen::Index row = 0;
  for (const auto& r : records) {
    if (r.population == p && r.split == s) out(row++) = r.label;
  }
  return out;
}

Eigen::ArrayXd ScoredSet::scores() const {
  Eigen::ArrayXd out(static_cast<Eigen::Index>(entries.size()));
  for (std::size_t i = 0; i < entries.size(); ++i) out(static_cast<Eigen::Index>(i)) = entries[i].score;
  return out;
}

Eigen::ArrayXi ScoredSet::labels() const {
  Eigen::ArrayXi out(static_cast<Eigen::Index>(entries.size()));
  for (std::size_t i = 0; i < entries.size(); ++i) out(static_cast<Eigen::Index>(i)) = entries[i].label;
  return out;
}

ScoredSet partition_by(const ScoredSet& set, Population population, std::optional<int> label) {
  ScoredSet out{set.model_id, {}};
  for (const auto& e : set.entries) {
    if (e.population != population) continue;
    if (label && e.label != *label) continue;
    out.entries.push_back(e);
  }
  return out;
}

void check_scored_set(const ScoredSet& set) {
  std::unordered_set<std::string_view> seen;
  for (const auto& e : set.entries) {
    if (!(e.score >= 0.0 && e.score <= 1.0)) {
      fail(ErrorKind::InvalidArgument, "score of '" + e.record_id + "' outside [0,1]");
    }
    if (e.label != 0 && e.label != 1) {
      fail(ErrorKind::InvalidArgument, "label of '" + e.record_id + "' is not binary");
    }
    if (!seen.insert(e.record_id).second) {
      fail(ErrorKind::InvalidArgument, "duplicate record id '" + e.record_id + "'");
    }
  }
}

std::string Violation::describe() const {
  return record_id.empty() ? rule : "record '" + record_id + "': " + rule;
}

std::vector<Violation> validate_cohort(const Cohort& cohort, CellRequirement cells) {
  std::vector<Violation> out;
  if (cohort.dimension <= 0) out.push_back({"", "dimension must be positive"});

  std::unordered_set<std::string_view> ids;
  for (const auto& r : cohort.records) {
    if (!ids.insert(r.id).second) out.push_back({r.id, "duplicate record id"});
    if (r.features.size() != cohort.dimension) {
      out.push_back({r.id, "feature length " + std::to_string(r.features.size()) +
                               " != dimension " + std::to_string(cohort.dimension)});
    } else if (!r.features.allFinite()) {
      out.push_back({r.id, "non-finite feature value"});
    }
    if (r.label != 0 && r.label != 1) out.push_back({r.id, "label must be 0 or 1"});
  }

  if (cells == CellRequirement::AllCellsNonEmpty) {
    for (auto p : kPopulations) {
      for (auto s : kSplits) {
        if (cohort.count(p, s) == 0) {
          out.push_back({"", "empty cell (" + std::string(to_string(p)) + ", " +
                                 std::string(to_string(s)) + ")"});
        }
      }
    }
  }
  return out;
}

}  // namespace portastat

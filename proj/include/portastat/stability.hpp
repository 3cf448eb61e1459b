#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "portastat/core.hpp"
#include "portastat/metrics.hpp"

namespace portastat {

// Throughout, P is the high-use population and Q the low-use one; both sets
// carry scores from the same model.

struct CovariateStabilityResult {
  std::string model_id;
  int label = 0;
  KSResult ks;

  bool operator==(const CovariateStabilityResult&) const = default;
};

/// KS distance between the score distributions of `label`-class entries in P and Q.
CovariateStabilityResult covariate_stability(const ScoredSet& scored_p, const ScoredSet& scored_q,
                                             int label);

inline constexpr std::size_t kStabilityBins = 5;

struct StabilityBin {
  std::size_t n_p = 0;
  std::size_t n_q = 0;
  std::optional<double> mean_y_p;  // present iff n_p > 0
  std::optional<double> mean_y_q;  // present iff n_q > 0
  std::optional<double> diff;      // mean_y_q - mean_y_p, present iff both are
  std::optional<Interval> diff_interval;

  bool operator==(const StabilityBin&) const = default;
};

struct StabilityCurve {
  std::string model_id;
  std::array<double, kStabilityBins + 1> bin_edges{};
  std::array<StabilityBin, kStabilityBins> bins{};

  bool operator==(const StabilityCurve&) const = default;
};

struct StabilitySummary {
  std::string model_id;
  double value = 0.0;
  std::optional<Interval> bootstrap_interval;

  bool operator==(const StabilitySummary&) const = default;
};

/// Quintile edges of the equal-mixture pooled scores: each P entry weighs
/// 1/(2 N_P) and each Q entry 1/(2 N_Q). The outer edges are the pooled
/// minimum and maximum.
std::array<double, kStabilityBins + 1> quintile_edges(const ScoredSet& scored_p,
                                                      const ScoredSet& scored_q);

/// Bins are left-closed and right-open; the last bin also holds the maximum.
std::size_t bin_index(const std::array<double, kStabilityBins + 1>& edges, double score);

StabilityCurve predictive_stability_curve(const ScoredSet& scored_p, const ScoredSet& scored_q);

/// Signed equal-mixture average of the per-bin differences over bins where
/// both populations are present.
StabilitySummary predictive_stability_summary(const StabilityCurve& curve);

using ResampleStatistic = std::function<double(const ScoredSet& scored_p, const ScoredSet& scored_q)>;

struct BootstrapOptions {
  std::size_t replicates = 1000;
  double level = 0.95;
  RngHandle rng{0, "bootstrap"};
  unsigned threads = 1;

  void validate() const;
};

struct BootstrapResult {
  Interval interval;
  std::size_t replicates_used = 0;
  std::size_t replicates_failed = 0;
};

/// Resamples each population's entries with replacement, stratified by
/// population only. Replicate r draws from `rng.child(r)`, so the result does
/// not depend on the thread count.
std::pair<ScoredSet, ScoredSet> resample(const ScoredSet& scored_p, const ScoredSet& scored_q,
                                         const RngHandle& replicate_rng);

/// Percentile interval of `statistic` over bootstrap replicates. Replicates
/// whose statistic throws are dropped; more than 5% failures is an error.
BootstrapResult bootstrap_interval(const ResampleStatistic& statistic, const ScoredSet& scored_p,
                                   const ScoredSet& scored_q, const BootstrapOptions& options);

/// Percentile intervals of each bin's diff; replicates in which a bin is not
/// comparable are skipped for that bin only.
std::array<std::optional<Interval>, kStabilityBins> bootstrap_curve_intervals(
    const ScoredSet& scored_p, const ScoredSet& scored_q, const BootstrapOptions& options);

/// Percentile (linear interpolation) of an unsorted sample.
double percentile(std::vector<double> values, double q);

/// Smallest interval containing both `interval` and `point`.
Interval covering(Interval interval, double point);

}  // namespace portastat

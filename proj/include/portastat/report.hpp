#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "portastat/core.hpp"
#include "portastat/metrics.hpp"
#include "portastat/stability.hpp"

namespace portastat {

struct CohortSummaryRow {
  Population population = Population::Low;
  Split split = Split::Train;
  std::optional<double> frac_pos;  // absent for an empty cell
  std::size_t n_pos = 0;
  std::size_t n_obs = 0;

  bool operator==(const CohortSummaryRow&) const = default;
};

inline constexpr std::size_t kHistogramBins = 20;

/// Equal-width histogram on [0,1] of one (population, label) slice of a model's scores.
struct ScoreHistogram {
  std::string model_id;
  Population population = Population::Low;
  int label = 0;
  std::array<std::size_t, kHistogramBins> counts{};

  bool operator==(const ScoreHistogram&) const = default;
  std::size_t total() const;
};

struct BootstrapSettings {
  std::string method = "percentile";
  std::size_t replicates = 1000;
  double level = 0.95;

  bool operator==(const BootstrapSettings&) const = default;
};

struct RunReport {
  std::string run_id;
  std::string config_digest;
  std::vector<CohortSummaryRow> cohort_summary;
  std::vector<GeneralizationMatrix> matrices;
  std::vector<CovariateStabilityResult> covariate_stability;
  std::vector<StabilityCurve> curves;
  std::vector<StabilitySummary> summaries;
  std::vector<ScoreHistogram> score_histograms;
  std::optional<BootstrapSettings> bootstrap;

  bool operator==(const RunReport&) const = default;
};

/// Stability diagnostics for a single model, as produced by `diagnose`.
struct DiagnosisReport {
  std::string model_id;
  std::vector<CovariateStabilityResult> covariate_stability;
  StabilityCurve curve;
  StabilitySummary summary;
  std::optional<BootstrapSettings> bootstrap;

  bool operator==(const DiagnosisReport&) const = default;
};

/// One row per (population, split), populations outermost.
std::vector<CohortSummaryRow> summarize_cohort(const Cohort& cohort);

ScoreHistogram score_histogram(const ScoredSet& set, Population population, int label);

/// Broken RunReport invariants, empty when the report is consistent.
std::vector<std::string> check_report(const RunReport& report);

std::string emit_json(const RunReport& report);
RunReport parse_report_json(std::string_view text);

std::string emit_json(const DiagnosisReport& report);
DiagnosisReport parse_diagnosis_json(std::string_view text);

/// Writes the fourteen SVG figures under `out_dir`, named
/// `{figure}_{feature_kind}_{trainpop}.svg` (trainpop is `all` for figures
/// that combine both training populations). Returns the paths in write order.
std::vector<std::filesystem::path> emit_plots(const RunReport& report,
                                              const std::filesystem::path& out_dir);

/// Plain-text table of the generalization, covariate and predictive stability numbers.
std::string format_summary(const RunReport& report);

std::string hex_digest(std::string_view bytes);

}  // namespace portastat

#pragma once

#include <cstddef>
#include <vector>

#include "portastat/models.hpp"
#include "portastat/report.hpp"
#include "portastat/simulate.hpp"
#include "portastat/stability.hpp"

namespace portastat {

struct PipelineOptions {
  SimConfig sim;
  TrainConfig train;  // its rng is replaced by a per-model stream derived from sim.seed
  std::size_t replicates = 1000;
  double level = 0.95;
  unsigned threads = 1;
  bool bootstrap = true;
};

struct ModelRun {
  LinearModel model;
  ScoredSet scored_test;
};

struct PipelineResult {
  SimulationOutput simulation;
  std::vector<ModelRun> runs;  // ehr-low, ehr-high, ekg-low, ekg-high
  RunReport report;

  const ModelRun& run(FeatureKind kind, Population train_population) const;
};

/// Covariate stability for both labels plus the predictive-stability curve
/// and summary, with bootstrap intervals when `bootstrap` is set.
DiagnosisReport diagnose(const ScoredSet& scored_p, const ScoredSet& scored_q,
                         const std::optional<BootstrapOptions>& bootstrap);

/// Bootstrap options for the predictive-stability statistics, shared by the
/// full pipeline and standalone diagnosis so both agree for the same seed.
BootstrapOptions stability_bootstrap_options(std::uint64_t seed, std::size_t replicates, double level,
                                             unsigned threads);

/// simulate -> train the four models -> score TEST -> diagnose -> report.
PipelineResult run_pipeline(const PipelineOptions& options);

}  // namespace portastat

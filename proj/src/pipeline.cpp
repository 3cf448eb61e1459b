#include "portastat/pipeline.hpp"

#include "portastat/io.hpp"
#include "portastat/parallel.hpp"

namespace portastat {
namespace {

constexpr FeatureKind kRunKinds[] = {FeatureKind::Ehr, FeatureKind::Ehr, FeatureKind::Ekg, FeatureKind::Ekg};
constexpr Population kRunPops[] = {Population::Low, Population::High, Population::Low, Population::High};

std::size_t run_index(FeatureKind kind, Population pop) {
  return 2 * static_cast<std::size_t>(kind) + static_cast<std::size_t>(pop);
}

}  // namespace

const ModelRun& PipelineResult::run(FeatureKind kind, Population train_population) const {
  return runs.at(run_index(kind, train_population));
}

BootstrapOptions stability_bootstrap_options(std::uint64_t seed, std::size_t replicates, double level,
                                             unsigned threads) {
  return BootstrapOptions{replicates, level, RngHandle{seed, "bootstrap/predictive-stability"}, threads};
}

DiagnosisReport diagnose(const ScoredSet& scored_p, const ScoredSet& scored_q,
                         const std::optional<BootstrapOptions>& bootstrap) {
  DiagnosisReport out;
  out.model_id = scored_p.model_id;
  for (int label : {0, 1}) out.covariate_stability.push_back(covariate_stability(scored_p, scored_q, label));
  out.curve = predictive_stability_curve(scored_p, scored_q);
  out.summary = predictive_stability_summary(out.curve);

  if (bootstrap) {
    auto summary_stat = [](const ScoredSet& p, const ScoredSet& q) {
      return predictive_stability_summary(predictive_stability_curve(p, q)).value;
    };
    auto summary_options = *bootstrap;
    summary_options.rng = bootstrap->rng.child("summary");
    const auto summary_ci = bootstrap_interval(summary_stat, scored_p, scored_q, summary_options);
    out.summary.bootstrap_interval = covering(summary_ci.interval, out.summary.value);

    auto curve_options = *bootstrap;
    curve_options.rng = bootstrap->rng.child("curve");
    const auto bins = bootstrap_curve_intervals(scored_p, scored_q, curve_options);
    for (std::size_t b = 0; b < kStabilityBins; ++b) {
      auto& bin = out.curve.bins[b];
      if (bin.diff && bins[b]) bin.diff_interval = covering(*bins[b], *bin.diff);
    }
    out.bootstrap = BootstrapSettings{"percentile", bootstrap->replicates, bootstrap->level};
  }
  return out;
}

PipelineResult run_pipeline(const PipelineOptions& options) {
  const std::uint64_t seed = options.sim.seed.seed;
  PipelineResult result;
  result.simulation = generate(options.sim);
  const auto& sim = result.simulation;

  result.runs.resize(4);
  parallel_for(4, options.threads, [&](std::size_t i) {
    const auto kind = kRunKinds[i];
    const auto pop = kRunPops[i];
    const Cohort& cohort = kind == FeatureKind::Ehr ? sim.ehr : sim.ekg;
    TrainConfig config = options.train;
    config.rng = RngHandle{seed, "train"}.child(model_id(kind, pop));
    auto model = train(cohort, pop, config);
    auto scored = score_cohort(model, cohort, Split::Test);
    result.runs[i] = ModelRun{std::move(model), std::move(scored)};
  });

  RunReport& report = result.report;
  const std::string config_text = to_text(options.sim);
  report.config_digest = hex_digest(config_text);
  report.run_id = "run-" + hex_digest(config_text + "replicates=" + std::to_string(options.replicates) +
                                      "\nlevel=" + io::format_double(options.level) +
                                      "\nbootstrap=" + (options.bootstrap ? "1" : "0") + "\n");
  report.cohort_summary = summarize_cohort(sim.ehr);
  if (options.bootstrap) report.bootstrap = BootstrapSettings{"percentile", options.replicates, options.level};

  for (auto kind : kFeatureKinds) {
    std::map<Population, ScoredSet> scored;
    for (auto pop : kPopulations) scored[pop] = result.run(kind, pop).scored_test;
    auto matrix = generalization_matrix(kind, scored);
    if (options.bootstrap) {
      for (auto& cell : matrix.cells) {
        const auto& set = scored.at(cell.train);
        const auto test = cell.test;
        auto stat = [test](const ScoredSet& p, const ScoredSet& q) {
          const ScoredSet& side = test == Population::High ? p : q;
          return auc(side.scores(), side.labels());
        };
        BootstrapOptions bo{options.replicates, options.level,
                            RngHandle{seed, "bootstrap/auc"}.child(model_id(kind, cell.train)).child(to_string(test)),
                            options.threads};
        const auto ci = bootstrap_interval(stat, partition_by(set, Population::High),
                                           partition_by(set, Population::Low), bo);
        cell.interval = covering(ci.interval, cell.auc);
      }
    }
    report.matrices.push_back(matrix);
  }

  std::optional<BootstrapOptions> stability_bootstrap;
  if (options.bootstrap) {
    stability_bootstrap = stability_bootstrap_options(seed, options.replicates, options.level, options.threads);
  }
  for (const auto& run : result.runs) {
    const auto p = partition_by(run.scored_test, Population::High);
    const auto q = partition_by(run.scored_test, Population::Low);
    auto diag = diagnose(p, q, stability_bootstrap);
    for (auto& cs : diag.covariate_stability) report.covariate_stability.push_back(std::move(cs));
    report.curves.push_back(std::move(diag.curve));
    report.summaries.push_back(std::move(diag.summary));
    for (auto pop : kPopulations) {
      for (int label : {0, 1}) report.score_histograms.push_back(score_histogram(run.scored_test, pop, label));
    }
  }
  return result;
}

}  // namespace portastat

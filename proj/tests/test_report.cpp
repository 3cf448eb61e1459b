#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "portastat/io.hpp"
#include "portastat/pipeline.hpp"
#include "portastat/report.hpp"

using namespace portastat;
namespace fs = std::filesystem;

namespace {

const PipelineResult& small_run() {
  static const PipelineResult result = [] {
    PipelineOptions o;
    o.sim.n_train_per_pop = 600;
    o.sim.n_val_per_pop = 200;
    o.sim.n_test_low = 300;
    o.sim.n_test_high = 400;
    o.sim.d_ehr = 40;
    o.replicates = 100;
    return run_pipeline(o);
  }();
  return result;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("portastat_report_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST(SummarizeCohort, CountsAndFraction) {
  Cohort c{1, FeatureKind::Ehr, {}};
  for (int i = 0; i < 10; ++i) {
    c.records.push_back({std::to_string(i), Eigen::VectorXd::Zero(1), i < 3 ? 1 : 0, Population::Low, Split::Train});
  }
  const auto rows = summarize_cohort(c);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0].population, Population::Low);
  EXPECT_EQ(rows[0].split, Split::Train);
  EXPECT_DOUBLE_EQ(*rows[0].frac_pos, 0.3);
  EXPECT_EQ(rows[0].n_pos, 3u);
  EXPECT_EQ(rows[0].n_obs, 10u);
  EXPECT_FALSE(rows[5].frac_pos.has_value());
  EXPECT_EQ(rows[5].n_obs, 0u);
}

TEST(SummarizeCohort, DefaultScaleLowTrainRow) {
  const auto rows = summarize_cohort(generate(SimConfig{}).ehr);
  EXPECT_NEAR(*rows[0].frac_pos, 0.119, 0.01);
  EXPECT_EQ(rows[0].n_obs, 7000u);
  EXPECT_NEAR(static_cast<double>(rows[0].n_pos), 833.0, 70.0);
}

TEST(ScoreHistogram, SumsToSliceSize) {
  const auto& run = small_run();
  for (const auto& m : run.runs) {
    for (auto p : kPopulations) {
      for (int label : {0, 1}) {
        const auto h = score_histogram(m.scored_test, p, label);
        EXPECT_EQ(h.total(), partition_by(m.scored_test, p, label).size());
      }
    }
  }
  ScoredSet edge{"m", {{"a", 1.0, 1, Population::Low}, {"b", 0.0, 1, Population::Low}, {"c", 0.05, 1, Population::Low}}};
  const auto h = score_histogram(edge, Population::Low, 1);
  EXPECT_EQ(h.counts[0], 1u);
  EXPECT_EQ(h.counts[1], 1u);
  EXPECT_EQ(h.counts[19], 1u);
}

TEST(ReportJson, MinimalRoundTrip) {
  RunReport r;
  r.run_id = "run-x";
  r.config_digest = "00";
  EXPECT_EQ(parse_report_json(emit_json(r)), r);
}

TEST(ReportJson, AbsentOptionalsAreOmitted) {
  RunReport r;
  r.run_id = "r";
  StabilityCurve c;
  c.model_id = "ehr-low";
  c.bins[0].n_p = 2;
  c.bins[0].mean_y_p = 0.5;
  r.curves.push_back(c);
  r.summaries.push_back({"ehr-low", 0.1, std::nullopt});
  r.cohort_summary.push_back({Population::High, Split::Val, std::nullopt, 0, 0});
  GeneralizationMatrix m;
  r.matrices.push_back(m);
  const auto text = emit_json(r);
  EXPECT_EQ(text.find("null"), std::string::npos);
  EXPECT_EQ(text.find("\"interval\""), std::string::npos);
  EXPECT_EQ(text.find("\"diff\""), std::string::npos);
  EXPECT_EQ(text.find("bootstrap"), std::string::npos);
  EXPECT_EQ(parse_report_json(text), r);
}

TEST(ReportJson, FullRunRoundTripsAndIsConsistent) {
  const auto& report = small_run().report;
  EXPECT_TRUE(check_report(report).empty());
  const auto text = emit_json(report);
  const auto back = parse_report_json(text);
  EXPECT_EQ(back, report);
  EXPECT_TRUE(check_report(back).empty());
  EXPECT_EQ(emit_json(back), text);
  for (const char* key : {"\"run_id\"", "\"config_digest\"", "\"cohort_summary\"", "\"generalization\"",
                          "\"covariate_stability\"", "\"predictive_stability\""}) {
    EXPECT_NE(text.find(key), std::string::npos) << key;
  }
}

TEST(ReportJson, ShapeOfFullRun) {
  const auto& report = small_run().report;
  EXPECT_EQ(report.cohort_summary.size(), 6u);
  EXPECT_EQ(report.matrices.size(), 2u);
  EXPECT_EQ(report.covariate_stability.size(), 8u);
  EXPECT_EQ(report.curves.size(), 4u);
  EXPECT_EQ(report.summaries.size(), 4u);
  EXPECT_EQ(report.score_histograms.size(), 16u);
  for (const auto& m : report.matrices) {
    for (const auto& cell : m.cells) {
      ASSERT_TRUE(cell.interval.has_value());
      EXPECT_TRUE(cell.interval->contains(cell.auc));
    }
  }
  for (const auto& s : report.summaries) {
    ASSERT_TRUE(s.bootstrap_interval.has_value());
    EXPECT_LE(s.bootstrap_interval->lo, s.value);
    EXPECT_LE(s.value, s.bootstrap_interval->hi);
  }
}

TEST(ReportJson, RejectsGarbage) {
  EXPECT_THROW(parse_report_json("{"), Error);
  EXPECT_THROW(parse_report_json("{\"run_id\": 3}"), Error);
}

TEST(CheckReport, FlagsBrokenInvariants) {
  RunReport r = small_run().report;
  r.summaries[0].bootstrap_interval = Interval{r.summaries[0].value + 1.0, r.summaries[0].value + 2.0};
  r.covariate_stability[0].model_id = "svm-low";
  EXPECT_EQ(check_report(r).size(), 2u);
}

TEST(DiagnosisJson, RoundTrip) {
  const auto& run = small_run();
  const auto& scored = run.run(FeatureKind::Ekg, Population::High).scored_test;
  const auto diag = diagnose(partition_by(scored, Population::High), partition_by(scored, Population::Low),
                             stability_bootstrap_options(3, 100, 0.9, 1));
  EXPECT_EQ(parse_diagnosis_json(emit_json(diag)), diag);
  EXPECT_EQ(diag.covariate_stability.size(), 2u);
}

TEST(Plots, FourteenDeterministicFiles) {
  const auto& report = small_run().report;
  const auto copy = report;
  const auto a = scratch("a");
  const auto b = scratch("b");
  const auto paths = emit_plots(report, a);
  emit_plots(report, b);
  EXPECT_EQ(report, copy);
  ASSERT_EQ(paths.size(), 14u);
  for (const auto& p : paths) {
    EXPECT_EQ(p.extension(), ".svg");
    EXPECT_EQ(io::read_text_file(p), io::read_text_file(b / p.filename()));
    const auto text = io::read_text_file(p);
    EXPECT_EQ(text.rfind("<svg", 0), 0u) << p;
    EXPECT_NE(text.find("</svg>"), std::string::npos);
  }
  for (const char* name : {"auc_ehr_all.svg", "ks_ekg_all.svg", "pssummary_ehr_all.svg", "scoredist_ekg_low.svg",
                           "pscurve_ehr_high.svg"}) {
    EXPECT_TRUE(fs::exists(a / name)) << name;
  }
  const auto auc_svg = io::read_text_file(a / "auc_ehr_all.svg");
  EXPECT_NE(auc_svg.find("#1f77b4"), std::string::npos);
  EXPECT_NE(auc_svg.find("#ff7f0e"), std::string::npos);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Plots, UnwritableDirectory) {
  const auto file = scratch("file");
  io::write_file_atomic(file / "blocker", "x");
  try {
    emit_plots(small_run().report, file / "blocker" / "plots");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::IoFailure);
  }
  fs::remove_all(file);
}

TEST(FormatSummary, ThreeDecimals) {
  const auto text = format_summary(small_run().report);
  const auto& m = small_run().report.matrices[0];
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", m(Population::Low, Population::Low));
  EXPECT_NE(text.find(buf), std::string::npos);
  EXPECT_NE(text.find("covariate stability"), std::string::npos);
}

TEST(HexDigest, StableAndDistinct) {
  EXPECT_EQ(hex_digest("abc"), hex_digest("abc"));
  EXPECT_NE(hex_digest("abc"), hex_digest("abd"));
  EXPECT_EQ(hex_digest("").size(), 16u);
}

TEST(DefaultRun, EhrHighStabilityCurveMagnitude) {
  PipelineOptions o;
  o.bootstrap = false;
  const auto result = run_pipeline(o);
  for (const auto& c : result.report.curves) {
    if (c.model_id != "ehr-high") continue;
    double total = 0.0;
    int n = 0;
    for (const auto& b : c.bins) {
      if (!b.diff) continue;
      total += std::abs(*b.diff);
      ++n;
    }
    ASSERT_GT(n, 0);
    EXPECT_LE(total / n, 0.15);
  }
}

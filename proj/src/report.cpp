#include "portastat/report.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include <json.hpp>

#include "portastat/models.hpp"

namespace portastat {
namespace {

using nlohmann::json;

json interval_json(const Interval& i) { return json{{"lo", i.lo}, {"hi", i.hi}}; }
Interval interval_from(const json& j) { return Interval{j.at("lo").get<double>(), j.at("hi").get<double>()}; }

json ks_json(const CovariateStabilityResult& r) {
  return json{{"model_id", r.model_id}, {"label", r.label},     {"statistic", r.ks.statistic},
              {"p_value", r.ks.p_value}, {"n_high", r.ks.n_a}, {"n_low", r.ks.n_b}};
}

CovariateStabilityResult ks_from(const json& j) {
  return CovariateStabilityResult{j.at("model_id").get<std::string>(), j.at("label").get<int>(),
                                  KSResult{j.at("statistic").get<double>(), j.at("p_value").get<double>(),
                                           j.at("n_high").get<std::size_t>(), j.at("n_low").get<std::size_t>()}};
}

json curve_json(const StabilityCurve& c) {
  json bins = json::array();
  for (const auto& b : c.bins) {
    json jb{{"n_high", b.n_p}, {"n_low", b.n_q}};
    if (b.mean_y_p) jb["mean_y_high"] = *b.mean_y_p;
    if (b.mean_y_q) jb["mean_y_low"] = *b.mean_y_q;
    if (b.diff) jb["diff"] = *b.diff;
    if (b.diff_interval) jb["diff_interval"] = interval_json(*b.diff_interval);
    bins.push_back(std::move(jb));
  }
  return json{{"model_id", c.model_id}, {"bin_edges", c.bin_edges}, {"bins", std::move(bins)}};
}

StabilityCurve curve_from(const json& j) {
  StabilityCurve c;
  c.model_id = j.at("model_id").get<std::string>();
  c.bin_edges = j.at("bin_edges").get<std::array<double, kStabilityBins + 1>>();
  const auto& bins = j.at("bins");
  if (bins.size() != kStabilityBins) fail(ErrorKind::ParseError, "stability curve must have 5 bins");
  for (std::size_t i = 0; i < kStabilityBins; ++i) {
    const auto& jb = bins.at(i);
    auto& b = c.bins[i];
    b.n_p = jb.at("n_high").get<std::size_t>();
    b.n_q = jb.at("n_low").get<std::size_t>();
    if (jb.contains("mean_y_high")) b.mean_y_p = jb["mean_y_high"].get<double>();
    if (jb.contains("mean_y_low")) b.mean_y_q = jb["mean_y_low"].get<double>();
    if (jb.contains("diff")) b.diff = jb["diff"].get<double>();
    if (jb.contains("diff_interval")) b.diff_interval = interval_from(jb["diff_interval"]);
  }
  return c;
}

json summary_json(const StabilitySummary& s) {
  json j{{"model_id", s.model_id}, {"value", s.value}};
  if (s.bootstrap_interval) j["interval"] = interval_json(*s.bootstrap_interval);
  return j;
}

StabilitySummary summary_from(const json& j) {
  StabilitySummary s{j.at("model_id").get<std::string>(), j.at("value").get<double>(), std::nullopt};
  if (j.contains("interval")) s.bootstrap_interval = interval_from(j["interval"]);
  return s;
}

json bootstrap_json(const BootstrapSettings& b) {
  return json{{"method", b.method}, {"replicates", b.replicates}, {"level", b.level}};
}

BootstrapSettings bootstrap_from(const json& j) {
  return BootstrapSettings{j.at("method").get<std::string>(), j.at("replicates").get<std::size_t>(),
                           j.at("level").get<double>()};
}

template <typename Fn>
auto parse_guarded(std::string_view text, Fn&& fn) {
  try {
    return fn(json::parse(text));
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("report JSON: ") + e.what());
  }
}

}  // namespace

std::string hex_digest(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

std::size_t ScoreHistogram::total() const {
  std::size_t n = 0;
  for (auto c : counts) n += c;
  return n;
}

std::vector<CohortSummaryRow> summarize_cohort(const Cohort& cohort) {
  std::vector<CohortSummaryRow> rows;
  for (auto p : kPopulations) {
    for (auto s : kSplits) {
      CohortSummaryRow row{p, s, std::nullopt, 0, 0};
      for (const auto& r : cohort.records) {
        if (r.population != p || r.split != s) continue;
        ++row.n_obs;
        row.n_pos += static_cast<std::size_t>(r.label);
      }
      if (row.n_obs > 0) row.frac_pos = static_cast<double>(row.n_pos) / static_cast<double>(row.n_obs);
      rows.push_back(row);
    }
  }
  return rows;
}

ScoreHistogram score_histogram(const ScoredSet& set, Population population, int label) {
  ScoreHistogram h{set.model_id, population, label, {}};
  for (const auto& e : set.entries) {
    if (e.population != population || e.label != label) continue;
    const auto bin = std::min<std::size_t>(kHistogramBins - 1,
                                           static_cast<std::size_t>(e.score * static_cast<double>(kHistogramBins)));
    ++h.counts[bin];
  }
  return h;
}

std::vector<std::string> check_report(const RunReport& report) {
  std::vector<std::string> problems;
  for (const auto& row : report.cohort_summary) {
    const std::string cell = std::string(to_string(row.population)) + "/" + std::string(to_string(row.split));
    if (row.n_obs == 0) {
      if (row.frac_pos) problems.push_back("cohort_summary " + cell + ": fraction given for an empty cell");
    } else if (!row.frac_pos ||
               *row.frac_pos != static_cast<double>(row.n_pos) / static_cast<double>(row.n_obs)) {
      problems.push_back("cohort_summary " + cell + ": frac_pos != n_pos / n_obs");
    }
  }

  std::set<std::string> lineage;
  std::set<FeatureKind> kinds;
  for (const auto& m : report.matrices) {
    if (!kinds.insert(m.feature_kind).second) {
      problems.push_back("duplicate generalization matrix for " + std::string(to_string(m.feature_kind)));
    }
    for (auto train : kPopulations) {
      lineage.insert(model_id(m.feature_kind, train));
      for (auto test : kPopulations) {
        const auto& cell = m.at(train, test);
        if (cell.train != train || cell.test != test) problems.push_back("generalization cell out of place");
        if (!(cell.auc >= 0.0 && cell.auc <= 1.0)) problems.push_back("generalization AUC outside [0,1]");
        if (cell.interval && !cell.interval->contains(cell.auc)) {
          problems.push_back("generalization interval does not contain its AUC");
        }
      }
    }
  }
  auto check_lineage = [&](const std::string& id, const char* where) {
    if (!lineage.count(id)) problems.push_back(std::string(where) + " references unknown model '" + id + "'");
  };
  std::set<std::pair<std::string, int>> cs_keys;
  for (const auto& cs : report.covariate_stability) {
    check_lineage(cs.model_id, "covariate_stability");
    if (!cs_keys.insert({cs.model_id, cs.label}).second) {
      problems.push_back("duplicate covariate stability entry for " + cs.model_id);
    }
  }
  std::set<std::string> curve_ids, summary_ids;
  for (const auto& c : report.curves) {
    check_lineage(c.model_id, "predictive_stability curve");
    if (!curve_ids.insert(c.model_id).second) problems.push_back("duplicate curve for " + c.model_id);
  }
  for (const auto& s : report.summaries) {
    check_lineage(s.model_id, "predictive_stability summary");
    if (!summary_ids.insert(s.model_id).second) problems.push_back("duplicate summary for " + s.model_id);
    if (s.bootstrap_interval && !s.bootstrap_interval->contains(s.value)) {
      problems.push_back("summary interval does not contain its value for " + s.model_id);
    }
  }
  for (const auto& h : report.score_histograms) check_lineage(h.model_id, "score_distributions");
  return problems;
}

std::string emit_json(const RunReport& report) {
  json j;
  j["run_id"] = report.run_id;
  j["config_digest"] = report.config_digest;
  if (report.bootstrap) j["bootstrap"] = bootstrap_json(*report.bootstrap);

  json rows = json::array();
  for (const auto& r : report.cohort_summary) {
    json jr{{"population", to_string(r.population)}, {"split", to_string(r.split)},
            {"n_pos", r.n_pos}, {"n_obs", r.n_obs}};
    if (r.frac_pos) jr["frac_pos"] = *r.frac_pos;
    rows.push_back(std::move(jr));
  }
  j["cohort_summary"] = std::move(rows);

  json matrices = json::array();
  for (const auto& m : report.matrices) {
    json cells = json::array();
    for (const auto& c : m.cells) {
      json jc{{"train", to_string(c.train)}, {"test", to_string(c.test)}, {"auc", c.auc}};
      if (c.interval) jc["interval"] = interval_json(*c.interval);
      cells.push_back(std::move(jc));
    }
    matrices.push_back(json{{"feature_kind", to_string(m.feature_kind)}, {"cells", std::move(cells)}});
  }
  j["generalization"] = std::move(matrices);

  json cs = json::array();
  for (const auto& r : report.covariate_stability) cs.push_back(ks_json(r));
  j["covariate_stability"] = std::move(cs);

  json curves = json::array(), summaries = json::array();
  for (const auto& c : report.curves) curves.push_back(curve_json(c));
  for (const auto& s : report.summaries) summaries.push_back(summary_json(s));
  j["predictive_stability"] = json{{"curves", std::move(curves)}, {"summaries", std::move(summaries)}};

  json hists = json::array();
  for (const auto& h : report.score_histograms) {
    hists.push_back(json{{"model_id", h.model_id}, {"population", to_string(h.population)},
                         {"label", h.label}, {"counts", h.counts}});
  }
  j["score_distributions"] = std::move(hists);
  return j.dump(2) + "\n";
}

RunReport parse_report_json(std::string_view text) {
  return parse_guarded(text, [](const json& j) {
    RunReport r;
    r.run_id = j.at("run_id").get<std::string>();
    r.config_digest = j.at("config_digest").get<std::string>();
    if (j.contains("bootstrap")) r.bootstrap = bootstrap_from(j["bootstrap"]);
    for (const auto& jr : j.at("cohort_summary")) {
      CohortSummaryRow row{parse_population(jr.at("population").get<std::string>()),
                           parse_split(jr.at("split").get<std::string>()), std::nullopt,
                           jr.at("n_pos").get<std::size_t>(), jr.at("n_obs").get<std::size_t>()};
      if (jr.contains("frac_pos")) row.frac_pos = jr["frac_pos"].get<double>();
      r.cohort_summary.push_back(row);
    }
    for (const auto& jm : j.at("generalization")) {
      GeneralizationMatrix m;
      m.feature_kind = parse_feature_kind(jm.at("feature_kind").get<std::string>());
      const auto& cells = jm.at("cells");
      if (cells.size() != 4) fail(ErrorKind::ParseError, "generalization matrix needs four cells");
      for (const auto& jc : cells) {
        const auto train = parse_population(jc.at("train").get<std::string>());
        const auto test = parse_population(jc.at("test").get<std::string>());
        auto& cell = m.at(train, test);
        cell = GeneralizationCell{train, test, jc.at("auc").get<double>(), std::nullopt};
        if (jc.contains("interval")) cell.interval = interval_from(jc["interval"]);
      }
      r.matrices.push_back(m);
    }
    for (const auto& jc : j.at("covariate_stability")) r.covariate_stability.push_back(ks_from(jc));
    const auto& ps = j.at("predictive_stability");
    for (const auto& jc : ps.at("curves")) r.curves.push_back(curve_from(jc));
    for (const auto& js : ps.at("summaries")) r.summaries.push_back(summary_from(js));
    if (j.contains("score_distributions")) {
      for (const auto& jh : j["score_distributions"]) {
        r.score_histograms.push_back(ScoreHistogram{
            jh.at("model_id").get<std::string>(), parse_population(jh.at("population").get<std::string>()),
            jh.at("label").get<int>(), jh.at("counts").get<std::array<std::size_t, kHistogramBins>>()});
      }
    }
    return r;
  });
}

std::string emit_json(const DiagnosisReport& report) {
  json j;
  j["model_id"] = report.model_id;
  if (report.bootstrap) j["bootstrap"] = bootstrap_json(*report.bootstrap);
  json cs = json::array();
  for (const auto& r : report.covariate_stability) cs.push_back(ks_json(r));
  j["covariate_stability"] = std::move(cs);
  j["predictive_stability"] = json{{"curves", json::array({curve_json(report.curve)})},
                                   {"summaries", json::array({summary_json(report.summary)})}};
  return j.dump(2) + "\n";
}

DiagnosisReport parse_diagnosis_json(std::string_view text) {
  return parse_guarded(text, [](const json& j) {
    DiagnosisReport r;
    r.model_id = j.at("model_id").get<std::string>();
    if (j.contains("bootstrap")) r.bootstrap = bootstrap_from(j["bootstrap"]);
    for (const auto& jc : j.at("covariate_stability")) r.covariate_stability.push_back(ks_from(jc));
    const auto& ps = j.at("predictive_stability");
    r.curve = curve_from(ps.at("curves").at(0));
    r.summary = summary_from(ps.at("summaries").at(0));
    return r;
  });
}

std::string format_summary(const RunReport& report) {
  std::string out;
  char line[256];
  auto interval_text = [](const std::optional<Interval>& i) {
    if (!i) return std::string();
    char buf[64];
    std::snprintf(buf, sizeof(buf), " [%.3f, %.3f]", i->lo, i->hi);
    return std::string(buf);
  };

  out += "run " + report.run_id + "  config " + report.config_digest + "\n";
  if (report.bootstrap) {
    std::snprintf(line, sizeof(line), "intervals: %s bootstrap, %zu replicates, level %.2f\n",
                  report.bootstrap->method.c_str(), report.bootstrap->replicates, report.bootstrap->level);
    out += line;
  }
  out += "\ncohort            frac_pos   n_pos   n_obs\n";
  for (const auto& r : report.cohort_summary) {
    std::snprintf(line, sizeof(line), "%-5s %-8s %10s %7zu %7zu\n", std::string(to_string(r.population)).c_str(),
                  std::string(to_string(r.split)).c_str(),
                  r.frac_pos ? std::to_string(*r.frac_pos).substr(0, 5).c_str() : "-", r.n_pos, r.n_obs);
    out += line;
  }

  out += "\ngeneralization AUC (train -> test)\n";
  for (const auto& m : report.matrices) {
    for (const auto& c : m.cells) {
      std::snprintf(line, sizeof(line), "  %s  %-4s -> %-4s  %.3f", std::string(to_string(m.feature_kind)).c_str(),
                    std::string(to_string(c.train)).c_str(), std::string(to_string(c.test)).c_str(), c.auc);
      out += line + interval_text(c.interval) + "\n";
    }
  }

  out += "\ncovariate stability KS (high vs low, lower is more stable)\n";
  for (const auto& cs : report.covariate_stability) {
    std::snprintf(line, sizeof(line), "  %-9s y=%d  %.3f  (p=%.3g)\n", cs.model_id.c_str(), cs.label,
                  cs.ks.statistic, cs.ks.p_value);
    out += line;
  }

  out += "\npredictive stability E_low[y|s] - E_high[y|s]\n";
  for (const auto& s : report.summaries) {
    std::snprintf(line, sizeof(line), "  %-9s  %+.3f", s.model_id.c_str(), s.value);
    out += line + interval_text(s.bootstrap_interval) + "\n";
  }
  return out;
}

}  // namespace portastat

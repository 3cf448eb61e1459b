#include "portastat/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "portastat/io.hpp"
#include "portastat/parallel.hpp"
#include "portastat/pipeline.hpp"

namespace portastat::cli {
namespace {

namespace fs = std::filesystem;

/// Tags errors with the pipeline stage that raised them.
template <typename Fn>
auto stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(name) + " stage: " + e.what());
  }
}

struct CommonFlags {
  std::optional<std::uint64_t> seed;
  std::size_t replicates = 1000;
  double level = 0.95;
  unsigned threads = default_threads();
};

std::uint64_t resolve_seed(const CommonFlags& flags, std::uint64_t fallback) {
  if (flags.seed) return *flags.seed;
  if (const char* env = std::getenv("PORTASTAT_SEED"); env && *env) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      fail(ErrorKind::InvalidArgument, "PORTASTAT_SEED is not an unsigned integer");
    }
  }
  return fallback;
}

SimConfig load_config(const std::string& path) {
  if (path.empty()) return SimConfig{};
  return parse_sim_config(io::read_text_file(path));
}

void add_seed(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--seed", flags.seed, "Random seed (falls back to PORTASTAT_SEED)");
}

void add_bootstrap(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--replicates", flags.replicates, "Bootstrap replicates")->check(CLI::Range(100, 1000000));
  cmd->add_option("--level", flags.level, "Bootstrap interval level")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--threads", flags.threads, "Worker threads")->check(CLI::PositiveNumber);
}

void write_outputs(const fs::path& out_dir, const PipelineResult& result, std::string_view config_text) {
  io::write_file_atomic(out_dir / "config.txt", config_text);
  io::write_file_atomic(out_dir / "cohorts" / "ehr_cohort.csv", io::write_cohort_csv(result.simulation.ehr));
  io::write_file_atomic(out_dir / "cohorts" / "ekg_cohort.csv", io::write_cohort_csv(result.simulation.ekg));
  io::write_file_atomic(out_dir / "cohorts" / "truth.csv", write_truth_csv(result.simulation.truth));
  for (const auto& run : result.runs) {
    const auto id = run.model.model_id();
    io::write_file_atomic(out_dir / "models" / (id + ".model"), serialize_model(run.model));
    for (auto pop : kPopulations) {
      io::write_file_atomic(out_dir / "scores" / (id + "_" + std::string(to_string(pop)) + ".csv"),
                            io::write_scored_csv(partition_by(run.scored_test, pop)));
    }
  }
  io::write_file_atomic(out_dir / "report.json", emit_json(result.report));
  emit_plots(result.report, out_dir / "plots");
  io::write_file_atomic(out_dir / "summary.txt", format_summary(result.report));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Portability diagnostics for binary classifiers across two populations", "portastat"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string config_path, out_path, cohort_path, model_path, p_path, q_path, in_path;
  std::string kind_text, population_text, split_text = "test", model_id = "external";

  auto* simulate_cmd = app.add_subcommand("simulate", "Generate the two synthetic cohorts and ground truth");
  simulate_cmd->add_option("--config", config_path, "Simulator key = value config");
  simulate_cmd->add_option("--out", out_path, "Output directory")->required();
  add_seed(simulate_cmd, flags);

  auto* train_cmd = app.add_subcommand("train", "Train one model on a cohort CSV");
  train_cmd->add_option("--cohort", cohort_path, "Cohort CSV")->required();
  train_cmd->add_option("--kind", kind_text, "Feature kind of the cohort")->required()->check(CLI::IsMember({"ehr", "ekg"}));
  train_cmd->add_option("--population", population_text, "Training population")->required()->check(CLI::IsMember({"low", "high"}));
  train_cmd->add_option("--out", out_path, "Model file to write")->required();
  add_seed(train_cmd, flags);

  auto* score_cmd = app.add_subcommand("score", "Score one split of a cohort with a trained model");
  score_cmd->add_option("--model", model_path, "Model file")->required();
  score_cmd->add_option("--cohort", cohort_path, "Cohort CSV")->required();
  score_cmd->add_option("--split", split_text, "Split to score")->check(CLI::IsMember({"train", "val", "test"}));
  score_cmd->add_option("--out", out_path, "Scored CSV to write")->required();
  add_seed(score_cmd, flags);

  auto* diagnose_cmd = app.add_subcommand("diagnose", "Covariate and predictive stability of external scores");
  diagnose_cmd->add_option("--p", p_path, "Scored CSV of the high-use population (P)")->required();
  diagnose_cmd->add_option("--q", q_path, "Scored CSV of the low-use population (Q)")->required();
  diagnose_cmd->add_option("--out", out_path, "JSON file to write")->required();
  diagnose_cmd->add_option("--model-id", model_id, "Model id recorded in the output");
  add_seed(diagnose_cmd, flags);
  add_bootstrap(diagnose_cmd, flags);

  auto* report_cmd = app.add_subcommand("report", "Re-render plots and the summary table from a report JSON");
  report_cmd->add_option("--in", in_path, "report.json")->required();
  report_cmd->add_option("--out", out_path, "Plot directory")->required();
  add_seed(report_cmd, flags);

  auto* run_all_cmd = app.add_subcommand("run-all", "simulate, train, score, diagnose and report in one go");
  run_all_cmd->add_option("--config", config_path, "Simulator key = value config");
  run_all_cmd->add_option("--out", out_path, "Output directory")->required();
  add_seed(run_all_cmd, flags);
  add_bootstrap(run_all_cmd, flags);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsageError;
  }

  try {
    if (simulate_cmd->parsed()) {
      auto config = stage("config", [&] { return load_config(config_path); });
      config.seed.seed = resolve_seed(flags, config.seed.seed);
      const auto sim = stage("simulate", [&] { return generate(config); });
      const fs::path dir = out_path;
      io::write_file_atomic(dir / "ehr_cohort.csv", io::write_cohort_csv(sim.ehr));
      io::write_file_atomic(dir / "ekg_cohort.csv", io::write_cohort_csv(sim.ekg));
      io::write_file_atomic(dir / "truth.csv", write_truth_csv(sim.truth));
      io::write_file_atomic(dir / "config.txt", to_text(config));
      out << "wrote " << sim.ehr.records.size() << " records to " << dir.string() << "\n";
    } else if (train_cmd->parsed()) {
      const auto kind = parse_feature_kind(kind_text);
      const auto pop = parse_population(population_text);
      const auto cohort = stage("load", [&] { return io::read_cohort_csv(io::read_text_file(cohort_path), kind); });
      TrainConfig config;
      config.rng = RngHandle{resolve_seed(flags, SimConfig{}.seed.seed), "train"}.child(portastat::model_id(kind, pop));
      const auto model = stage("train", [&] { return train(cohort, pop, config); });
      io::write_file_atomic(out_path, serialize_model(model));
      out << "trained " << model.model_id() << "\n";
    } else if (score_cmd->parsed()) {
      const auto model = stage("load", [&] { return parse_model(io::read_text_file(model_path)); });
      const auto cohort = stage("load", [&] {
        return io::read_cohort_csv(io::read_text_file(cohort_path), model.feature_kind);
      });
      const auto scored = stage("score", [&] { return score_cohort(model, cohort, parse_split(split_text)); });
      io::write_file_atomic(out_path, io::write_scored_csv(scored));
      out << "scored " << scored.size() << " records\n";
    } else if (diagnose_cmd->parsed()) {
      const auto p = stage("load", [&] { return io::read_scored_csv(io::read_text_file(p_path), model_id); });
      const auto q = stage("load", [&] { return io::read_scored_csv(io::read_text_file(q_path), model_id); });
      const auto seed = resolve_seed(flags, SimConfig{}.seed.seed);
      const auto diag = stage("diagnose", [&] {
        return diagnose(p, q, stability_bootstrap_options(seed, flags.replicates, flags.level, flags.threads));
      });
      io::write_file_atomic(out_path, emit_json(diag));
      out << emit_json(diag);
    } else if (report_cmd->parsed()) {
      const auto report = stage("load", [&] { return parse_report_json(io::read_text_file(in_path)); });
      const auto paths = stage("report", [&] { return emit_plots(report, out_path); });
      out << format_summary(report) << "\nwrote " << paths.size() << " plots\n";
    } else if (run_all_cmd->parsed()) {
      PipelineOptions options;
      options.sim = stage("config", [&] { return load_config(config_path); });
      options.sim.seed.seed = resolve_seed(flags, options.sim.seed.seed);
      options.replicates = flags.replicates;
      options.level = flags.level;
      options.threads = flags.threads;
      const auto result = stage("pipeline", [&] { return run_pipeline(options); });
      stage("report", [&] {
        write_outputs(out_path, result, to_text(options.sim));
        return 0;
      });
      out << format_summary(result.report);
    }
  } catch (const Error& e) {
    err << "portastat: " << e.what() << "\n";
    return is_numerical(e.kind()) ? kNumericalError : kDataError;
  } catch (const std::exception& e) {
    err << "portastat: " << e.what() << "\n";
    return kDataError;
  }
  return kSuccess;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace portastat::cli

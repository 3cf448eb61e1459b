#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "portastat/core.hpp"

namespace portastat {

/// Two-population cohort generator. Physiology (latent risk, label law, EKG
/// mixing) is shared by both populations; only the health-seeking
/// observation process behind the EHR features differs.
struct SimConfig {
  RngHandle seed{1, "simulate"};
  std::size_t n_train_per_pop = 7000;
  std::size_t n_val_per_pop = 1000;
  std::size_t n_test_low = 2298;
  std::size_t n_test_high = 4491;
  std::size_t d_latent = 8;
  std::size_t d_ehr = 200;
  std::size_t d_ekg = 20;
  double prevalence_low = 0.119;
  double prevalence_high = 0.177;
  double observe_prob_low = 0.25;
  double observe_prob_high = 0.75;
  double ekg_noise_sd = 0.5;
  double behavior_background_rate = 0.05;
  /// Slope `a` of the label law logistic(a * risk + b_pop).
  double risk_slope = 2.0;
  /// Base log-odds of each underlying history indicator; negative values
  /// keep the EHR_LIKE vectors sparse.
  double ehr_history_logit = -2.5;

  bool operator==(const SimConfig&) const = default;

  void validate() const;
  std::size_t n_test(Population p) const { return p == Population::Low ? n_test_low : n_test_high; }
  double prevalence(Population p) const { return p == Population::Low ? prevalence_low : prevalence_high; }
  double observe_prob(Population p) const { return p == Population::Low ? observe_prob_low : observe_prob_high; }
};

/// Parses `key = value` lines (`#` starts a comment). Omitted keys keep
/// their defaults; unknown keys are errors.
SimConfig parse_sim_config(std::string_view text);
/// Canonical text form; parse_sim_config(to_text(c)) == c.
std::string to_text(const SimConfig& config);

struct GroundTruthRecord {
  std::string id;
  Eigen::VectorXd latent;
  double risk_score = 0.0;
  double label_prob = 0.0;
};

struct SimulationOutput {
  Cohort ehr;
  Cohort ekg;
  std::vector<GroundTruthRecord> truth;
  std::array<double, 2> population_bias{};  // indexed by Population
};

/// Solves mean_r logistic(slope * r + b) = prevalence for b by bisection over
/// the pilot draws `risk`. Throws CalibrationFailure after 60 iterations
/// without convergence.
double calibrate_bias(const Eigen::Ref<const Eigen::ArrayXd>& risk, double slope, double prevalence);

SimulationOutput generate(const SimConfig& config);

/// `id,risk_score,label_prob`
std::string write_truth_csv(const std::vector<GroundTruthRecord>& truth);

}  // namespace portastat

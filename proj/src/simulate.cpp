#include "portastat/simulate.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "portastat/io.hpp"
#include "portastat/models.hpp"

namespace portastat {
namespace {

constexpr std::size_t kPilotDraws = 200000;
constexpr int kBisectionIterations = 60;

Eigen::VectorXd normal_vector(Rng& rng, std::size_t n) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
  return v;
}

Eigen::VectorXd unit_vector(Rng& rng, std::size_t n) {
  Eigen::VectorXd v = normal_vector(rng, n);
  return v / v.norm();
}

struct Mechanism {
  Eigen::VectorXd risk_direction;  // unit, d_latent
  Eigen::MatrixXd ekg_mixing;      // d_ekg x d_latent
  Eigen::MatrixXd ehr_directions;  // d_ehr x d_latent, rows scaled by per-feature sharpness
};

Mechanism draw_mechanism(const SimConfig& c) {
  Rng rng(c.seed.child("structure"));
  Mechanism m;
  m.risk_direction = unit_vector(rng, c.d_latent);
  m.ekg_mixing.resize(static_cast<Eigen::Index>(c.d_ekg), static_cast<Eigen::Index>(c.d_latent));
  const double scale = 1.0 / std::sqrt(static_cast<double>(c.d_latent));
  for (Eigen::Index i = 0; i < m.ekg_mixing.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.ekg_mixing.cols(); ++j) m.ekg_mixing(i, j) = scale * rng.normal();
  }
  m.ehr_directions.resize(static_cast<Eigen::Index>(c.d_ehr), static_cast<Eigen::Index>(c.d_latent));
  for (Eigen::Index i = 0; i < m.ehr_directions.rows(); ++i) {
    const double sharpness = 1.0 + rng.uniform();
    m.ehr_directions.row(i) = sharpness * unit_vector(rng, c.d_latent).transpose();
  }
  return m;
}

std::string patient_id(Population p, std::size_t index) {
  std::string digits = std::to_string(index + 1);
  if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
  return std::string(to_string(p)) + "-" + digits;
}

using Setter = std::function<void(SimConfig&, std::string_view)>;

std::size_t parse_count(std::string_view v) {
  const double d = io::parse_double(v);
  if (d < 0 || d != std::floor(d)) fail(ErrorKind::ParseError, "expected a count, got '" + std::string(v) + "'");
  return static_cast<std::size_t>(d);
}

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"seed", [](SimConfig& c, std::string_view v) { c.seed.seed = std::stoull(std::string(v)); }},
      {"n_train_per_pop", [](SimConfig& c, std::string_view v) { c.n_train_per_pop = parse_count(v); }},
      {"n_val_per_pop", [](SimConfig& c, std::string_view v) { c.n_val_per_pop = parse_count(v); }},
      {"n_test_low", [](SimConfig& c, std::string_view v) { c.n_test_low = parse_count(v); }},
      {"n_test_high", [](SimConfig& c, std::string_view v) { c.n_test_high = parse_count(v); }},
      {"d_latent", [](SimConfig& c, std::string_view v) { c.d_latent = parse_count(v); }},
      {"d_ehr", [](SimConfig& c, std::string_view v) { c.d_ehr = parse_count(v); }},
      {"d_ekg", [](SimConfig& c, std::string_view v) { c.d_ekg = parse_count(v); }},
      {"prevalence_low", [](SimConfig& c, std::string_view v) { c.prevalence_low = io::parse_double(v); }},
      {"prevalence_high", [](SimConfig& c, std::string_view v) { c.prevalence_high = io::parse_double(v); }},
      {"observe_prob_low", [](SimConfig& c, std::string_view v) { c.observe_prob_low = io::parse_double(v); }},
      {"observe_prob_high", [](SimConfig& c, std::string_view v) { c.observe_prob_high = io::parse_double(v); }},
      {"ekg_noise_sd", [](SimConfig& c, std::string_view v) { c.ekg_noise_sd = io::parse_double(v); }},
      {"behavior_background_rate",
       [](SimConfig& c, std::string_view v) { c.behavior_background_rate = io::parse_double(v); }},
      {"risk_slope", [](SimConfig& c, std::string_view v) { c.risk_slope = io::parse_double(v); }},
      {"ehr_history_logit", [](SimConfig& c, std::string_view v) { c.ehr_history_logit = io::parse_double(v); }},
  };
  return table;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

void SimConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) fail(ErrorKind::InvalidArgument, std::string("SimConfig: ") + what);
  };
  require(n_train_per_pop > 0 && n_val_per_pop > 0 && n_test_low > 0 && n_test_high > 0,
          "all split sizes must be positive");
  require(d_latent > 0 && d_ehr > 0 && d_ekg > 0, "all dimensions must be positive");
  require(prevalence_low > 0.0 && prevalence_low < 1.0, "prevalence_low must lie in (0,1)");
  require(prevalence_high > 0.0 && prevalence_high < 1.0, "prevalence_high must lie in (0,1)");
  require(observe_prob_low > 0.0 && observe_prob_low <= 1.0, "observe_prob_low must lie in (0,1]");
  require(observe_prob_high > 0.0 && observe_prob_high <= 1.0, "observe_prob_high must lie in (0,1]");
  require(ekg_noise_sd > 0.0 && std::isfinite(ekg_noise_sd), "ekg_noise_sd must be positive");
  require(behavior_background_rate >= 0.0 && behavior_background_rate < 1.0,
          "behavior_background_rate must lie in [0,1)");
  require(std::isfinite(risk_slope), "risk_slope must be finite");
  require(std::isfinite(ehr_history_logit), "ehr_history_logit must be finite");
}

SimConfig parse_sim_config(std::string_view text) {
  SimConfig config;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorKind::ParseError, "config line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) {
      fail(ErrorKind::ParseError, "config line " + std::to_string(line_no) + ": unknown key '" +
                                      std::string(key) + "'");
    }
    try {
      it->second(config, value);
    } catch (const std::logic_error&) {
      fail(ErrorKind::ParseError, "config line " + std::to_string(line_no) + ": bad value for " +
                                      std::string(key));
    } catch (const Error& e) {
      fail(ErrorKind::ParseError, "config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  config.validate();
  return config;
}

std::string to_text(const SimConfig& c) {
  std::string out;
  auto put = [&out](std::string_view key, const std::string& value) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  };
  put("seed", std::to_string(c.seed.seed));
  put("n_train_per_pop", std::to_string(c.n_train_per_pop));
  put("n_val_per_pop", std::to_string(c.n_val_per_pop));
  put("n_test_low", std::to_string(c.n_test_low));
  put("n_test_high", std::to_string(c.n_test_high));
  put("d_latent", std::to_string(c.d_latent));
  put("d_ehr", std::to_string(c.d_ehr));
  put("d_ekg", std::to_string(c.d_ekg));
  put("prevalence_low", io::format_double(c.prevalence_low));
  put("prevalence_high", io::format_double(c.prevalence_high));
  put("observe_prob_low", io::format_double(c.observe_prob_low));
  put("observe_prob_high", io::format_double(c.observe_prob_high));
  put("ekg_noise_sd", io::format_double(c.ekg_noise_sd));
  put("behavior_background_rate", io::format_double(c.behavior_background_rate));
  put("risk_slope", io::format_double(c.risk_slope));
  put("ehr_history_logit", io::format_double(c.ehr_history_logit));
  return out;
}

double calibrate_bias(const Eigen::Ref<const Eigen::ArrayXd>& risk, double slope, double prevalence) {
  auto mean_prob = [&](double b) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < risk.size(); ++i) sum += logistic(slope * risk(i) + b);
    return sum / static_cast<double>(risk.size());
  };
  double lo = -30.0, hi = 30.0;
  for (int it = 0; it < kBisectionIterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mean_prob(mid) < prevalence) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double b = 0.5 * (lo + hi);
  if (std::abs(mean_prob(b) - prevalence) > 1e-6) {
    fail(ErrorKind::CalibrationFailure, "bias bisection did not reach prevalence " +
                                            io::format_double(prevalence));
  }
  return b;
}

SimulationOutput generate(const SimConfig& c) {
  c.validate();
  const auto mech = draw_mechanism(c);

  // risk_direction is a unit vector, so the pilot risk score is standard normal.
  Rng pilot(c.seed.child("pilot"));
  Eigen::ArrayXd pilot_risk(static_cast<Eigen::Index>(kPilotDraws));
  for (Eigen::Index i = 0; i < pilot_risk.size(); ++i) pilot_risk(i) = pilot.normal();

  SimulationOutput out;
  const auto d_ehr = static_cast<Eigen::Index>(c.d_ehr);
  const auto d_ekg = static_cast<Eigen::Index>(c.d_ekg);
  out.ehr = Cohort{d_ehr, FeatureKind::Ehr, {}};
  out.ekg = Cohort{d_ekg, FeatureKind::Ekg, {}};

  for (auto pop : kPopulations) {
    const double bias = calibrate_bias(pilot_risk, c.risk_slope, c.prevalence(pop));
    out.population_bias[static_cast<std::size_t>(pop)] = bias;
    const double observe = c.observe_prob(pop);
    Rng rng(c.seed.child("patients").child(to_string(pop)));
    const std::size_t n_total = c.n_train_per_pop + c.n_val_per_pop + c.n_test(pop);

    for (std::size_t i = 0; i < n_total; ++i) {
      const Split split = i < c.n_train_per_pop                     ? Split::Train
                          : i < c.n_train_per_pop + c.n_val_per_pop ? Split::Val
                                                                    : Split::Test;
      const Eigen::VectorXd z = normal_vector(rng, c.d_latent);
      const double risk = mech.risk_direction.dot(z);
      const double prob = logistic(c.risk_slope * risk + bias);
      const int label = rng.bernoulli(prob) ? 1 : 0;

      Eigen::VectorXd ekg = mech.ekg_mixing * z;
      for (Eigen::Index j = 0; j < d_ekg; ++j) ekg(j) += c.ekg_noise_sd * rng.normal();

      const Eigen::VectorXd history_margin = mech.ehr_directions * z;
      Eigen::VectorXd ehr(d_ehr);
      for (Eigen::Index j = 0; j < d_ehr; ++j) {
        const bool present = rng.bernoulli(logistic(history_margin(j) + c.ehr_history_logit));
        const bool recorded = rng.bernoulli(observe);
        const bool spurious = rng.bernoulli(c.behavior_background_rate);
        ehr(j) = ((present && recorded) || spurious) ? 1.0 : 0.0;
      }

      const auto id = patient_id(pop, i);
      out.ehr.records.push_back(Record{id, std::move(ehr), label, pop, split});
      out.ekg.records.push_back(Record{id, std::move(ekg), label, pop, split});
      out.truth.push_back(GroundTruthRecord{id, z, risk, prob});
    }
  }
  return out;
}

std::string write_truth_csv(const std::vector<GroundTruthRecord>& truth) {
  std::string out = "id,risk_score,label_prob\n";
  for (const auto& t : truth) {
    out += t.id + "," + io::format_double(t.risk_score) + "," + io::format_double(t.label_prob) + "\n";
  }
  return out;
}

}  // namespace portastat

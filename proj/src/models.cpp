#include "portastat/models.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "portastat/io.hpp"
#include "portastat/metrics.hpp"

namespace portastat {

std::string model_id(FeatureKind kind, Population train_population) {
  return std::string(to_string(kind)) + "-" + std::string(to_string(train_population));
}

std::string LinearModel::model_id() const { return portastat::model_id(feature_kind, train_population); }

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    fail(ErrorKind::InvalidArgument, "learning_rate must be positive");
  }
  if (!(l2_penalty >= 0.0) || !std::isfinite(l2_penalty)) {
    fail(ErrorKind::InvalidArgument, "l2_penalty must be nonnegative");
  }
  if (epochs == 0) fail(ErrorKind::InvalidArgument, "epochs must be positive");
  if (batch_size == 0) fail(ErrorKind::InvalidArgument, "batch_size must be positive");
}

double predict(const LinearModel& model, const Eigen::Ref<const Eigen::VectorXd>& features) {
  if (features.size() != model.weights.size()) {
    fail(ErrorKind::DimensionMismatch, "model " + model.model_id() + " expects " +
                                           std::to_string(model.weights.size()) + " features, got " +
                                           std::to_string(features.size()));
  }
  constexpr double kFloor = std::numeric_limits<double>::min();
  constexpr double kCeil = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
  return std::clamp(logistic(model.weights.dot(features) + model.bias), kFloor, kCeil);
}

Eigen::VectorXd predict_rows(const LinearModel& model, const Eigen::Ref<const Eigen::MatrixXd>& rows) {
  Eigen::VectorXd out(rows.rows());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) out(i) = predict(model, rows.row(i).transpose());
  return out;
}

TrainOutcome train_with_history(const Cohort& cohort, Population population, const TrainConfig& config) {
  config.validate();
  if (const auto violations = validate_cohort(cohort); !violations.empty()) {
    fail(ErrorKind::InvalidArgument, "invalid cohort: " + violations.front().describe());
  }
  const Eigen::MatrixXd x_train = cohort.features(population, Split::Train);
  const Eigen::VectorXd y_train = cohort.labels(population, Split::Train);
  const Eigen::MatrixXd x_val = cohort.features(population, Split::Val);
  const Eigen::VectorXd y_val = cohort.labels(population, Split::Val);
  const std::string pop(to_string(population));
  if (x_train.rows() == 0) fail(ErrorKind::EmptySample, "no TRAIN records for population " + pop);
  if (x_val.rows() == 0) fail(ErrorKind::EmptySample, "no VAL records for population " + pop);
  const double positives = y_train.sum();
  if (positives == 0.0 || positives == static_cast<double>(y_train.size())) {
    fail(ErrorKind::DegenerateLabels, "TRAIN split of population " + pop + " has a single label class");
  }

  TrainOutcome out;
  out.model.train_population = population;
  out.model.feature_kind = cohort.feature_kind;
  out.model.weights = Eigen::VectorXd::Zero(cohort.dimension);
  out.model.bias = 0.0;

  Eigen::VectorXd weights = out.model.weights;
  double bias = 0.0;
  double best_auc = -1.0;
  std::size_t since_best = 0;
  Rng rng(config.rng);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(x_train.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);

    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const auto stop = std::min(order.size(), start + config.batch_size);
      const std::vector<Eigen::Index> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                            order.begin() + static_cast<std::ptrdiff_t>(stop));
      const Eigen::MatrixXd xb = x_train(batch, Eigen::all);
      const Eigen::VectorXd yb = y_train(batch);
      const auto g = loss_and_gradient(weights, bias, xb, yb, config.l2_penalty);
      weights -= config.learning_rate * g.grad_weights;
      bias -= config.learning_rate * g.grad_bias;
    }

    const double loss = loss_and_gradient(weights, bias, x_train, y_train, config.l2_penalty).loss;
    if (!std::isfinite(loss) || !weights.allFinite() || !std::isfinite(bias)) {
      fail(ErrorKind::NonFiniteLoss, "training diverged at epoch " + std::to_string(epoch + 1) +
                                         "; reduce the learning rate");
    }
    const Eigen::ArrayXd val_scores = ((x_val * weights).array() + bias).unaryExpr(&logistic<double>);
    const double val_auc = auc(val_scores, y_val.array());
    out.history.train_loss.push_back(loss);
    out.history.val_auc.push_back(val_auc);

    if (val_auc > best_auc) {
      best_auc = val_auc;
      since_best = 0;
      out.history.best_epoch = epoch;
      out.model.weights = weights;
      out.model.bias = bias;
    } else if (++since_best >= config.early_stop_patience) {
      break;
    }
  }
  return out;
}

LinearModel train(const Cohort& cohort, Population population, const TrainConfig& config) {
  return train_with_history(cohort, population, config).model;
}

ScoredSet score_cohort(const LinearModel& model, const Cohort& cohort, Split split) {
  if (cohort.dimension != model.weights.size()) {
    fail(ErrorKind::DimensionMismatch, "cohort dimension " + std::to_string(cohort.dimension) +
                                           " != model dimension " + std::to_string(model.weights.size()));
  }
  ScoredSet out{model.model_id(), {}};
  for (const auto& r : cohort.records) {
    if (r.split != split) continue;
    out.entries.push_back(ScoredEntry{r.id, predict(model, r.features), r.label, r.population});
  }
  return out;
}

std::string serialize_model(const LinearModel& model) {
  std::string out = "model_id " + model.model_id() + "\n";
  out += "feature_kind " + std::string(to_string(model.feature_kind)) + "\n";
  out += "train_population " + std::string(to_string(model.train_population)) + "\n";
  out += "bias " + io::format_double(model.bias) + "\n";
  out += "weights";
  for (Eigen::Index j = 0; j < model.weights.size(); ++j) out += " " + io::format_double(model.weights(j));
  out += "\n";
  return out;
}

LinearModel parse_model(std::string_view text) {
  LinearModel model;
  std::string declared_id;
  bool have_kind = false, have_pop = false, have_bias = false, have_weights = false;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string key;
    fields >> key;
    std::string value;
    if (key == "model_id") {
      fields >> declared_id;
    } else if (key == "feature_kind") {
      fields >> value;
      model.feature_kind = parse_feature_kind(value);
      have_kind = true;
    } else if (key == "train_population") {
      fields >> value;
      model.train_population = parse_population(value);
      have_pop = true;
    } else if (key == "bias") {
      fields >> value;
      model.bias = io::parse_double(value);
      have_bias = true;
    } else if (key == "weights") {
      std::vector<double> w;
      while (fields >> value) w.push_back(io::parse_double(value));
      model.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
      have_weights = true;
    } else {
      fail(ErrorKind::ParseError, "unknown model field '" + key + "'");
    }
  }
  if (!(have_kind && have_pop && have_bias && have_weights)) {
    fail(ErrorKind::ParseError, "model document is missing a required field");
  }
  if (!declared_id.empty() && declared_id != model.model_id()) {
    fail(ErrorKind::ParseError, "model_id '" + declared_id + "' disagrees with kind/population");
  }
  if (!model.weights.allFinite() || !std::isfinite(model.bias)) {
    fail(ErrorKind::ParseError, "model parameters must be finite");
  }
  return model;
}

}  // namespace portastat

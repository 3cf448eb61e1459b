#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "portastat/core.hpp"

namespace portastat {

template <typename Scalar>
Scalar logistic(Scalar z) {
  if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-z));
  const Scalar e = std::exp(z);
  return e / (Scalar(1) + e);
}

/// log(1 + e^z) without overflow.
template <typename Scalar>
Scalar softplus(Scalar z) {
  return std::log1p(std::exp(-std::abs(z))) + std::max(z, Scalar(0));
}

template <typename Scalar>
struct LossGradient {
  Scalar loss{};
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> grad_weights;
  Scalar grad_bias{};
};

/// Mean negative log-likelihood of the logistic model over the rows of
/// `features`, plus l2 * ||weights||^2 (the bias is not penalized), and its
/// gradient with respect to (weights, bias).
template <typename DerivedW, typename DerivedX, typename DerivedY>
LossGradient<typename DerivedW::Scalar> loss_and_gradient(const Eigen::MatrixBase<DerivedW>& weights,
                                                          typename DerivedW::Scalar bias,
                                                          const Eigen::MatrixBase<DerivedX>& features,
                                                          const Eigen::MatrixBase<DerivedY>& labels,
                                                          typename DerivedW::Scalar l2) {
  using Scalar = typename DerivedW::Scalar;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const auto n = static_cast<Scalar>(features.rows());
  const Vector margin = (features * weights).array() + bias;
  Vector residual(margin.size());
  Scalar nll(0);
  for (Eigen::Index i = 0; i < margin.size(); ++i) {
    nll += softplus(margin(i)) - labels(i) * margin(i);
    residual(i) = logistic(margin(i)) - labels(i);
  }
  LossGradient<Scalar> out;
  out.loss = nll / n + l2 * weights.squaredNorm();
  out.grad_weights = features.transpose() * residual / n + Scalar(2) * l2 * weights;
  out.grad_bias = residual.sum() / n;
  return out;
}

struct LinearModel {
  Eigen::VectorXd weights;
  double bias = 0.0;
  Population train_population = Population::Low;
  FeatureKind feature_kind = FeatureKind::Ehr;

  bool operator==(const LinearModel& other) const {
    return bias == other.bias && train_population == other.train_population &&
           feature_kind == other.feature_kind && weights.size() == other.weights.size() &&
           weights == other.weights;
  }

  /// "<feature_kind>-<train_population>", e.g. "ehr-high".
  std::string model_id() const;
};

std::string model_id(FeatureKind kind, Population train_population);

struct TrainConfig {
  double learning_rate = 0.05;
  double l2_penalty = 1e-4;
  std::size_t epochs = 200;
  std::size_t batch_size = 64;
  std::size_t early_stop_patience = 20;
  RngHandle rng{0, "train"};

  void validate() const;
};

struct TrainHistory {
  std::vector<double> train_loss;  // full training objective after each epoch
  std::vector<double> val_auc;
  std::size_t best_epoch = 0;      // zero-based
};

struct TrainOutcome {
  LinearModel model;
  TrainHistory history;
};

/// Score in (0,1); throws DimensionMismatch on a wrong-length input.
double predict(const LinearModel& model, const Eigen::Ref<const Eigen::VectorXd>& features);
Eigen::VectorXd predict_rows(const LinearModel& model, const Eigen::Ref<const Eigen::MatrixXd>& rows);

/// Mini-batch gradient descent on the population's TRAIN records, keeping
/// the epoch with the best VAL AUC and stopping after `early_stop_patience`
/// epochs without improvement.
TrainOutcome train_with_history(const Cohort& cohort, Population population, const TrainConfig& config);
LinearModel train(const Cohort& cohort, Population population, const TrainConfig& config);

/// One entry per record of `split` across both populations.
ScoredSet score_cohort(const LinearModel& model, const Cohort& cohort, Split split);

std::string serialize_model(const LinearModel& model);
LinearModel parse_model(std::string_view text);

}  // namespace portastat

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <vector>

#include "portastat/core.hpp"

namespace portastat {

namespace detail {

template <typename Derived>
std::vector<typename Derived::Scalar> sorted_copy(const Eigen::DenseBase<Derived>& sample) {
  std::vector<typename Derived::Scalar> out(static_cast<std::size_t>(sample.size()));
  for (Eigen::Index i = 0; i < sample.size(); ++i) out[static_cast<std::size_t>(i)] = sample.derived().coeff(i);
  std::sort(out.begin(), out.end());
  return out;
}

template <typename Derived>
void require_finite(const Eigen::DenseBase<Derived>& sample, const char* what) {
  for (Eigen::Index i = 0; i < sample.size(); ++i) {
    if (!std::isfinite(static_cast<double>(sample.derived().coeff(i)))) {
      fail(ErrorKind::InvalidArgument, std::string(what) + " contains a non-finite value");
    }
  }
}

}  // namespace detail

/// Probability that a random positive outscores a random negative, ties
/// counted as one half (the Mann-Whitney statistic normalized to [0,1]).
/// Sorting once and walking tie groups is equivalent to the midrank formula.
template <typename ScoreDerived, typename LabelDerived>
typename ScoreDerived::Scalar auc(const Eigen::DenseBase<ScoreDerived>& scores,
                                  const Eigen::DenseBase<LabelDerived>& labels) {
  using Scalar = typename ScoreDerived::Scalar;
  if (scores.size() != labels.size()) {
    fail(ErrorKind::DimensionMismatch, "auc: " + std::to_string(scores.size()) + " scores vs " +
                                           std::to_string(labels.size()) + " labels");
  }
  const auto n = static_cast<std::size_t>(scores.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores.derived().coeff(static_cast<Eigen::Index>(a)) <
           scores.derived().coeff(static_cast<Eigen::Index>(b));
  });

  double negatives_below = 0.0;
  double concordance = 0.0;  // counted in units of 1/2
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    const Scalar value = scores.derived().coeff(static_cast<Eigen::Index>(order[i]));
    std::size_t pos_in_group = 0, neg_in_group = 0, j = i;
    for (; j < n && scores.derived().coeff(static_cast<Eigen::Index>(order[j])) == value; ++j) {
      if (labels.derived().coeff(static_cast<Eigen::Index>(order[j])) != 0) {
        ++pos_in_group;
      } else {
        ++neg_in_group;
      }
    }
    concordance += static_cast<double>(pos_in_group) *
                   (2.0 * negatives_below + static_cast<double>(neg_in_group));
    negatives_below += static_cast<double>(neg_in_group);
    n_pos += pos_in_group;
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    fail(ErrorKind::DegenerateLabels, "auc needs both label classes (" + std::to_string(n_pos) +
                                          " positive, " + std::to_string(n_neg) + " negative)");
  }
  return static_cast<Scalar>(concordance / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg)));
}

/// Right-continuous empirical CDF: F(t) = fraction of the sample <= t.
template <typename Scalar = double>
class Ecdf {
 public:
  template <typename Derived>
  explicit Ecdf(const Eigen::DenseBase<Derived>& sample) {
    if (sample.size() == 0) fail(ErrorKind::EmptySample, "ecdf of an empty sample");
    detail::require_finite(sample, "ecdf sample");
    const auto sorted = detail::sorted_copy(sample);
    const auto n = static_cast<Scalar>(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
      support_.push_back(static_cast<Scalar>(sorted[i]));
      cumulative_.push_back(static_cast<Scalar>(i + 1) / n);
    }
    size_ = sorted.size();
  }

  Scalar operator()(Scalar t) const {
    const auto it = std::upper_bound(support_.begin(), support_.end(), t);
    if (it == support_.begin()) return Scalar(0);
    return cumulative_[static_cast<std::size_t>(it - support_.begin()) - 1];
  }

  const std::vector<Scalar>& support() const { return support_; }
  const std::vector<Scalar>& cumulative() const { return cumulative_; }
  std::size_t sample_size() const { return size_; }

 private:
  std::vector<Scalar> support_;
  std::vector<Scalar> cumulative_;
  std::size_t size_ = 0;
};

struct KSResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;

  bool operator==(const KSResult&) const = default;
};

/// Survival function of the Kolmogorov distribution,
/// Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2), clamped to [0,1].
double kolmogorov_survival(double lambda);

/// Asymptotic two-sample p-value with the effective-size correction
/// lambda = (sqrt(ne) + 0.12 + 0.11 / sqrt(ne)) * statistic.
double ks_p_value(double statistic, std::size_t n_a, std::size_t n_b);

/// Two-sample Kolmogorov-Smirnov distance, evaluated at pooled sample points.
template <typename DerivedA, typename DerivedB>
KSResult ks_two_sample(const Eigen::DenseBase<DerivedA>& a, const Eigen::DenseBase<DerivedB>& b) {
  if (a.size() == 0) fail(ErrorKind::EmptySample, "ks_two_sample: first sample is empty");
  if (b.size() == 0) fail(ErrorKind::EmptySample, "ks_two_sample: second sample is empty");
  detail::require_finite(a, "ks_two_sample first sample");
  detail::require_finite(b, "ks_two_sample second sample");
  const auto sa = detail::sorted_copy(a);
  const auto sb = detail::sorted_copy(b);
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());

  std::size_t i = 0, j = 0;
  double sup = 0.0;
  while (i < sa.size() || j < sb.size()) {
    // Next pooled point; consume every copy of it from both samples.
    double t;
    if (j >= sb.size() || (i < sa.size() && sa[i] <= sb[j])) {
      t = static_cast<double>(sa[i]);
    } else {
      t = static_cast<double>(sb[j]);
    }
    while (i < sa.size() && static_cast<double>(sa[i]) == t) ++i;
    while (j < sb.size() && static_cast<double>(sb[j]) == t) ++j;
    sup = std::max(sup, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return KSResult{sup, ks_p_value(sup, sa.size(), sb.size()), sa.size(), sb.size()};
}

struct GeneralizationCell {
  Population train = Population::Low;
  Population test = Population::Low;
  double auc = 0.0;
  std::optional<Interval> interval;

  bool operator==(const GeneralizationCell&) const = default;
};

/// AUC of models trained on one population and evaluated on each population.
struct GeneralizationMatrix {
  FeatureKind feature_kind = FeatureKind::Ehr;
  std::array<GeneralizationCell, 4> cells{};

  bool operator==(const GeneralizationMatrix&) const = default;

  static constexpr std::size_t index(Population train, Population test) {
    return 2 * static_cast<std::size_t>(train) + static_cast<std::size_t>(test);
  }
  const GeneralizationCell& at(Population train, Population test) const { return cells[index(train, test)]; }
  GeneralizationCell& at(Population train, Population test) { return cells[index(train, test)]; }
  double operator()(Population train, Population test) const { return at(train, test).auc; }
};

/// `scored[tp]` holds the scores of the model trained on `tp` over test
/// records of both populations.
GeneralizationMatrix generalization_matrix(FeatureKind kind,
                                           const std::map<Population, ScoredSet>& scored);

}  // namespace portastat

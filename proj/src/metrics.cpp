#include "portastat/metrics.hpp"

namespace portastat {

double kolmogorov_survival(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  if (lambda < 1.0) {
    // The alternating series converges too slowly near zero; use the
    // equivalent theta-function form 1 - sqrt(2 pi)/lambda sum exp(-(2k-1)^2 pi^2 / (8 lambda^2)).
    constexpr double kPi = 3.14159265358979323846;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
      const double odd = 2.0 * k - 1.0;
      const double term = std::exp(-odd * odd * kPi * kPi / (8.0 * lambda * lambda));
      sum += term;
      if (term < 1e-10 * sum) break;
    }
    return std::clamp(1.0 - std::sqrt(2.0 * kPi) / lambda * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = 2.0 * sign * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-10) break;
    sign = -sign;
  }
  return std::clamp(sum, 0.0, 1.0);
}

double ks_p_value(double statistic, std::size_t n_a, std::size_t n_b) {
  const double na = static_cast<double>(n_a);
  const double nb = static_cast<double>(n_b);
  const double ne = na * nb / (na + nb);
  const double root = std::sqrt(ne);
  return kolmogorov_survival((root + 0.12 + 0.11 / root) * statistic);
}

GeneralizationMatrix generalization_matrix(FeatureKind kind,
                                           const std::map<Population, ScoredSet>& scored) {
  GeneralizationMatrix m;
  m.feature_kind = kind;
  for (auto train : kPopulations) {
    const auto it = scored.find(train);
    if (it == scored.end()) {
      fail(ErrorKind::InvalidArgument,
           "generalization_matrix: no scores for train population " + std::string(to_string(train)));
    }
    for (auto test : kPopulations) {
      const auto subset = partition_by(it->second, test);
      auto& cell = m.at(train, test);
      cell.train = train;
      cell.test = test;
      try {
        cell.auc = auc(subset.scores(), subset.labels());
      } catch (const Error& e) {
        throw Error(e.kind(), "cell (" + std::string(to_string(kind)) + ", train=" +
                                  std::string(to_string(train)) + ", test=" +
                                  std::string(to_string(test)) + "): " + e.what());
      }
    }
  }
  return m;
}

}  // namespace portastat

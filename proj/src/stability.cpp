#include "portastat/stability.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "portastat/parallel.hpp"

namespace portastat {
namespace {

void require_same_model(const ScoredSet& p, const ScoredSet& q) {
  if (p.model_id != q.model_id) {
    fail(ErrorKind::InvalidArgument,
         "scored sets come from different models ('" + p.model_id + "' vs '" + q.model_id + "')");
  }
}

Eigen::ArrayXd label_scores(const ScoredSet& set, int label) {
  std::vector<double> out;
  for (const auto& e : set.entries) {
    if (e.label == label) out.push_back(e.score);
  }
  return Eigen::Map<const Eigen::ArrayXd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

}  // namespace

CovariateStabilityResult covariate_stability(const ScoredSet& scored_p, const ScoredSet& scored_q,
                                             int label) {
  require_same_model(scored_p, scored_q);
  const auto a = label_scores(scored_p, label);
  const auto b = label_scores(scored_q, label);
  const auto label_text = std::to_string(label);
  if (a.size() == 0) fail(ErrorKind::EmptyConditional, "no high-use entries with label " + label_text);
  if (b.size() == 0) fail(ErrorKind::EmptyConditional, "no low-use entries with label " + label_text);
  return CovariateStabilityResult{scored_p.model_id, label, ks_two_sample(a, b)};
}

std::array<double, kStabilityBins + 1> quintile_edges(const ScoredSet& scored_p,
                                                      const ScoredSet& scored_q) {
  if (scored_p.empty()) fail(ErrorKind::EmptyConditional, "high-use scored set is empty");
  if (scored_q.empty()) fail(ErrorKind::EmptyConditional, "low-use scored set is empty");

  // Integer weights: N_Q per P entry and N_P per Q entry keep the mixture exact.
  const std::uint64_t n_p = scored_p.size();
  const std::uint64_t n_q = scored_q.size();
  std::vector<std::pair<double, std::uint64_t>> pooled;
  pooled.reserve(n_p + n_q);
  for (const auto& e : scored_p.entries) pooled.emplace_back(e.score, n_q);
  for (const auto& e : scored_q.entries) pooled.emplace_back(e.score, n_p);
  std::sort(pooled.begin(), pooled.end());
  const std::uint64_t total = 2 * n_p * n_q;

  std::array<double, kStabilityBins + 1> edges{};
  edges.fill(pooled.back().first);
  edges.front() = pooled.front().first;
  // Interior edge k is the first distinct score whose strictly-lower mass
  // reaches k/5, so the tie group straddling a quantile stays in the lower bin.
  std::uint64_t below = 0;
  std::size_t next_edge = 1;
  for (std::size_t i = 0; i < pooled.size() && next_edge < kStabilityBins;) {
    const double value = pooled[i].first;
    while (next_edge < kStabilityBins && below * kStabilityBins >= next_edge * total) {
      edges[next_edge++] = value;
    }
    for (; i < pooled.size() && pooled[i].first == value; ++i) below += pooled[i].second;
  }
  return edges;
}

std::size_t bin_index(const std::array<double, kStabilityBins + 1>& edges, double score) {
  std::size_t bin = 0;
  for (std::size_t k = 1; k < kStabilityBins; ++k) bin += (edges[k] <= score);
  return bin;
}

StabilityCurve predictive_stability_curve(const ScoredSet& scored_p, const ScoredSet& scored_q) {
  require_same_model(scored_p, scored_q);
  if (scored_p.size() + scored_q.size() < 2 * kStabilityBins) {
    fail(ErrorKind::InvalidArgument, "predictive stability needs at least 10 scored entries");
  }
  StabilityCurve curve;
  curve.model_id = scored_p.model_id;
  curve.bin_edges = quintile_edges(scored_p, scored_q);

  std::array<std::size_t, kStabilityBins> pos_p{}, pos_q{};
  for (const auto& e : scored_p.entries) {
    const auto b = bin_index(curve.bin_edges, e.score);
    ++curve.bins[b].n_p;
    pos_p[b] += static_cast<std::size_t>(e.label);
  }
  for (const auto& e : scored_q.entries) {
    const auto b = bin_index(curve.bin_edges, e.score);
    ++curve.bins[b].n_q;
    pos_q[b] += static_cast<std::size_t>(e.label);
  }
  for (std::size_t b = 0; b < kStabilityBins; ++b) {
    auto& bin = curve.bins[b];
    if (bin.n_p > 0) bin.mean_y_p = static_cast<double>(pos_p[b]) / static_cast<double>(bin.n_p);
    if (bin.n_q > 0) bin.mean_y_q = static_cast<double>(pos_q[b]) / static_cast<double>(bin.n_q);
    if (bin.mean_y_p && bin.mean_y_q) bin.diff = *bin.mean_y_q - *bin.mean_y_p;
  }
  return curve;
}

StabilitySummary predictive_stability_summary(const StabilityCurve& curve) {
  double total_p = 0.0, total_q = 0.0;
  for (const auto& bin : curve.bins) {
    total_p += static_cast<double>(bin.n_p);
    total_q += static_cast<double>(bin.n_q);
  }
  double weighted = 0.0, weight_sum = 0.0;
  for (const auto& bin : curve.bins) {
    if (!bin.diff) continue;
    const double w = 0.5 * (static_cast<double>(bin.n_p) / total_p + static_cast<double>(bin.n_q) / total_q);
    weighted += w * *bin.diff;
    weight_sum += w;
  }
  if (weight_sum == 0.0) {
    fail(ErrorKind::NoComparableBins, "no bin holds entries from both populations");
  }
  return StabilitySummary{curve.model_id, weighted / weight_sum, std::nullopt};
}

void BootstrapOptions::validate() const {
  if (replicates < 100) fail(ErrorKind::InvalidArgument, "bootstrap needs at least 100 replicates");
  if (!(level > 0.0 && level < 1.0)) fail(ErrorKind::InvalidArgument, "bootstrap level must lie in (0,1)");
}

std::pair<ScoredSet, ScoredSet> resample(const ScoredSet& scored_p, const ScoredSet& scored_q,
                                         const RngHandle& replicate_rng) {
  Rng rng(replicate_rng);
  auto draw = [&rng](const ScoredSet& source) {
    ScoredSet out{source.model_id, {}};
    out.entries.reserve(source.size());
    for (std::size_t i = 0; i < source.size(); ++i) {
      out.entries.push_back(source.entries[rng.index(source.size())]);
    }
    return out;
  };
  auto p = draw(scored_p);
  auto q = draw(scored_q);
  return {std::move(p), std::move(q)};
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) fail(ErrorKind::EmptySample, "percentile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Interval covering(Interval interval, double point) {
  return Interval{std::min(interval.lo, point), std::max(interval.hi, point)};
}

BootstrapResult bootstrap_interval(const ResampleStatistic& statistic, const ScoredSet& scored_p,
                                   const ScoredSet& scored_q, const BootstrapOptions& options) {
  options.validate();
  std::vector<std::optional<double>> slots(options.replicates);
  std::vector<std::string> errors(options.replicates);
  parallel_for(options.replicates, options.threads, [&](std::size_t r) {
    const auto [p, q] = resample(scored_p, scored_q, options.rng.child(r));
    try {
      slots[r] = statistic(p, q);
    } catch (const Error& e) {
      errors[r] = e.what();
    }
  });

  std::vector<double> values;
  values.reserve(slots.size());
  std::string first_error;
  for (std::size_t r = 0; r < slots.size(); ++r) {
    if (slots[r]) {
      values.push_back(*slots[r]);
    } else if (first_error.empty()) {
      first_error = errors[r];
    }
  }
  const std::size_t failed = slots.size() - values.size();
  if (static_cast<double>(failed) > 0.05 * static_cast<double>(options.replicates)) {
    fail(ErrorKind::StatisticFailure, std::to_string(failed) + " of " +
                                          std::to_string(options.replicates) +
                                          " bootstrap replicates failed; first: " + first_error);
  }
  const double tail = (1.0 - options.level) / 2.0;
  return BootstrapResult{Interval{percentile(values, tail), percentile(values, 1.0 - tail)},
                         values.size(), failed};
}

std::array<std::optional<Interval>, kStabilityBins> bootstrap_curve_intervals(
    const ScoredSet& scored_p, const ScoredSet& scored_q, const BootstrapOptions& options) {
  options.validate();
  std::vector<std::array<std::optional<double>, kStabilityBins>> slots(options.replicates);
  parallel_for(options.replicates, options.threads, [&](std::size_t r) {
    const auto [p, q] = resample(scored_p, scored_q, options.rng.child(r));
    const auto curve = predictive_stability_curve(p, q);
    for (std::size_t b = 0; b < kStabilityBins; ++b) slots[r][b] = curve.bins[b].diff;
  });

  std::array<std::optional<Interval>, kStabilityBins> out{};
  const double tail = (1.0 - options.level) / 2.0;
  for (std::size_t b = 0; b < kStabilityBins; ++b) {
    std::vector<double> values;
    for (const auto& slot : slots) {
      if (slot[b]) values.push_back(*slot[b]);
    }
    if (!values.empty()) out[b] = Interval{percentile(values, tail), percentile(values, 1.0 - tail)};
  }
  return out;
}

}  // namespace portastat

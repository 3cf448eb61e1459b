#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace portastat {

/// Names a reproducible random stream. The same (seed, stream_label) pair
/// always produces the same sequence on every platform.
struct RngHandle {
  std::uint64_t seed = 0;
  std::string stream_label;

  bool operator==(const RngHandle&) const = default;

  RngHandle child(std::string_view sub_label) const;
  RngHandle child(std::uint64_t index) const;
};

/// Deterministic generator built only on std::mt19937_64 (whose output is
/// fixed by the standard) plus hand-written transforms, so distribution
/// implementations of the standard library never leak into results.
class Rng {
 public:
  explicit Rng(const RngHandle& handle);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform();
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  bool bernoulli(double p) { return uniform() < p; }
  /// Uniform integer on [0, n).
  std::uint64_t index(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t mix_seed(std::uint64_t seed, std::string_view label);
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace portastat

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "sewflow/timegrid.hpp"

namespace sewflow {

/// Digitally shifted Sobol sequence in up to four dimensions.
///
/// Points are multiples of 2^-32, so times drawn on [0, 2^k] are exact dyadic
/// rationals and differences between them are computed without rounding.
class SobolSequence {
 public:
  static constexpr std::size_t kMaxDim = 4;

  SobolSequence(std::size_t dim, std::uint64_t seed);

  /// Next point in [0,1)^dim.
  std::array<double, kMaxDim> next();

 private:
  std::size_t dim_;
  std::uint64_t index_ = 0;
  std::array<std::array<std::uint32_t, 32>, kMaxDim> directions_{};
  std::array<std::uint32_t, kMaxDim> state_{};
  std::array<std::uint32_t, kMaxDim> shift_{};
};

/// Uniform double in [0,1) from a 64-bit engine, identical on every platform.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Seeded sampler settings shared by validators and sewing diagnostics.
struct SamplerSpec {
  std::uint64_t seed = 20240607;
  std::size_t n_times = 32;
  std::size_t n_states = 4;
  double state_lo = -1.0;
  double state_hi = 1.0;

  bool operator==(const SamplerSpec&) const = default;
};

/// Time pairs s < t in [t0, t1].
std::vector<std::pair<double, double>> sample_time_pairs(const SamplerSpec& spec, double t0,
                                                         double t1);
/// Triples r <= s <= t in [t0, t1] with r < t.
std::vector<SimplexTriple> sample_triples(const SamplerSpec& spec, double t0, double t1);

/// Random partition of [0, horizon] with `interior` uniformly drawn interior points.
Partition random_partition(std::mt19937_64& rng, double horizon, std::size_t interior);

}  // namespace sewflow

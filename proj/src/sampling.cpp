#include "sewflow/sampling.hpp"

#include <algorithm>

#include "sewflow/errors.hpp"

namespace sewflow {

namespace {

struct DirectionInit {
  unsigned degree;
  unsigned coeffs;
  std::array<std::uint32_t, 3> m;
};

// Joe & Kuo primitive polynomials and initial direction numbers, dimensions 2..4.
constexpr std::array<DirectionInit, 3> kInits{{
    {1, 0, {1, 0, 0}},
    {2, 1, {1, 3, 0}},
    {3, 1, {1, 3, 1}},
}};

}  // namespace

SobolSequence::SobolSequence(std::size_t dim, std::uint64_t seed) : dim_(dim) {
  if (dim == 0 || dim > kMaxDim) throw InvalidArgument("Sobol dimension must be in [1, 4]");
  for (std::size_t k = 0; k < 32; ++k) directions_[0][k] = std::uint32_t{1} << (31 - k);
  for (std::size_t d = 1; d < kMaxDim; ++d) {
    const auto& init = kInits[d - 1];
    auto& v = directions_[d];
    for (unsigned k = 0; k < init.degree; ++k) v[k] = init.m[k] << (31 - k);
    for (unsigned k = init.degree; k < 32; ++k) {
      std::uint32_t x = v[k - init.degree] ^ (v[k - init.degree] >> init.degree);
      for (unsigned i = 1; i < init.degree; ++i) {
        if ((init.coeffs >> (init.degree - 1 - i)) & 1U) x ^= v[k - i];
      }
      v[k] = x;
    }
  }
  std::mt19937_64 rng(seed);
  for (auto& s : shift_) s = static_cast<std::uint32_t>(rng() >> 32);
}

std::array<double, SobolSequence::kMaxDim> SobolSequence::next() {
  // Gray-code update; the all-zero first point is skipped.
  ++index_;
  std::uint64_t c = 0;
  std::uint64_t n = index_ - 1;
  while (n & 1U) {
    n >>= 1;
    ++c;
  }
  std::array<double, kMaxDim> out{};
  for (std::size_t d = 0; d < dim_; ++d) {
    state_[d] ^= directions_[d][c];
    out[d] = static_cast<double>(state_[d] ^ shift_[d]) * 0x1.0p-32;
  }
  return out;
}

std::vector<std::pair<double, double>> sample_time_pairs(const SamplerSpec& spec, double t0,
                                                         double t1) {
  SobolSequence seq(2, spec.seed);
  std::vector<std::pair<double, double>> out;
  out.reserve(spec.n_times);
  const double span = t1 - t0;
  while (out.size() < spec.n_times) {
    auto u = seq.next();
    double s = t0 + std::min(u[0], u[1]) * span;
    double t = t0 + std::max(u[0], u[1]) * span;
    if (s < t) out.emplace_back(s, t);
  }
  return out;
}

std::vector<SimplexTriple> sample_triples(const SamplerSpec& spec, double t0, double t1) {
  SobolSequence seq(3, spec.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<SimplexTriple> out;
  out.reserve(spec.n_times);
  const double span = t1 - t0;
  while (out.size() < spec.n_times) {
    auto u = seq.next();
    std::array<double, 3> v{u[0], u[1], u[2]};
    std::sort(v.begin(), v.end());
    if (v[0] < v[2]) out.emplace_back(t0 + v[0] * span, t0 + v[1] * span, t0 + v[2] * span);
  }
  return out;
}

Partition random_partition(std::mt19937_64& rng, double horizon, std::size_t interior) {
  std::vector<double> pts{0.0, horizon};
  while (pts.size() < interior + 2) {
    double u = unit_uniform(rng) * horizon;
    if (u > 0.0 && std::find(pts.begin(), pts.end(), u) == pts.end()) pts.push_back(u);
  }
  std::sort(pts.begin(), pts.end());
  return Partition(std::move(pts));
}

}  // namespace sewflow

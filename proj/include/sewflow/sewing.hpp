#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sewflow/almostflow.hpp"
#include "sewflow/errors.hpp"
#include "sewflow/parallel.hpp"
#include "sewflow/sampling.hpp"
#include "sewflow/statespace.hpp"
#include "sewflow/timegrid.hpp"

namespace sewflow {

/// One refinement level of a sewing run.
struct LevelRecord {
  std::size_t level = 0;
  std::size_t points = 0;
  double mesh = 0.0;
  double theta = 0.0;
  /// Normalised Cauchy gap to the previous level; NaN at level 0.
  double gap = std::numeric_limits<double>::quiet_NaN();
  /// sup d(phi^pi_{t,s}(a), phi_{t,s}(a)) / (N(a) varpi(omega_{s,t})).
  double bound_ratio = 0.0;
  /// sup N(phi^pi_{t,s}(a)) / N(a).
  double gauge_ratio = 0.0;
  /// Single-step evaluations of phi spent at this level.
  std::size_t evaluations = 0;
};

/// Sewing stopped because the gap grew over consecutive levels.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::vector<LevelRecord> history)
      : std::runtime_error(what), history_(std::move(history)) {}
  const std::vector<LevelRecord>& history() const { return history_; }

 private:
  std::vector<LevelRecord> history_;
};

struct SewSchedule {
  Partition base;
  /// Number of partitions examined, base included.
  std::size_t max_levels = 12;
  /// Convergence is not declared before this level.
  std::size_t min_levels = 1;
  double tolerance = 1e-6;
  SamplerSpec sampler;
  /// Exponent of Theta(pi); admissible default from the remainder when empty.
  std::optional<double> lambda;

  void check() const {
    if (max_levels < 1) throw InvalidArgument("schedule needs max_levels >= 1");
    if (!(tolerance > 0.0)) throw InvalidArgument("schedule needs tolerance > 0");
  }
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t levels = 0;
};

/// Least-squares fit of log(gap) against log(theta) over levels with positive gaps.
RateFit rate_fit(std::span<const LevelRecord> history);

/// Limit candidate psi^ = phi^{pi_final} with its refinement history.
template <MetricState State>
struct FlowApprox {
  AlmostFlow<State> source;
  Partition final_partition;
  std::vector<LevelRecord> history;
  bool converged = false;
  /// Slope of log(gap) against log(theta); NaN with fewer than 3 usable levels.
  double fitted_rate = std::numeric_limits<double>::quiet_NaN();
  double lambda = 0.0;
  SamplerSpec sampler;
  /// Sampled sup d(phi_{t,s}(a), a) / N(a) over the schedule's samples.
  double delta_hat = 0.0;
  std::vector<std::string> warnings;

  State operator()(double s, double t, const State& a) const { return iterate(source, final_partition, s, t, a); }

  double final_gap() const { return history.size() > 1 ? history.back().gap : std::numeric_limits<double>::quiet_NaN(); }
  /// Fitted uniform iterate bound over all levels of the run.
  double fitted_bound() const {
    double v = 0.0;
    for (const auto& h : history) v = std::max(v, h.bound_ratio);
    return v;
  }
  /// Fitted gauge growth over all levels of the run.
  double fitted_gauge_growth() const {
    double v = 0.0;
    for (const auto& h : history) v = std::max(v, h.gauge_ratio);
    return v;
  }
};

template <MetricState State>
RateFit rate_fit(const FlowApprox<State>& approx) {
  return rate_fit(std::span<const LevelRecord>(approx.history));
}

namespace detail {

/// Number of single steps iterate() takes for (s, t).
inline std::size_t step_count(const Partition& pi, double s, double t) {
  const auto pts = pi.points();
  const auto first = std::lower_bound(pts.begin(), pts.end(), s);
  const auto last = std::upper_bound(pts.begin(), pts.end(), t);
  if (first == last) return 1;
  std::size_t n = static_cast<std::size_t>(last - first) - 1;
  if (*first > s) ++n;
  if (*(last - 1) < t) ++n;
  return n;
}

template <MetricState State>
struct LevelEval {
  std::vector<State> values;
  double bound_ratio = 0.0;
  double gauge_ratio = 0.0;
  std::size_t evaluations = 0;
};

template <MetricState State>
LevelEval<State> eval_level(const AlmostFlow<State>& phi, const Partition& pi, const SampleSet<State>& samples,
                            const std::vector<State>& single) {
  using traits = state_traits<State>;
  const std::size_t ns = samples.states.size();
  const std::size_t n = samples.pairs.size() * ns;
  LevelEval<State> out;
  out.values.resize(n, phi.prototype);
  std::vector<double> bound(n), growth(n);
  std::vector<std::size_t> steps(n);
  parallel_for(n, [&](std::size_t k) {
    const auto [s, t] = samples.pairs[k / ns];
    const State& a = samples.states[k % ns];
    out.values[k] = iterate(phi, pi, s, t, a);
    const double na = phi.gauge(a);
    bound[k] = resolved_ratio(distance(out.values[k], single[k]), na * phi.remainder(s, t),
                              traits::norm(out.values[k]) + traits::norm(single[k]));
    growth[k] = phi.gauge(out.values[k]) / na;
    steps[k] = step_count(pi, s, t);
  });
  out.bound_ratio = *std::max_element(bound.begin(), bound.end());
  out.gauge_ratio = *std::max_element(growth.begin(), growth.end());
  for (auto v : steps) out.evaluations += v;
  return out;
}

template <MetricState State>
double level_gap(const AlmostFlow<State>& phi, const SampleSet<State>& samples, const std::vector<State>& coarse,
                 const std::vector<State>& fine, const Remainder& varpi_lambda) {
  using traits = state_traits<State>;
  const std::size_t ns = samples.states.size();
  double gap = 0.0;
  for (std::size_t k = 0; k < fine.size(); ++k) {
    const auto [s, t] = samples.pairs[k / ns];
    const State& a = samples.states[k % ns];
    const double r = resolved_ratio(distance(fine[k], coarse[k]), phi.gauge(a) * varpi_lambda(phi.omega(s, t)),
                                    traits::norm(fine[k]) + traits::norm(coarse[k]));
    gap = std::max(gap, r);
  }
  return gap;
}

template <MetricState State>
std::vector<State> single_steps(const AlmostFlow<State>& phi, const SampleSet<State>& samples) {
  const std::size_t ns = samples.states.size();
  std::vector<State> out(samples.pairs.size() * ns, phi.prototype);
  parallel_for(out.size(), [&](std::size_t k) {
    const auto [s, t] = samples.pairs[k / ns];
    out[k] = phi.evaluator(s, t, samples.states[k % ns]);
  });
  return out;
}

}  // namespace detail

/// sup over sampled (s, t, a) of d(phi^{fine}_{t,s}(a), phi^{coarse}_{t,s}(a)) / (N(a) varpi^lambda(omega_{s,t})).
template <MetricState State>
double cauchy_gap(const AlmostFlow<State>& phi, const Partition& coarse, const Partition& fine,
                  const SamplerSpec& sampler, std::optional<double> lambda = std::nullopt) {
  if (!fine.refines(coarse)) throw InvalidArgument("cauchy_gap needs nested partitions");
  const double lam = lambda.value_or(default_lambda(phi.varpi.kappa()));
  const auto vl = phi.varpi.pow(lam);
  const auto samples = detail::make_samples(phi.prototype, sampler, phi.horizon);
  const std::size_t ns = samples.states.size();
  std::vector<State> a(samples.pairs.size() * ns, phi.prototype), b = a;
  parallel_for(a.size(), [&](std::size_t k) {
    const auto [s, t] = samples.pairs[k / ns];
    a[k] = iterate(phi, coarse, s, t, samples.states[k % ns]);
    b[k] = iterate(phi, fine, s, t, samples.states[k % ns]);
  });
  return detail::level_gap(phi, samples, a, b, vl);
}

/// Dyadic refinement of the base until the sampled gap drops below tolerance.
///
/// Throws DivergenceError when the gap grows over three consecutive levels.
template <MetricState State>
FlowApprox<State> sew(const AlmostFlow<State>& phi, const SewSchedule& schedule) {
  using traits = state_traits<State>;
  schedule.check();
  if (schedule.base.front() != 0.0 || schedule.base.back() != phi.horizon) {
    throw InvalidArgument("base partition must span [0, T]");
  }
  const double lambda = schedule.lambda.value_or(default_lambda(phi.varpi.kappa()));
  const auto varpi_lambda = phi.varpi.pow(lambda);
  const auto samples = detail::make_samples(phi.prototype, schedule.sampler, phi.horizon);
  const auto single = detail::single_steps(phi, samples);

  FlowApprox<State> approx{phi, schedule.base, {}, false, std::numeric_limits<double>::quiet_NaN(),
                           lambda, schedule.sampler, 0.0, {}};
  const std::size_t ns = samples.states.size();
  for (std::size_t k = 0; k < single.size(); ++k) {
    const State& a = samples.states[k % ns];
    const double d = distance(single[k], a);
    if (!detail::below_noise(d, traits::norm(single[k]) + traits::norm(a))) {
      approx.delta_hat = std::max(approx.delta_hat, d / phi.gauge(a));
    }
  }
  const double kappa_lambda = varpi_lambda.kappa();
  if (kappa_lambda * (1.0 + approx.delta_hat) >= 1.0) {
    std::ostringstream msg;
    msg << "small-horizon condition kappa_lambda (1 + delta_T) < 1 fails with fitted delta_T = " << approx.delta_hat
        << " and kappa_lambda = " << kappa_lambda;
    approx.warnings.push_back(msg.str());
  }

  Partition pi = schedule.base;
  auto level = detail::eval_level(phi, pi, samples, single);
  approx.history.push_back({0, pi.size(), pi.mesh(), theta_stat(pi, phi.omega, phi.varpi, lambda),
                            std::numeric_limits<double>::quiet_NaN(), level.bound_ratio, level.gauge_ratio,
                            level.evaluations});
  std::size_t growing = 0;
  for (std::size_t k = 1; k < schedule.max_levels; ++k) {
    Partition finer = dyadic_refine(pi);
    auto next = detail::eval_level(phi, finer, samples, single);
    const double gap = detail::level_gap(phi, samples, level.values, next.values, varpi_lambda);
    pi = std::move(finer);
    level = std::move(next);
    approx.history.push_back({k, pi.size(), pi.mesh(), theta_stat(pi, phi.omega, phi.varpi, lambda), gap,
                              level.bound_ratio, level.gauge_ratio, level.evaluations});
    if (gap <= schedule.tolerance && k >= schedule.min_levels) {
      approx.converged = true;
      break;
    }
    if (k >= 2) {
      const double prev = approx.history[k - 1].gap;
      growing = gap > prev ? growing + 1 : 0;
      if (growing >= 3) {
        std::ostringstream msg;
        msg << "Cauchy gap grew over 3 consecutive levels, last gap " << gap;
        throw DivergenceError(msg.str(), approx.history);
      }
    }
  }
  approx.final_partition = pi;
  try {
    approx.fitted_rate = rate_fit(approx).slope;
  } catch (const InsufficientData&) {
  }
  return approx;
}

struct FlowPropertyReport {
  double max_defect = 0.0;
  std::optional<SimplexTriple> worst;
  /// max_defect / final Cauchy gap; NaN when the gap is 0 or absent.
  double gap_multiple = std::numeric_limits<double>::quiet_NaN();
};

/// max d(psi^_{t,s}(psi^_{s,r}(a)), psi^_{t,r}(a)) over the given triples and states.
template <MetricState State>
FlowPropertyReport flow_property_check(const FlowApprox<State>& approx, std::span<const SimplexTriple> triples,
                                       std::span<const State> states) {
  const std::size_t ns = states.size();
  const std::size_t n = triples.size() * ns;
  std::vector<double> defect(n);
  parallel_for(n, [&](std::size_t k) {
    const auto& tr = triples[k / ns];
    const State& a = states[k % ns];
    defect[k] = distance(approx(tr.s, tr.t, approx(tr.r, tr.s, a)), approx(tr.r, tr.t, a));
  });
  FlowPropertyReport out;
  detail::SupTracker sup;
  for (std::size_t k = 0; k < n; ++k) sup.offer(defect[k], k);
  out.max_defect = sup.value;
  if (sup.found()) out.worst = triples[sup.index / ns];
  const double gap = approx.final_gap();
  if (gap > 0.0) out.gap_multiple = out.max_defect / gap;
  return out;
}

struct UniquenessReport {
  /// Normalised distance between the final iterates of the two runs.
  double limit_distance = 0.0;
  /// Same distance at each common level.
  std::vector<double> per_level;
  /// Sampled galaxy distance of the inputs.
  GalaxyDistance inputs;
};

/// Sews phi and chi on the same schedule and measures
/// sup d(phi^{pi_k}_{t,s}(a), chi^{pi_k}_{t,s}(a)) / (N(a) varpi^lambda(omega_{s,t})) per level,
/// with phi's gauge, for every level up to max_levels.
template <MetricState State>
UniquenessReport uniqueness_crosscheck(const AlmostFlow<State>& phi, const AlmostFlow<State>& chi,
                                       const SewSchedule& schedule) {
  schedule.check();
  UniquenessReport out;
  out.inputs = galaxy_distance(phi, chi, schedule.sampler);
  if (out.inputs.infinite) throw InvalidArgument("uniqueness cross-check needs galaxy-equivalent almost flows");
  sew(phi, schedule);
  sew(chi, schedule);
  const double lambda = schedule.lambda.value_or(default_lambda(phi.varpi.kappa()));
  const auto vl = phi.varpi.pow(lambda);
  const auto samples = detail::make_samples(phi.prototype, schedule.sampler, phi.horizon);
  const std::size_t ns = samples.states.size();
  Partition pi = schedule.base;
  for (std::size_t k = 0; k < schedule.max_levels; ++k) {
    if (k > 0) pi = dyadic_refine(pi);
    std::vector<State> x(samples.pairs.size() * ns, phi.prototype), y = x;
    parallel_for(x.size(), [&](std::size_t i) {
      const auto [s, t] = samples.pairs[i / ns];
      x[i] = iterate(phi, pi, s, t, samples.states[i % ns]);
      y[i] = iterate(chi, pi, s, t, samples.states[i % ns]);
    });
    out.per_level.push_back(detail::level_gap(phi, samples, x, y, vl));
  }
  out.limit_distance = out.per_level.back();
  return out;
}

}  // namespace sewflow

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sewflow/errors.hpp"
#include "sewflow/parallel.hpp"
#include "sewflow/sampling.hpp"
#include "sewflow/statespace.hpp"
#include "sewflow/timegrid.hpp"

namespace sewflow {

/// Two-parameter family phi_{t,s}: V -> V with the bookkeeping needed to check
/// h0-h3. The time domain is [0, horizon].
template <MetricState State>
struct AlmostFlow {
  /// (s, t, a) -> phi_{t,s}(a).
  using Evaluator = std::function<State(double, double, const State&)>;

  Evaluator evaluator;
  GrowthGauge<State> gauge;
  /// delta_T as a function of the horizon T.
  std::function<double(double)> delta;
  /// eta as a function of omega values.
  std::function<double(double)> eta;
  Remainder varpi;
  Control omega;
  double horizon = 1.0;
  /// Shape template for sampled states.
  State prototype;

  double delta_T() const { return delta(horizon); }
  double remainder(double s, double t) const { return varpi(omega(s, t)); }
};

/// Where a worst ratio was attained. b is empty for single-state conditions.
struct Witness {
  double r = 0.0;
  double s = 0.0;
  double t = 0.0;
  std::vector<double> a;
  std::vector<double> b;
};

struct ConditionCheck {
  std::string name;
  double ratio = 0.0;
  /// Exact conditions pass only at ratio 0.
  bool exact = false;
  /// Informational conditions do not enter the overall verdict.
  bool gating = true;
  bool pass = true;
  std::optional<Witness> witness;
};

struct ValidationReport {
  std::vector<ConditionCheck> conditions;
  double tolerance = 0.0;
  std::map<std::string, double> fitted;
  std::map<std::string, double> declared;
  SamplerSpec sampler;
  bool pass = true;

  const ConditionCheck& at(const std::string& name) const {
    for (const auto& c : conditions)
      if (c.name == name) return c;
    throw InvalidArgument("no condition named " + name);
  }
};

namespace detail {

/// Absolute differences at rounding level are not resolvable.
inline bool below_noise(double d, double scale) {
  return d <= 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, scale);
}

/// d / denom with unresolvable d mapped to 0 and a zero denominator to +inf.
inline double resolved_ratio(double d, double denom, double scale) {
  if (below_noise(d, scale)) return 0.0;
  if (!(denom > 0.0)) return std::numeric_limits<double>::infinity();
  return d / denom;
}

inline void check_times(double s, double t, double horizon) {
  if (s > t) throw InvalidArgument("almost flow evaluated with s > t");
  if (s < 0.0 || t > horizon) throw InvalidArgument("time outside [0, T]");
}

/// Running maximum that keeps the first index attaining it.
struct SupTracker {
  double value = 0.0;
  std::size_t index = std::numeric_limits<std::size_t>::max();

  void offer(double v, std::size_t i) {
    if (v > value || (std::isnan(v) && !std::isnan(value))) {
      value = v;
      index = i;
    }
  }
  bool found() const { return index != std::numeric_limits<std::size_t>::max(); }
};

template <typename State>
struct SampleSet {
  std::vector<std::pair<double, double>> pairs;
  std::vector<SimplexTriple> triples;
  std::vector<State> states;
  /// Nearby partner b_i of states[i] for the Lipschitz-type conditions.
  std::vector<State> partners;
};

template <MetricState State>
SampleSet<State> make_samples(const State& prototype, const SamplerSpec& spec, double horizon) {
  using traits = state_traits<State>;
  if (spec.n_times == 0 || spec.n_states == 0) throw InvalidArgument("sampler needs a nonempty sample");
  SampleSet<State> out;
  out.pairs = sample_time_pairs(spec, 0.0, horizon);
  out.triples = sample_triples(spec, 0.0, horizon);
  std::mt19937_64 rng(spec.seed ^ 0x5deece66dULL);
  for (std::size_t i = 0; i < spec.n_states; ++i) {
    out.states.push_back(traits::random(prototype, rng, spec.state_lo, spec.state_hi));
  }
  for (std::size_t i = 0; i < spec.n_states; ++i) {
    State u = traits::random(prototype, rng, spec.state_lo, spec.state_hi);
    if constexpr (traits::additive) {
      // Separations spread over four decades so that the Hoelder term is probed.
      const double rho = std::pow(10.0, -4.0 * unit_uniform(rng));
      out.partners.push_back(traits::add(out.states[i], traits::scale(u, rho)));
    } else {
      out.partners.push_back(std::move(u));
    }
  }
  return out;
}

inline void finish_check(ConditionCheck& c, double tolerance) {
  c.pass = c.exact ? c.ratio == 0.0 : c.ratio <= 1.0 + tolerance;
}

}  // namespace detail

/// phi_{t,s}(a).
template <MetricState State>
State evaluate(const AlmostFlow<State>& phi, double s, double t, const State& a) {
  detail::check_times(s, t, phi.horizon);
  return phi.evaluator(s, t, a);
}

/// Iterated product phi^pi_{t,s}(a), composed left to right in increasing time.
///
/// Uses the largest grid interval [t_i, t_j] inside [s, t] and the single steps
/// phi_{t_i,s}, phi_{t,t_j} at the ends. Without a grid point in [s, t] this is
/// phi_{t,s}(a). Zero-length end steps are skipped.
template <MetricState State>
State iterate(const AlmostFlow<State>& phi, const Partition& pi, double s, double t, const State& a) {
  detail::check_times(s, t, phi.horizon);
  const auto pts = pi.points();
  const auto first = std::lower_bound(pts.begin(), pts.end(), s);
  const auto last = std::upper_bound(pts.begin(), pts.end(), t);
  if (first == last) return phi.evaluator(s, t, a);
  State x = a;
  double cur = s;
  for (auto it = first; it != last; ++it) {
    if (*it > cur) {
      x = phi.evaluator(cur, *it, x);
      cur = *it;
    }
  }
  if (t > cur) x = phi.evaluator(cur, t, x);
  return x;
}

/// d(phi_{t,s}(phi_{s,r}(a)), phi_{t,r}(a)).
template <MetricState State>
double flow_defect(const AlmostFlow<State>& phi, const SimplexTriple& tr, const State& a) {
  const State two = evaluate(phi, tr.s, tr.t, evaluate(phi, tr.r, tr.s, a));
  return distance(two, evaluate(phi, tr.r, tr.t, a));
}

/// Worst sampled ratios of h0-h3 against the declared gauge, delta_T, eta and varpi,
/// with fitted minimal constants. The eta constraint is reported but not gating.
template <MetricState State>
ValidationReport validate_almost_flow(const AlmostFlow<State>& phi, const SamplerSpec& sampler,
                                      double tolerance) {
  using traits = state_traits<State>;
  const auto samples = detail::make_samples(phi.prototype, sampler, phi.horizon);
  const double dT = phi.delta_T();
  const double gamma = phi.gauge.gamma;
  const std::size_t ns = samples.states.size();

  struct PairEval {
    double h0 = 0.0, h1 = 0.0, h2 = 0.0, h_eta = 0.0, gauge = 0.0;
    double delta_fit = 0.0, eta_fit = 0.0, delta_eta = 0.0;
  };
  const std::size_t np = samples.pairs.size() * ns;
  std::vector<PairEval> pe(np);
  parallel_for(np, [&](std::size_t k) {
    const auto [s, t] = samples.pairs[k / ns];
    const State& a = samples.states[k % ns];
    const State& b = samples.partners[k % ns];
    PairEval& out = pe[k];
    out.h0 = distance(phi.evaluator(t, t, a), a);
    const State pa = phi.evaluator(s, t, a);
    const State pb = phi.evaluator(s, t, b);
    const double na = phi.gauge(a);
    const double nb = phi.gauge(b);
    const double scale = traits::norm(pa) + traits::norm(a);
    const double d1 = distance(pa, a);
    out.h1 = detail::resolved_ratio(d1, dT * na, scale);
    out.delta_fit = detail::below_noise(d1, scale) ? 0.0 : d1 / na;
    const double dab = distance(a, b);
    const double w = phi.omega(s, t);
    const double et = phi.eta(w);
    const double d2 = distance(pa, pb);
    const double bound2 = (1.0 + dT) * dab + et * std::pow(dab, gamma);
    out.h2 = detail::resolved_ratio(d2, bound2, scale);
    if (dab > 0.0) out.eta_fit = std::max(0.0, d2 - (1.0 + dT) * dab) / std::pow(dab, gamma);
    const double vp = phi.varpi(w);
    if (vp > 0.0) {
      const double implied = et * std::pow(vp, gamma) / vp;
      out.delta_eta = implied;
      out.h_eta = implied == 0.0 ? 0.0 : (dT > 0.0 ? implied / dT : std::numeric_limits<double>::infinity());
    }
    if (phi.gauge.hoelder_const > 0.0 && dab > 0.0) {
      out.gauge = std::abs(na - nb) / (phi.gauge.hoelder_const * std::pow(dab, phi.gauge.gamma));
    } else if (std::abs(na - nb) > 0.0) {
      out.gauge = std::numeric_limits<double>::infinity();
    }
    if (!(na >= 1.0) || !(nb >= 1.0)) out.gauge = std::numeric_limits<double>::infinity();
  });

  const std::size_t nt = samples.triples.size() * ns;
  std::vector<double> h3(nt);
  std::vector<double> h3_fit(nt);
  parallel_for(nt, [&](std::size_t k) {
    const auto& tr = samples.triples[k / ns];
    const State& a = samples.states[k % ns];
    const State left = phi.evaluator(tr.s, tr.t, phi.evaluator(tr.r, tr.s, a));
    const State right = phi.evaluator(tr.r, tr.t, a);
    const double d = distance(left, right);
    const double scale = traits::norm(left) + traits::norm(right);
    const double na = phi.gauge(a);
    h3[k] = detail::resolved_ratio(d, na * phi.remainder(tr.r, tr.t), scale);
    h3_fit[k] = h3[k];
  });

  auto pair_witness = [&](std::size_t k, bool with_b) {
    Witness w;
    std::tie(w.s, w.t) = samples.pairs[k / ns];
    w.r = w.s;
    w.a = traits::flatten(samples.states[k % ns]);
    if (with_b) w.b = traits::flatten(samples.partners[k % ns]);
    return w;
  };

  ValidationReport report;
  report.tolerance = tolerance;
  report.sampler = sampler;
  struct Spec {
    const char* name;
    double PairEval::*field;
    bool exact;
    bool gating;
    bool with_b;
  };
  const Spec specs[] = {
      {"h0", &PairEval::h0, true, true, false},
      {"h1", &PairEval::h1, false, true, false},
      {"h2", &PairEval::h2, false, true, true},
      {"gauge", &PairEval::gauge, false, true, true},
      {"h_eta", &PairEval::h_eta, false, false, false},
  };
  for (const auto& sp : specs) {
    detail::SupTracker sup;
    for (std::size_t k = 0; k < np; ++k) sup.offer(pe[k].*sp.field, k);
    ConditionCheck c{sp.name, sup.value, sp.exact, sp.gating, true, std::nullopt};
    if (sup.found()) c.witness = pair_witness(sup.index, sp.with_b);
    detail::finish_check(c, tolerance);
    report.conditions.push_back(std::move(c));
  }
  {
    detail::SupTracker sup;
    for (std::size_t k = 0; k < nt; ++k) sup.offer(h3[k], k);
    ConditionCheck c{"h3", sup.value, false, true, true, std::nullopt};
    if (sup.found()) {
      const auto& tr = samples.triples[sup.index / ns];
      c.witness = Witness{tr.r, tr.s, tr.t, traits::flatten(samples.states[sup.index % ns]), {}};
    }
    detail::finish_check(c, tolerance);
    // Put h3 after h2 for readability.
    report.conditions.insert(report.conditions.begin() + 3, std::move(c));
  }
  double delta_hat = 0.0, eta_hat = 0.0, delta_eta = 0.0, defect_const = 0.0;
  for (const auto& e : pe) {
    delta_hat = std::max(delta_hat, e.delta_fit);
    eta_hat = std::max(eta_hat, e.eta_fit);
    delta_eta = std::max(delta_eta, e.delta_eta);
  }
  for (double v : h3_fit) defect_const = std::max(defect_const, v);
  report.fitted = {{"delta_T", delta_hat}, {"eta", eta_hat}, {"defect", defect_const}, {"delta_from_eta", delta_eta}};
  report.declared = {{"delta_T", dT}, {"gamma", gamma}, {"gauge_hoelder", phi.gauge.hoelder_const},
                     {"kappa", phi.varpi.kappa()}, {"horizon", phi.horizon}};
  for (const auto& c : report.conditions)
    if (c.gating && !c.pass) report.pass = false;
  return report;
}

/// Empirical galaxy distance, with a shrinking-scale probe for divergence.
struct GalaxyDistance {
  /// Sampled supremum, or the cap when divergence is detected.
  double value = 0.0;
  bool infinite = false;
  /// Log-log slope of the probe ratios against varpi(omega) at the witness.
  double divergence_slope = 0.0;
  std::optional<Witness> witness;
};

struct GalaxyOptions {
  double cap = 1e12;
  /// Halvings of t - s in the probe.
  int probe_depth = 40;
  /// Probe stops once varpi(omega) falls below this.
  double varpi_floor = 1e-9;
};

/// sup over sampled (s, t, a) of d(phi_{t,s}(a), psi_{t,s}(a)) / (N(a) varpi(omega_{s,t})),
/// measured with phi's gauge, omega and varpi.
template <MetricState State>
GalaxyDistance galaxy_distance(const AlmostFlow<State>& phi, const AlmostFlow<State>& psi,
                               const SamplerSpec& sampler, const GalaxyOptions& options = {}) {
  using traits = state_traits<State>;
  if (phi.horizon != psi.horizon) throw InvalidArgument("galaxy distance needs a common horizon");
  if (!traits::same_shape(phi.prototype, psi.prototype)) throw InvalidArgument("galaxy distance needs a common state space");
  const auto samples = detail::make_samples(phi.prototype, sampler, phi.horizon);
  const std::size_t ns = samples.states.size();
  const std::size_t n = samples.pairs.size() * ns;

  struct Probe {
    double sampled = 0.0;
    double smallest = 0.0;
    double largest = 0.0;
    double slope = 0.0;
    double t_small = 0.0;
    /// Largest ratio over the sample and the probe, and where it was attained.
    double peak = 0.0;
    double t_peak = 0.0;
    bool diverging = false;
  };
  std::vector<Probe> probes(n);
  parallel_for(n, [&](std::size_t k) {
    const auto [s, t] = samples.pairs[k / ns];
    const State& a = samples.states[k % ns];
    const double na = phi.gauge(a);
    auto ratio_at = [&](double tt) {
      const State x = phi.evaluator(s, tt, a);
      const State y = psi.evaluator(s, tt, a);
      return detail::resolved_ratio(distance(x, y), na * phi.remainder(s, tt),
                                    traits::norm(x) + traits::norm(y));
    };
    Probe& p = probes[k];
    p.sampled = ratio_at(t);
    p.peak = p.sampled;
    p.t_peak = t;
    std::vector<double> lx, ly;
    double tt = t;
    for (int j = 0; j <= options.probe_depth; ++j, tt = s + 0.5 * (tt - s)) {
      const double vp = phi.remainder(s, tt);
      if (!(vp >= options.varpi_floor) || !(tt > s)) break;
      const double r = ratio_at(tt);
      if (j == 0) p.largest = r;
      p.smallest = r;
      p.t_small = tt;
      if (std::isfinite(r) && r > p.peak) {
        p.peak = r;
        p.t_peak = tt;
      }
      if (r > 0.0 && std::isfinite(r)) {
        lx.push_back(std::log(vp));
        ly.push_back(std::log(r));
      }
      if (!std::isfinite(r) || r > options.cap) {
        p.diverging = true;
        break;
      }
    }
    if (!p.diverging && lx.size() >= 5) {
      const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(lx.size());
      const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(ly.size());
      double sxy = 0.0, sxx = 0.0;
      for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
      }
      p.slope = sxx > 0.0 ? sxy / sxx : 0.0;
      // Ratios growing like a negative power of varpi as the interval shrinks.
      p.diverging = p.slope < -0.25 && p.smallest > 10.0 * std::max(p.largest, 1e-300);
    }
  });

  GalaxyDistance out;
  detail::SupTracker sup;
  std::size_t div_index = n;
  for (std::size_t k = 0; k < n; ++k) {
    sup.offer(probes[k].peak, k);
    if (probes[k].diverging && div_index == n) div_index = k;
  }
  auto witness_at = [&](std::size_t k, double t) {
    Witness w;
    w.s = w.r = samples.pairs[k / ns].first;
    w.t = t;
    w.a = traits::flatten(samples.states[k % ns]);
    return w;
  };
  if (div_index < n) {
    out.infinite = true;
    out.value = options.cap;
    out.divergence_slope = probes[div_index].slope;
    out.witness = witness_at(div_index, probes[div_index].t_small);
  } else {
    out.value = sup.value;
    if (sup.found()) out.witness = witness_at(sup.index, probes[sup.index].t_peak);
  }
  return out;
}

/// Increment family epsilon_{t,s}(a) that keeps an almost flow in its galaxy.
template <MetricState State>
struct Perturbation {
  using Evaluator = std::function<State(double, double, const State&)>;

  Evaluator evaluator;
  double lambda_bound = 0.0;
  /// Hoelder modulus of a -> epsilon_{t,s}(a); empty means the base flow's eta.
  std::function<double(double)> eta;
  double gamma = 1.0;
};

/// psi = phi + epsilon. delta'_T = delta_T + lambda varpi(omega_{0,T}), eta' = eta_phi + eta_eps,
/// and the gauge is scaled by 1 + (1 + delta_T) lambda + 2 lambda^gamma delta_T + (K_T + 1) lambda,
/// with K_T = 1 + |N|_gamma delta_T^gamma bounding N(phi_{t,s}(a)) / N(a).
template <MetricState State>
AlmostFlow<State> perturb(const AlmostFlow<State>& phi, const Perturbation<State>& eps) {
  using traits = state_traits<State>;
  if constexpr (!traits::additive) {
    throw UnsupportedOperation("perturbation needs a state space with addition");
  } else {
    if (!(eps.lambda_bound >= 0.0)) throw InvalidArgument("perturbation bound must be >= 0");
    const double lambda = eps.lambda_bound;
    const double dT = phi.delta_T();
    const double gamma = phi.gauge.gamma;
    const double k_T = 1.0 + phi.gauge.hoelder_const * std::pow(dT, gamma);
    const double c3 = 1.0 + (1.0 + dT) * lambda + 2.0 * std::pow(lambda, gamma) * dT + (k_T + 1.0) * lambda;

    AlmostFlow<State> psi = phi;
    auto base = phi.evaluator;
    auto inc = eps.evaluator;
    psi.evaluator = [base, inc](double s, double t, const State& a) {
      return traits::add(base(s, t, a), inc(s, t, a));
    };
    auto gauge = phi.gauge.evaluator;
    psi.gauge = {[gauge, c3](const State& a) { return c3 * gauge(a); }, gamma, c3 * phi.gauge.hoelder_const};
    auto delta = phi.delta;
    auto varpi = phi.varpi;
    auto omega = phi.omega;
    psi.delta = [delta, varpi, omega, lambda](double T) { return delta(T) + lambda * varpi(omega(0.0, T)); };
    auto eta_phi = phi.eta;
    auto eta_eps = eps.eta ? eps.eta : phi.eta;
    psi.eta = [eta_phi, eta_eps](double w) { return eta_phi(w) + eta_eps(w); };
    return psi;
  }
}

/// Checks epsilon:1 (exact), epsilon:2 and epsilon:3, measured against the
/// omega, varpi and gauge of `context` (the flow being perturbed).
template <MetricState State>
ValidationReport validate_perturbation(const Perturbation<State>& eps, const AlmostFlow<State>& context,
                                       const SamplerSpec& sampler, double tolerance) {
  using traits = state_traits<State>;
  const auto samples = detail::make_samples(context.prototype, sampler, context.horizon);
  const std::size_t ns = samples.states.size();
  const std::size_t n = samples.pairs.size() * ns;
  const auto eta = eps.eta ? eps.eta : context.eta;
  struct Eval {
    double e1 = 0.0, e2 = 0.0, e3 = 0.0, lambda_fit = 0.0;
  };
  std::vector<Eval> ev(n);
  parallel_for(n, [&](std::size_t k) {
    const auto [s, t] = samples.pairs[k / ns];
    const State& a = samples.states[k % ns];
    const State& b = samples.partners[k % ns];
    Eval& out = ev[k];
    out.e1 = traits::norm(eps.evaluator(t, t, a));
    const State ea = eps.evaluator(s, t, a);
    const State eb = eps.evaluator(s, t, b);
    const double na = context.gauge(a);
    const double vp = context.remainder(s, t);
    const double mag = traits::norm(ea);
    const double scale = traits::norm(a) + mag;
    out.e2 = detail::resolved_ratio(mag, eps.lambda_bound * na * vp, scale);
    out.lambda_fit = detail::resolved_ratio(mag, na * vp, scale);
    const double dab = distance(a, b);
    const double de = distance(ea, eb);
    out.e3 = detail::resolved_ratio(de, eta(context.omega(s, t)) * std::pow(dab, eps.gamma),
                                    scale + traits::norm(eb));
  });
  ValidationReport report;
  report.tolerance = tolerance;
  report.sampler = sampler;
  struct Spec {
    const char* name;
    double Eval::*field;
    bool exact;
    bool with_b;
  };
  const Spec specs[] = {{"epsilon1", &Eval::e1, true, false},
                        {"epsilon2", &Eval::e2, false, false},
                        {"epsilon3", &Eval::e3, false, true}};
  for (const auto& sp : specs) {
    detail::SupTracker sup;
    for (std::size_t k = 0; k < n; ++k) sup.offer(ev[k].*sp.field, k);
    ConditionCheck c{sp.name, sup.value, sp.exact, true, true, std::nullopt};
    if (sup.found()) {
      Witness w;
      std::tie(w.s, w.t) = samples.pairs[sup.index / ns];
      w.r = w.s;
      w.a = traits::flatten(samples.states[sup.index % ns]);
      if (sp.with_b) w.b = traits::flatten(samples.partners[sup.index % ns]);
      c.witness = std::move(w);
    }
    detail::finish_check(c, tolerance);
    if (!c.pass) report.pass = false;
    report.conditions.push_back(std::move(c));
  }
  double lambda_hat = 0.0;
  for (const auto& e : ev) lambda_hat = std::max(lambda_hat, e.lambda_fit);
  report.fitted = {{"lambda", lambda_hat}};
  report.declared = {{"lambda", eps.lambda_bound}, {"gamma", eps.gamma}};
  return report;
}

/// Partition sweep of the uniform iterate bound and the gauge growth.
struct UniformBoundSweep {
  /// sup d(phi^pi_{t,s}(a), phi_{t,s}(a)) / (N(a) varpi(omega_{s,t})) per partition.
  std::vector<double> bound;
  /// sup N(phi^pi_{t,s}(a)) / N(a) per partition.
  std::vector<double> gauge_growth;

  double bound_max() const { return bound.empty() ? 0.0 : *std::max_element(bound.begin(), bound.end()); }
  double bound_min() const { return bound.empty() ? 0.0 : *std::min_element(bound.begin(), bound.end()); }
  double gauge_max() const {
    return gauge_growth.empty() ? 0.0 : *std::max_element(gauge_growth.begin(), gauge_growth.end());
  }
};

template <MetricState State>
UniformBoundSweep sweep_uniform_bound(const AlmostFlow<State>& phi, std::span<const Partition> partitions,
                                      const SamplerSpec& sampler) {
  using traits = state_traits<State>;
  const auto samples = detail::make_samples(phi.prototype, sampler, phi.horizon);
  const std::size_t ns = samples.states.size();
  const std::size_t n = samples.pairs.size() * ns;
  UniformBoundSweep out;
  for (const auto& pi : partitions) {
    std::vector<double> ratio(n), growth(n);
    parallel_for(n, [&](std::size_t k) {
      const auto [s, t] = samples.pairs[k / ns];
      const State& a = samples.states[k % ns];
      const State x = iterate(phi, pi, s, t, a);
      const State y = phi.evaluator(s, t, a);
      const double na = phi.gauge(a);
      ratio[k] = detail::resolved_ratio(distance(x, y), na * phi.remainder(s, t), traits::norm(x) + traits::norm(y));
      growth[k] = phi.gauge(x) / na;
    });
    out.bound.push_back(*std::max_element(ratio.begin(), ratio.end()));
    out.gauge_growth.push_back(*std::max_element(growth.begin(), growth.end()));
  }
  return out;
}

}  // namespace sewflow

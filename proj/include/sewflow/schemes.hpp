#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sewflow/almostflow.hpp"
#include "sewflow/errors.hpp"
#include "sewflow/sampling.hpp"
#include "sewflow/statespace.hpp"
#include "sewflow/timegrid.hpp"

namespace sewflow {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Additive and multiplicative functionals

/// alpha_{s,t} with declared omega and varpi on [0, horizon].
template <AdditiveState State>
struct AdditiveFunctional {
  std::function<State(double, double)> evaluator;
  Control omega;
  Remainder varpi;
  /// Bound on |alpha_{s,t}| over the domain, used as delta_T.
  double bound = 0.0;
  double horizon = 1.0;
  State prototype;
};

/// max over triples of |alpha_{r,s} + alpha_{s,t} - alpha_{r,t}| / varpi(omega_{r,t}).
template <AdditiveState State>
double validate_additive(const AdditiveFunctional<State>& alpha, std::span<const SimplexTriple> triples) {
  using traits = state_traits<State>;
  double worst = 0.0;
  for (const auto& tr : triples) {
    const State sum = traits::add(alpha.evaluator(tr.r, tr.s), alpha.evaluator(tr.s, tr.t));
    const State whole = alpha.evaluator(tr.r, tr.t);
    const double d = distance(sum, whole);
    worst = std::max(worst, detail::resolved_ratio(d, alpha.varpi(alpha.omega(tr.r, tr.t)),
                                                   traits::norm(sum) + traits::norm(whole)));
  }
  return worst;
}

/// phi_{t,s}(a) = a + alpha_{s,t}, with N = 1 and eta = 0.
template <AdditiveState State>
AlmostFlow<State> additive_flow(const AdditiveFunctional<State>& alpha) {
  using traits = state_traits<State>;
  if (!traits::same_shape(alpha.evaluator(0.0, alpha.horizon), alpha.prototype)) {
    throw InvalidArgument("additive functional does not match the state shape");
  }
  auto ev = alpha.evaluator;
  const double bound = alpha.bound;
  return AlmostFlow<State>{
      [ev](double s, double t, const State& a) { return traits::add(a, ev(s, t)); },
      GrowthGauge<State>::constant(1.0),
      [bound](double) { return bound; },
      [](double) { return 0.0; },
      alpha.varpi,
      alpha.omega,
      alpha.horizon,
      alpha.prototype};
}

/// alpha_{s,t} in an algebra, with alpha_{s,s} = unit.
template <AlgebraState State>
struct MultiplicativeFunctional {
  std::function<State(double, double)> evaluator;
  Control omega;
  Remainder varpi;
  /// Bound on |alpha_{s,t} - 1| over the domain, used as delta_T.
  double delta = 0.0;
  double horizon = 1.0;
  State unit;
};

struct MultiplicativeCheck {
  double defect_ratio = 0.0;
  double unit_defect = 0.0;
};

/// Almost-multiplicativity ratio and |alpha_{s,s} - 1| over the triples.
template <AlgebraState State>
MultiplicativeCheck validate_multiplicative(const MultiplicativeFunctional<State>& alpha,
                                            std::span<const SimplexTriple> triples) {
  using traits = state_traits<State>;
  MultiplicativeCheck out;
  for (const auto& tr : triples) {
    const State prod = traits::mul(alpha.evaluator(tr.r, tr.s), alpha.evaluator(tr.s, tr.t));
    const State whole = alpha.evaluator(tr.r, tr.t);
    out.defect_ratio = std::max(out.defect_ratio,
                                detail::resolved_ratio(distance(prod, whole), alpha.varpi(alpha.omega(tr.r, tr.t)),
                                                       traits::norm(prod) + traits::norm(whole)));
    out.unit_defect = std::max(out.unit_defect, distance(alpha.evaluator(tr.s, tr.s), alpha.unit));
  }
  return out;
}

/// phi_{t,s}(a) = a alpha_{s,t}, with N(a) = max(|a|, 1) and eta = 0.
template <AlgebraState State>
AlmostFlow<State> multiplicative_flow(const MultiplicativeFunctional<State>& alpha) {
  using traits = state_traits<State>;
  const State probe = alpha.evaluator(0.0, alpha.horizon);
  if (!traits::same_shape(probe, alpha.unit) || !traits::same_shape(traits::unit(alpha.unit), alpha.unit)) {
    throw InvalidArgument("multiplicative functional does not live in the declared algebra");
  }
  auto ev = alpha.evaluator;
  const double delta = alpha.delta;
  return AlmostFlow<State>{
      [ev](double s, double t, const State& a) { return traits::mul(a, ev(s, t)); },
      GrowthGauge<State>{[](const State& a) { return std::max(traits::norm(a), 1.0); }, 1.0, 1.0},
      [delta](double) { return delta; },
      [](double) { return 0.0; },
      alpha.varpi,
      alpha.omega,
      alpha.horizon,
      alpha.unit};
}

/// Smallest c with defect(r, s, t) <= (c (t - r))^theta on the uniform grid of
/// n + 1 points of [0, horizon], times `safety`.
double fit_linear_control(const std::function<double(double, double, double)>& defect, double theta,
                          double horizon, std::size_t n, double safety = 1.25);

// ---------------------------------------------------------------------------
// Paths

/// Sampled path t_i -> x_i (one row per sample), linearly interpolated.
class DiscretePath {
 public:
  DiscretePath(std::vector<double> times, MatrixXd values);

  int dim() const { return static_cast<int>(values_.cols()); }
  std::size_t size() const { return times_.size(); }
  const std::vector<double>& times() const { return times_; }
  const MatrixXd& values() const { return values_; }
  double horizon() const { return times_.back(); }

  VectorXd value(double t) const;
  VectorXd increment(double s, double t) const;

 private:
  std::vector<double> times_;
  MatrixXd values_;
};

/// Samples `fn` at n + 1 uniform times on [0, horizon].
DiscretePath sample_path(const std::function<VectorXd(double)>& fn, double horizon, std::size_t n);

/// Smooth path t -> x_t on [0, horizon], with an optional exact derivative.
struct SmoothPath {
  int dim = 1;
  double horizon = 1.0;
  std::function<VectorXd(double)> x;
  std::function<VectorXd(double)> dx;
};

/// Level-2 rough path over U = R^dim on [0, horizon].
///
/// x1 is measured in the l1 norm and x2 in the entrywise l1 norm.
struct RoughPath2 {
  int dim = 1;
  double p = 2.0;
  double horizon = 1.0;
  Control omega = control_linear(1.0);
  std::function<VectorXd(double, double)> x1;
  std::function<MatrixXd(double, double)> x2;
  /// sup |x1_{s,t}| / omega^{1/p} and sup |x2_{s,t}| / omega^{2/p}.
  double norm1 = 0.0;
  double norm2 = 0.0;
};

/// Lift by composite trapezoid quadrature of x (x) dx on `grid` refined
/// `quad_refine` times. With an exact derivative the panel rule is
/// h/2 (x_a (x) x'_a + x_b (x) x'_b); without, it is the secant rule
/// (x_a + x_b)/2 (x) (x_b - x_a). omega is linear with c = 1.
RoughPath2 lift_smooth(const SmoothPath& path, const Partition& grid, int quad_refine, double p = 2.0);

/// Exact lift of the piecewise-linear interpolant of a discrete path. omega is the
/// exact p-variation of the samples (cubic in the sample count); norm2 is the sup over sample pairs.
RoughPath2 lift_discrete(const DiscretePath& path, double p = 2.0);

/// x1 = 0, x2_{s,t} = scale (t - s) A for antisymmetric A.
RoughPath2 pure_area(const MatrixXd& A, double scale, double horizon = 1.0, double p = 2.0);

/// max over triples of |x2_{r,t} - x2_{r,s} - x2_{s,t} - x1_{r,s} (x) x1_{s,t}|.
double chen_defect(const RoughPath2& X, std::span<const SimplexTriple> triples);

/// Copy of X with x2 scaled, for corruption tests.
RoughPath2 scale_area(const RoughPath2& X, double factor);

/// Copy of X with x2_{s,t} + (t - s) A added, A antisymmetric.
RoughPath2 add_area(const RoughPath2& X, const MatrixXd& A);

// ---------------------------------------------------------------------------
// Signatures

struct SignatureOptions {
  /// Dyadic levels of [0, T], level 0 being {0, T}.
  std::size_t max_levels = 21;
  /// Stop once the level-over-level change is at most this.
  double tolerance = 1e-12;
  /// Allowed Chen defect, relative to max(1, |x2_{0,T}|).
  double chen_tolerance = 1e-9;
  SamplerSpec chen_sampler{20240607, 64, 1, -1.0, 1.0};
};

struct SignatureResult {
  TensorElement<double> signature;
  std::vector<double> level_changes;
  std::size_t levels = 0;
  double chen_defect = 0.0;
};

/// 1 + x1_{s,t} + x2_{s,t} embedded in T_k.
TensorElement<double> truncated_increment(const RoughPath2& X, int k, double s, double t);

/// Level-k signature on [0, T] by multiplicative sewing of 1 + x1 + x2 in T_k.
SignatureResult signature(const RoughPath2& X, int k, const SignatureOptions& options = {});

// ---------------------------------------------------------------------------
// Vector fields

/// f: R^m -> L(R^d, R^m) as an m x d matrix per state, with declared bounds.
///
/// |f(a)| is the max absolute entry (operator norm from l1 to max-norm);
/// |df| is the sup over columns j of the induced max-norm of Df_j.
struct VectorField {
  std::string name;
  int state_dim = 1;
  int driver_dim = 1;
  std::function<MatrixXd(const VectorXd&)> f;
  /// df(a)[j] is the m x m Jacobian of column j; may be empty.
  std::function<std::vector<MatrixXd>(const VectorXd&)> df;
  double gamma = 1.0;
  double sup_f = 0.0;
  double sup_df = 0.0;
  /// gamma-Hoelder constant of f.
  double hoelder_f = 0.0;
  /// gamma-Hoelder constant of df.
  double hoelder_df = 0.0;
};

/// Central differences, step 1e-5 max(1, |a|) per coordinate.
std::vector<MatrixXd> finite_difference_jacobian(const VectorField& field, const VectorXd& a);

/// Fills df by finite differences when absent.
VectorField with_finite_difference_df(VectorField field);

/// Max relative mismatch |df - df_fd| / max(1, |df|) over the states.
double check_jacobian(const VectorField& field, std::span<const VectorXd> states);

/// Sum_{ij} m_{ij} Df_j(a) f_i(a).
VectorXd area_drift(const VectorField& field, const VectorXd& a, const MatrixXd& m);

VectorField field_zero(int state_dim, int driver_dim);
/// Column j of f(a) is A_j a; bounds declared on the ball |a| <= radius.
VectorField field_linear(std::vector<MatrixXd> A, double radius = 10.0);
/// f(a) = a for m = d = 1.
VectorField field_scalar_exponential(double radius = 10.0);
/// f(a) = J a with J the rotation generator, m = 2, d = 1.
VectorField field_rotation(double radius = 10.0);
/// f(a) = sin(a), m = d = 1.
VectorField field_sine();
/// Bounded C^2 field on R^2 driven by R^2:
/// f_1(y) = (cos y2, 0), f_2(y) = (0, sin y1). The bracket [f_1, f_2] is
/// (sin y1 sin y2, cos y1 cos y2), so pure-area drivers give a non-trivial flow.
VectorField field_trig();

// ---------------------------------------------------------------------------
// Davie schemes

/// phi_{t,s}(a) = a + f(a) x_{s,t}, omega = p-variation of x, varpi = delta^{(1+gamma)/p}.
AlmostFlow<VectorXd> young_flow(const VectorField& f, const DiscretePath& x, double p);

/// phi_{t,s}(a) = a + f(a) x1_{s,t} + df(a) f(a) x2_{s,t}, varpi = delta^{(2+gamma)/p}.
AlmostFlow<VectorXd> rough_flow(const VectorField& f, const RoughPath2& X);

/// sup over sample pairs of |x_j - x_i|_1 / omega_{ij}^{1/p}.
double path_pnorm(const DiscretePath& x, const Control& omega, double p);

}  // namespace sewflow

#include "sewflow/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

namespace sewflow {

double fit_linear_control(const std::function<double(double, double, double)>& defect, double theta,
                          double horizon, std::size_t n, double safety) {
  if (n < 2) throw InvalidArgument("control fit needs n >= 2");
  double c = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    for (std::size_t k = i + 1; k <= n; ++k) {
      const double r = horizon * static_cast<double>(i) / static_cast<double>(n);
      const double t = horizon * static_cast<double>(k) / static_cast<double>(n);
      for (std::size_t j = i; j <= k; ++j) {
        const double s = horizon * static_cast<double>(j) / static_cast<double>(n);
        c = std::max(c, std::pow(defect(r, s, t), 1.0 / theta) / (t - r));
      }
    }
  }
  return c * safety;
}

// ---------------------------------------------------------------------------

DiscretePath::DiscretePath(std::vector<double> times, MatrixXd values)
    : times_(std::move(times)), values_(std::move(values)) {
  if (times_.size() < 2) throw InvalidArgument("discrete path needs at least 2 samples");
  if (static_cast<std::size_t>(values_.rows()) != times_.size()) {
    throw InvalidArgument("discrete path needs one value row per sample time");
  }
  if (values_.cols() < 1) throw InvalidArgument("discrete path needs dimension >= 1");
  static_cast<void>(Partition{times_});
  if (!values_.allFinite()) throw InvalidArgument("discrete path values must be finite");
}

VectorXd DiscretePath::value(double t) const {
  if (t < times_.front() || t > times_.back()) throw InvalidArgument("path evaluated outside its time range");
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - times_.begin()) - 1;
  if (times_[i] == t || i + 1 == times_.size()) return values_.row(static_cast<Eigen::Index>(i)).transpose();
  const double w = (t - times_[i]) / (times_[i + 1] - times_[i]);
  const auto a = values_.row(static_cast<Eigen::Index>(i)).transpose();
  const auto b = values_.row(static_cast<Eigen::Index>(i + 1)).transpose();
  return a + w * (b - a);
}

VectorXd DiscretePath::increment(double s, double t) const {
  if (s == t) return VectorXd::Zero(values_.cols());
  return value(t) - value(s);
}

DiscretePath sample_path(const std::function<VectorXd(double)>& fn, double horizon, std::size_t n) {
  const auto grid = uniform_partition(horizon, n);
  std::vector<double> times(grid.points().begin(), grid.points().end());
  const VectorXd first = fn(times.front());
  MatrixXd values(static_cast<Eigen::Index>(times.size()), first.size());
  for (std::size_t i = 0; i < times.size(); ++i) values.row(static_cast<Eigen::Index>(i)) = fn(times[i]).transpose();
  return DiscretePath(std::move(times), std::move(values));
}

// ---------------------------------------------------------------------------

namespace {

/// Prefix table I(t_k) = int_0^{t_k} x (x) dx on panel knots.
struct LiftTable {
  std::vector<double> knots;
  std::vector<VectorXd> x;
  std::vector<VectorXd> dx;
  std::vector<MatrixXd> prefix;
  std::function<VectorXd(double)> path;
  std::function<VectorXd(double)> deriv;

  std::size_t panel(double u) const {
    if (u < knots.front() || u > knots.back()) throw InvalidArgument("rough path evaluated outside [0, T]");
    const auto it = std::upper_bound(knots.begin(), knots.end(), u);
    return static_cast<std::size_t>(it - knots.begin()) - 1;
  }
  VectorXd position(double u) const {
    const std::size_t k = panel(u);
    return knots[k] == u ? x[k] : path(u);
  }
  MatrixXd panel_integral(std::size_t k, double u, const VectorXd& xu) const {
    if (deriv) return 0.5 * (u - knots[k]) * (x[k] * dx[k].transpose() + xu * deriv(u).transpose());
    return 0.5 * (x[k] + xu) * (xu - x[k]).transpose();
  }
  MatrixXd integral(double u, const VectorXd& xu) const {
    const std::size_t k = panel(u);
    if (knots[k] == u) return prefix[k];
    return prefix[k] + panel_integral(k, u, xu);
  }
};

RoughPath2 from_table(std::shared_ptr<LiftTable> table, int dim, double p) {
  RoughPath2 X;
  X.dim = dim;
  X.p = p;
  X.horizon = table->knots.back();
  X.omega = control_linear(1.0);
  X.x1 = [table](double s, double t) -> VectorXd {
    if (s == t) return VectorXd::Zero(table->x.front().size());
    return table->position(t) - table->position(s);
  };
  X.x2 = [table](double s, double t) -> MatrixXd {
    const auto d = table->x.front().size();
    if (s == t) return MatrixXd::Zero(d, d);
    const VectorXd xs = table->position(s);
    const VectorXd xt = table->position(t);
    return table->integral(t, xt) - table->integral(s, xs) - xs * (xt - xs).transpose();
  };
  double slope = 0.0;
  for (std::size_t k = 0; k + 1 < table->knots.size(); ++k) {
    slope = std::max(slope, (table->x[k + 1] - table->x[k]).lpNorm<1>() / (table->knots[k + 1] - table->knots[k]));
  }
  for (const auto& v : table->dx) slope = std::max(slope, v.lpNorm<1>());
  const double T = X.horizon;
  X.norm1 = slope * std::pow(T, 1.0 - 1.0 / p);
  X.norm2 = 0.5 * slope * slope * std::pow(T, 2.0 - 2.0 / p);
  return X;
}

void check_p(double p) {
  if (!(p >= 1.0 && p < 3.0)) throw InvalidArgument("rough path regularity p must lie in [1, 3)");
}

}  // namespace

RoughPath2 lift_smooth(const SmoothPath& path, const Partition& grid, int quad_refine, double p) {
  check_p(p);
  if (grid.size() < 2) throw InvalidArgument("lift needs at least 2 samples");
  if (quad_refine < 1) throw InvalidArgument("lift needs quad_refine >= 1");
  if (grid.front() != 0.0 || grid.back() != path.horizon) throw InvalidArgument("lift grid must span [0, T]");
  if (!path.x) throw InvalidArgument("smooth path has no evaluator");
  Partition panels = grid;
  for (int i = 0; i < quad_refine; ++i) panels = dyadic_refine(panels);

  auto table = std::make_shared<LiftTable>();
  table->knots.assign(panels.points().begin(), panels.points().end());
  table->path = path.x;
  table->deriv = path.dx;
  for (double u : table->knots) {
    table->x.push_back(path.x(u));
    if (path.dx) table->dx.push_back(path.dx(u));
  }
  const auto d = table->x.front().size();
  if (d != path.dim) throw InvalidArgument("smooth path dimension does not match its values");
  table->prefix.push_back(MatrixXd::Zero(d, d));
  for (std::size_t k = 0; k + 1 < table->knots.size(); ++k) {
    table->prefix.push_back(table->prefix.back() + table->panel_integral(k, table->knots[k + 1], table->x[k + 1]));
  }
  return from_table(std::move(table), path.dim, p);
}

RoughPath2 lift_discrete(const DiscretePath& path, double p) {
  check_p(p);
  if (path.times().front() != 0.0) throw InvalidArgument("lift needs a path starting at time 0");
  auto shared = std::make_shared<DiscretePath>(path);
  auto table = std::make_shared<LiftTable>();
  table->knots = path.times();
  table->path = [shared](double u) { return shared->value(u); };
  for (std::size_t k = 0; k < path.size(); ++k) table->x.push_back(path.values().row(static_cast<Eigen::Index>(k)).transpose());
  const auto d = path.values().cols();
  table->prefix.push_back(MatrixXd::Zero(d, d));
  for (std::size_t k = 0; k + 1 < table->knots.size(); ++k) {
    table->prefix.push_back(table->prefix.back() + table->panel_integral(k, table->knots[k + 1], table->x[k + 1]));
  }
  RoughPath2 X = from_table(table, path.dim(), p);
  // Slope bounds are vacuous for rough samples; fit against the exact p-variation instead.
  X.omega = control_pvar(path.times(), path.values(), p);
  X.norm1 = path_pnorm(path, X.omega, p);
  const std::size_t n = table->knots.size();
  double norm2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const MatrixXd x2 = table->prefix[j] - table->prefix[i] - table->x[i] * (table->x[j] - table->x[i]).transpose();
      const double w = X.omega(table->knots[i], table->knots[j]);
      const double mag = x2.cwiseAbs().sum();
      if (mag > 0.0) norm2 = std::max(norm2, w > 0.0 ? mag / std::pow(w, 2.0 / p) : HUGE_VAL);
    }
  }
  X.norm2 = norm2;
  return X;
}

RoughPath2 pure_area(const MatrixXd& A, double scale, double horizon, double p) {
  check_p(p);
  if (A.rows() != A.cols() || A.rows() < 1) throw InvalidArgument("area matrix must be square");
  if ((A + A.transpose()).cwiseAbs().maxCoeff() != 0.0) throw InvalidArgument("area matrix must be antisymmetric");
  if (!(horizon > 0.0)) throw InvalidArgument("horizon must be positive");
  RoughPath2 X;
  X.dim = static_cast<int>(A.rows());
  X.p = p;
  X.horizon = horizon;
  X.omega = control_linear(1.0);
  const MatrixXd area = scale * A;
  const auto d = A.rows();
  X.x1 = [d](double, double) -> VectorXd { return VectorXd::Zero(d); };
  X.x2 = [area](double s, double t) -> MatrixXd { return (t - s) * area; };
  X.norm1 = 0.0;
  X.norm2 = area.cwiseAbs().sum() * std::pow(horizon, 1.0 - 2.0 / p);
  return X;
}

double chen_defect(const RoughPath2& X, std::span<const SimplexTriple> triples) {
  if (triples.empty()) throw InvalidArgument("chen_defect needs a nonempty sample");
  double worst = 0.0;
  for (const auto& tr : triples) {
    const MatrixXd gap = X.x2(tr.r, tr.t) - X.x2(tr.r, tr.s) - X.x2(tr.s, tr.t) -
                         X.x1(tr.r, tr.s) * X.x1(tr.s, tr.t).transpose();
    worst = std::max(worst, gap.cwiseAbs().sum());
  }
  return worst;
}

RoughPath2 scale_area(const RoughPath2& X, double factor) {
  RoughPath2 out = X;
  auto x2 = X.x2;
  out.x2 = [x2, factor](double s, double t) -> MatrixXd { return factor * x2(s, t); };
  out.norm2 = std::abs(factor) * X.norm2;
  return out;
}

RoughPath2 add_area(const RoughPath2& X, const MatrixXd& A) {
  if (A.rows() != X.dim || A.cols() != X.dim) throw InvalidArgument("area matrix has the wrong dimension");
  if ((A + A.transpose()).cwiseAbs().maxCoeff() != 0.0) throw InvalidArgument("area matrix must be antisymmetric");
  RoughPath2 out = X;
  auto x2 = X.x2;
  out.x2 = [x2, A](double s, double t) -> MatrixXd { return x2(s, t) + (t - s) * A; };
  out.norm2 = X.norm2 + A.cwiseAbs().sum() * std::pow(X.horizon, 1.0 - 2.0 / X.p);
  return out;
}

// ---------------------------------------------------------------------------

TensorElement<double> truncated_increment(const RoughPath2& X, int k, double s, double t) {
  auto out = TensorElement<double>::unit(X.dim, k);
  if (k >= 1) out.block(1) = X.x1(s, t);
  if (k >= 2) {
    const MatrixXd x2 = X.x2(s, t);
    auto& b = out.block(2);
    for (int i = 0; i < X.dim; ++i)
      for (int j = 0; j < X.dim; ++j) b(i * X.dim + j) = x2(i, j);
  }
  return out;
}

SignatureResult signature(const RoughPath2& X, int k, const SignatureOptions& options) {
  if (k < 2) throw InvalidArgument("signature needs level k >= 2");
  if (options.max_levels < 1) throw InvalidArgument("signature needs max_levels >= 1");
  const double T = X.horizon;
  SignatureResult out;
  const auto triples = sample_triples(options.chen_sampler, 0.0, T);
  out.chen_defect = chen_defect(X, triples);
  const double scale = std::max(1.0, X.x2(0.0, T).cwiseAbs().sum());
  if (!(out.chen_defect <= options.chen_tolerance * scale)) {
    std::ostringstream msg;
    msg << "Chen relation violated: defect " << out.chen_defect;
    throw InvalidArgument(msg.str());
  }
  const double w = X.omega(0.0, T);
  MultiplicativeFunctional<TensorElement<double>> alpha{
      [X, k](double s, double t) { return truncated_increment(X, k, s, t); },
      X.omega,
      remainder_power(3.0 / X.p),
      X.norm1 * std::pow(w, 1.0 / X.p) + X.norm2 * std::pow(w, 2.0 / X.p),
      T,
      TensorElement<double>::unit(X.dim, k)};
  const auto flow = multiplicative_flow(alpha);
  Partition pi({0.0, T});
  TensorElement<double> prev;
  for (std::size_t level = 0; level < options.max_levels; ++level) {
    if (level > 0) pi = dyadic_refine(pi);
    auto sig = iterate(flow, pi, 0.0, T, alpha.unit);
    out.levels = level + 1;
    if (level > 0) {
      const double change = (sig - prev).norm();
      out.level_changes.push_back(change);
      prev = std::move(sig);
      if (change <= options.tolerance) break;
    } else {
      prev = std::move(sig);
    }
  }
  out.signature = std::move(prev);
  return out;
}

// ---------------------------------------------------------------------------

std::vector<MatrixXd> finite_difference_jacobian(const VectorField& field, const VectorXd& a) {
  const auto m = a.size();
  const double h = 1e-5 * std::max(1.0, a.lpNorm<Eigen::Infinity>());
  std::vector<MatrixXd> out(static_cast<std::size_t>(field.driver_dim), MatrixXd::Zero(m, m));
  for (Eigen::Index l = 0; l < m; ++l) {
    VectorXd up = a, down = a;
    up(l) += h;
    down(l) -= h;
    const MatrixXd diff = (field.f(up) - field.f(down)) / (2.0 * h);
    for (int j = 0; j < field.driver_dim; ++j) out[static_cast<std::size_t>(j)].col(l) = diff.col(j);
  }
  return out;
}

VectorField with_finite_difference_df(VectorField field) {
  if (!field.df) {
    auto copy = std::make_shared<VectorField>(field);
    field.df = [copy](const VectorXd& a) { return finite_difference_jacobian(*copy, a); };
  }
  return field;
}

double check_jacobian(const VectorField& field, std::span<const VectorXd> states) {
  if (!field.df) throw InvalidArgument("field has no derivative to check");
  double worst = 0.0;
  for (const auto& a : states) {
    const auto exact = field.df(a);
    const auto approx = finite_difference_jacobian(field, a);
    for (std::size_t j = 0; j < exact.size(); ++j) {
      const double scale = std::max(1.0, exact[j].cwiseAbs().maxCoeff());
      worst = std::max(worst, (exact[j] - approx[j]).cwiseAbs().maxCoeff() / scale);
    }
  }
  return worst;
}

VectorXd area_drift(const VectorField& field, const VectorXd& a, const MatrixXd& m) {
  const MatrixXd fa = field.f(a);
  const auto df = field.df(a);
  VectorXd out = VectorXd::Zero(a.size());
  for (int j = 0; j < field.driver_dim; ++j) {
    VectorXd v = VectorXd::Zero(a.size());
    for (int i = 0; i < field.driver_dim; ++i) {
      if (m(i, j) != 0.0) v += m(i, j) * fa.col(i);
    }
    out += df[static_cast<std::size_t>(j)] * v;
  }
  return out;
}

namespace {

double induced_inf(const MatrixXd& a) { return a.rows() == 0 ? 0.0 : a.cwiseAbs().rowwise().sum().maxCoeff(); }

}  // namespace

VectorField field_zero(int state_dim, int driver_dim) {
  if (state_dim < 1 || driver_dim < 1) throw InvalidArgument("field dimensions must be >= 1");
  VectorField f;
  f.name = "zero";
  f.state_dim = state_dim;
  f.driver_dim = driver_dim;
  f.f = [state_dim, driver_dim](const VectorXd&) -> MatrixXd { return MatrixXd::Zero(state_dim, driver_dim); };
  f.df = [state_dim, driver_dim](const VectorXd&) {
    return std::vector<MatrixXd>(static_cast<std::size_t>(driver_dim), MatrixXd::Zero(state_dim, state_dim));
  };
  return f;
}

VectorField field_linear(std::vector<MatrixXd> A, double radius) {
  if (A.empty()) throw InvalidArgument("linear field needs at least one matrix");
  const auto m = A.front().rows();
  for (const auto& a : A)
    if (a.rows() != m || a.cols() != m) throw InvalidArgument("linear field matrices must be square and equal size");
  if (!(radius > 0.0)) throw InvalidArgument("linear field radius must be positive");
  VectorField f;
  f.name = "linear";
  f.state_dim = static_cast<int>(m);
  f.driver_dim = static_cast<int>(A.size());
  double norm = 0.0;
  for (const auto& a : A) norm = std::max(norm, induced_inf(a));
  auto shared = std::make_shared<const std::vector<MatrixXd>>(std::move(A));
  f.f = [shared](const VectorXd& a) -> MatrixXd {
    MatrixXd out(a.size(), static_cast<Eigen::Index>(shared->size()));
    for (std::size_t j = 0; j < shared->size(); ++j) out.col(static_cast<Eigen::Index>(j)) = (*shared)[j] * a;
    return out;
  };
  f.df = [shared](const VectorXd&) { return *shared; };
  f.gamma = 1.0;
  f.sup_f = norm * radius;
  f.sup_df = norm;
  f.hoelder_f = norm;
  f.hoelder_df = 0.0;
  return f;
}

VectorField field_scalar_exponential(double radius) {
  auto f = field_linear({MatrixXd::Identity(1, 1)}, radius);
  f.name = "scalar_exponential";
  return f;
}

VectorField field_rotation(double radius) {
  MatrixXd J(2, 2);
  J << 0.0, -1.0, 1.0, 0.0;
  auto f = field_linear({J}, radius);
  f.name = "rotation";
  return f;
}

VectorField field_sine() {
  VectorField f;
  f.name = "sine";
  f.f = [](const VectorXd& a) -> MatrixXd { return MatrixXd::Constant(1, 1, std::sin(a(0))); };
  f.df = [](const VectorXd& a) { return std::vector<MatrixXd>{MatrixXd::Constant(1, 1, std::cos(a(0)))}; };
  f.gamma = 1.0;
  f.sup_f = 1.0;
  f.sup_df = 1.0;
  f.hoelder_f = 1.0;
  f.hoelder_df = 1.0;
  return f;
}

VectorField field_trig() {
  VectorField f;
  f.name = "trig";
  f.state_dim = 2;
  f.driver_dim = 2;
  f.f = [](const VectorXd& y) -> MatrixXd {
    MatrixXd out(2, 2);
    out << std::cos(y(1)), 0.0, 0.0, std::sin(y(0));
    return out;
  };
  f.df = [](const VectorXd& y) {
    MatrixXd d1(2, 2), d2(2, 2);
    d1 << 0.0, -std::sin(y(1)), 0.0, 0.0;
    d2 << 0.0, 0.0, std::cos(y(0)), 0.0;
    return std::vector<MatrixXd>{d1, d2};
  };
  f.gamma = 1.0;
  f.sup_f = 1.0;
  f.sup_df = 1.0;
  f.hoelder_f = 1.0;
  f.hoelder_df = 1.0;
  return f;
}

// ---------------------------------------------------------------------------

double path_pnorm(const DiscretePath& x, const Control& omega, double p) {
  const auto& times = x.times();
  const auto& v = x.values();
  const PVariationTable* table = omega.table();
  auto ratio = [&](std::size_t i, std::size_t j) {
    const double d = (v.row(static_cast<Eigen::Index>(j)) - v.row(static_cast<Eigen::Index>(i))).lpNorm<1>();
    if (d == 0.0) return 0.0;
    const double w = table ? table->at(i, j) : omega(times[i], times[j]);
    return w > 0.0 ? d / std::pow(w, 1.0 / p) : std::numeric_limits<double>::infinity();
  };
  double out = 0.0;
  if (omega.kind() == Control::Kind::PVariation && table && table->p == p && table->times == times) {
    // The exact p-variation dominates |x_{s,t}|^p, with equality on adjacent samples.
    for (std::size_t i = 0; i + 1 < times.size(); ++i) out = std::max(out, ratio(i, i + 1));
    return out;
  }
  for (std::size_t i = 0; i < times.size(); ++i)
    for (std::size_t j = i + 1; j < times.size(); ++j) out = std::max(out, ratio(i, j));
  return out;
}

namespace {

void check_field(const VectorField& f) {
  if (!f.f) throw InvalidArgument("vector field has no evaluator");
  if (!(f.gamma > 0.0 && f.gamma <= 1.0)) throw InvalidArgument("field exponent gamma must lie in (0, 1]");
  for (double c : {f.sup_f, f.sup_df, f.hoelder_f, f.hoelder_df}) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw InvalidArgument("field bounds must be finite and nonnegative");
  }
}

}  // namespace

AlmostFlow<VectorXd> young_flow(const VectorField& f, const DiscretePath& x, double p) {
  check_field(f);
  if (!(p >= 1.0 && p < 2.0)) throw InvalidArgument("Young regularity p must lie in [1, 2)");
  if (!(1.0 + f.gamma > p)) {
    std::ostringstream msg;
    msg << "Young scheme needs 1 + gamma > p, got gamma = " << f.gamma << ", p = " << p;
    throw InvalidArgument(msg.str());
  }
  if (x.dim() != f.driver_dim) throw InvalidArgument("path dimension does not match the field's driver dimension");
  if (x.times().front() != 0.0) throw InvalidArgument("driving path must start at time 0");
  const double gamma = f.gamma;
  const Control omega = control_pvar(x.times(), x.values(), p);
  const double xnorm = path_pnorm(x, omega, p);
  const double hf = f.hoelder_f;
  const double c = xnorm + hf * std::max(xnorm * xnorm, std::pow(xnorm, 1.0 + gamma));
  auto path = std::make_shared<const DiscretePath>(x);
  auto field = f.f;
  const int m = f.state_dim;

  AlmostFlow<VectorXd> phi{
      [path, field](double s, double t, const VectorXd& a) -> VectorXd {
        if (s == t) return a;
        return a + field(a) * path->increment(s, t);
      },
      GrowthGauge<VectorXd>{[field, c](const VectorXd& a) {
                              return std::max(1.0, (1.0 + field(a).cwiseAbs().maxCoeff()) * c);
                            },
                            gamma, c * hf},
      [omega, p, hf, xnorm, gamma](double T) {
        const double w = omega(0.0, T);
        return std::max(std::pow(w, 1.0 / p), hf * xnorm * std::pow(w, gamma * gamma / p));
      },
      [p, hf, xnorm](double w) { return hf * xnorm * std::pow(w, 1.0 / p); },
      remainder_power((1.0 + gamma) / p),
      omega,
      x.horizon(),
      VectorXd::Zero(m)};
  return phi;
}

AlmostFlow<VectorXd> rough_flow(const VectorField& f, const RoughPath2& X) {
  check_field(f);
  if (!f.df) throw InvalidArgument("rough scheme needs the field derivative df");
  const double p = X.p;
  const double gamma = f.gamma;
  if (!(p >= 2.0 && p < 3.0)) throw InvalidArgument("rough regularity p must lie in [2, 3)");
  if (!(2.0 + gamma > p)) {
    std::ostringstream msg;
    msg << "rough scheme needs 2 + gamma > p, got gamma = " << gamma << ", p = " << p;
    throw InvalidArgument(msg.str());
  }
  if (X.dim != f.driver_dim) throw InvalidArgument("rough path dimension does not match the field's driver dimension");

  const double T = X.horizon;
  const double w = X.omega(0.0, T);
  const double n1 = X.norm1;
  const double n2 = X.norm2;
  const double sup_g = f.sup_df * f.sup_f;
  const double hoelder_g =
      f.hoelder_df * f.sup_f + f.sup_df * std::pow(f.sup_df, gamma) * std::pow(2.0 * f.sup_f, 1.0 - gamma);
  const double D = f.sup_f * n1 + sup_g * n2 * std::pow(w, 1.0 / p);
  const double c1 = f.hoelder_df * std::pow(D, 1.0 + gamma) * n1;
  const double c2 = f.sup_df * sup_g * n2 * n1 * std::pow(w, (1.0 - gamma) / p);
  const double c3 = hoelder_g * std::pow(D, gamma) * n2;
  const double N = std::max(1.0, c1 + c2 + c3);
  const double delta = std::max({D * std::pow(w, 1.0 / p) / N, f.sup_df * n1 * std::pow(w, 1.0 / p),
                                 hoelder_g * n2 * std::pow(w, (gamma + gamma * gamma) / p)});

  auto field = std::make_shared<const VectorField>(f);
  auto x1 = X.x1;
  auto x2 = X.x2;
  return AlmostFlow<VectorXd>{
      [field, x1, x2](double s, double t, const VectorXd& a) -> VectorXd {
        if (s == t) return a;
        return a + field->f(a) * x1(s, t) + area_drift(*field, a, x2(s, t));
      },
      GrowthGauge<VectorXd>{[N](const VectorXd&) { return N; }, gamma, 0.0},
      [delta](double) { return delta; },
      [p, hoelder_g, n2](double wv) { return hoelder_g * n2 * std::pow(wv, 2.0 / p); },
      remainder_power((2.0 + gamma) / p),
      X.omega,
      T,
      VectorXd::Zero(f.state_dim)};
}

}  // namespace sewflow

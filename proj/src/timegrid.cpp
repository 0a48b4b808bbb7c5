#include "sewflow/timegrid.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <sstream>

#include "sewflow/errors.hpp"

namespace sewflow {

Partition::Partition(std::vector<double> points) : points_(std::move(points)) {
  if (points_.empty()) throw InvalidArgument("partition needs at least one point");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i])) throw InvalidArgument("partition point is not finite");
    if (i > 0) {
      if (!(points_[i] > points_[i - 1])) {
        throw InvalidArgument("partition points must be strictly increasing");
      }
      mesh_ = std::max(mesh_, points_[i] - points_[i - 1]);
    }
  }
}

bool Partition::contains(double t) const {
  return std::binary_search(points_.begin(), points_.end(), t);
}

std::size_t Partition::index_of(double t) const {
  auto it = std::lower_bound(points_.begin(), points_.end(), t);
  if (it == points_.end() || *it != t) {
    std::ostringstream msg;
    msg << "time " << t << " is not a grid point";
    throw InvalidArgument(msg.str());
  }
  return static_cast<std::size_t>(it - points_.begin());
}

bool Partition::refines(const Partition& coarse) const {
  return std::includes(points_.begin(), points_.end(), coarse.points_.begin(),
                       coarse.points_.end());
}

SimplexTriple::SimplexTriple(double r_, double s_, double t_) : r(r_), s(s_), t(t_) {
  if (!(r <= s && s <= t)) throw InvalidArgument("simplex triple needs r <= s <= t");
}

Control::Control(Kind kind, Evaluator evaluator, double parameter,
                 std::shared_ptr<const PVariationTable> table)
    : kind_(kind), evaluator_(std::move(evaluator)), parameter_(parameter), table_(std::move(table)) {}

double PVariationTable::at(std::size_t i, std::size_t j) const {
  if (i >= j) return 0.0;
  if (p == 1.0) return prefix[j] - prefix[i];
  return omega(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
}

double PVariationTable::query(double s, double t) const {
  if (!(s < t)) return 0.0;
  // Outward snapping: s to the enclosing sample on the left, t on the right.
  auto lo = std::upper_bound(times.begin(), times.end(), s);
  std::size_t i = lo == times.begin() ? 0 : static_cast<std::size_t>(lo - times.begin()) - 1;
  auto hi = std::lower_bound(times.begin(), times.end(), t);
  std::size_t j = hi == times.end() ? times.size() - 1 : static_cast<std::size_t>(hi - times.begin());
  return at(i, j);
}

Remainder::Remainder(Evaluator evaluator, double kappa, std::optional<double> theta)
    : evaluator_(std::move(evaluator)), kappa_(kappa), theta_(theta) {
  if (!(kappa > 0.0 && kappa < 1.0)) throw InvalidArgument("remainder contraction must lie in (0,1)");
}

Remainder Remainder::pow(double lambda) const {
  auto base = evaluator_;
  std::optional<double> theta;
  if (theta_) theta = *theta_ * lambda;
  return Remainder([base, lambda](double d) { return std::pow(base(d), lambda); },
                   std::pow(2.0, 1.0 - lambda) * std::pow(kappa_, lambda), theta);
}

Partition uniform_partition(double horizon, std::size_t n) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InvalidArgument("horizon must be positive");
  if (n == 0) throw InvalidArgument("uniform partition needs n >= 1");
  std::vector<double> pts(n + 1);
  for (std::size_t i = 0; i <= n; ++i) pts[i] = horizon * static_cast<double>(i) / static_cast<double>(n);
  pts.back() = horizon;
  return Partition(std::move(pts));
}

Partition dyadic_refine(const Partition& pi) {
  auto pts = pi.points();
  std::vector<double> out;
  out.reserve(2 * pts.size() - 1);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i > 0) out.push_back(0.5 * (pts[i - 1] + pts[i]));
    out.push_back(pts[i]);
  }
  return Partition(std::move(out));
}

std::size_t pi_distance(const Partition& pi, double s, double t) {
  if (s > t) throw InvalidArgument("pi_distance needs s <= t");
  return pi.index_of(t) - pi.index_of(s);
}

Control control_linear(double c) {
  if (!(c >= 0.0) || !std::isfinite(c)) throw InvalidArgument("linear control needs c >= 0");
  return Control(Control::Kind::Linear, [c](double s, double t) { return s < t ? c * (t - s) : 0.0; }, c);
}

Control control_pvar(std::vector<double> times, Eigen::MatrixXd values, double p) {
  if (times.size() < 2) throw InvalidArgument("p-variation control needs at least 2 samples");
  if (static_cast<std::size_t>(values.rows()) != times.size()) {
    throw InvalidArgument("p-variation control: one value row per sample time");
  }
  if (!(p >= 1.0)) throw InvalidArgument("p-variation control needs p >= 1");
  static_cast<void>(Partition{times});

  auto table = std::make_shared<PVariationTable>();
  table->p = p;
  const auto m = times.size();
  auto dist = [&values](std::size_t a, std::size_t b) {
    return (values.row(static_cast<Eigen::Index>(a)) - values.row(static_cast<Eigen::Index>(b)))
        .lpNorm<1>();
  };
  if (p == 1.0) {
    // The finest sub-partition is optimal by the triangle inequality.
    table->prefix.assign(m, 0.0);
    for (std::size_t i = 1; i < m; ++i) table->prefix[i] = table->prefix[i - 1] + dist(i - 1, i);
    // Snap to a fixed-point grid below 2^53 steps so differences add without rounding.
    const double total = table->prefix.back();
    if (total > 0.0 && std::isfinite(total)) {
      const double step = std::ldexp(1.0, std::ilogb(total) - 51);
      for (auto& v : table->prefix) v = std::nearbyint(v / step) * step;
    }
  } else {
    const auto n = static_cast<Eigen::Index>(m);
    table->omega = Eigen::MatrixXd::Zero(n, n);
    // Rows from the right: omega(i,j) = max(direct, omega(i,k) + omega(k,j)) over final rows k > i,
    // so the stored value dominates every computed split sum.
    for (Eigen::Index i = n - 1; i >= 0; --i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        double b = std::pow(dist(static_cast<std::size_t>(i), static_cast<std::size_t>(j)), p);
        for (Eigen::Index k = i + 1; k < j; ++k) b = std::max(b, table->omega(i, k) + table->omega(k, j));
        table->omega(i, j) = b;
      }
    }
  }
  table->times = std::move(times);
  table->values = std::move(values);
  std::shared_ptr<const PVariationTable> shared = table;
  return Control(
      Control::Kind::PVariation, [shared](double s, double t) { return shared->query(s, t); }, p,
      shared);
}

Control control_custom(Control::Evaluator evaluator) {
  return Control(Control::Kind::Custom, std::move(evaluator));
}

SuperadditivityReport check_superadditive(const Control& omega,
                                          std::span<const SimplexTriple> triples) {
  if (triples.empty()) throw InvalidArgument("check_superadditive needs a nonempty sample");
  SuperadditivityReport report;
  for (const auto& tr : triples) {
    const double v = omega(tr.r, tr.s) + omega(tr.s, tr.t) - omega(tr.r, tr.t);
    if (v > report.max_violation) {
      report.max_violation = v;
      report.worst = tr;
    }
  }
  return report;
}

Remainder remainder_power(double theta) {
  if (!(theta > 1.0) || !std::isfinite(theta)) {
    throw InvalidArgument("power remainder needs theta > 1");
  }
  // kappa carries a few ulps of margin so the contraction also holds for rounded powers.
  const double kappa = std::min(std::pow(2.0, 1.0 - theta) * (1.0 + 16.0 * DBL_EPSILON), std::nextafter(1.0, 0.0));
  return Remainder([theta](double d) { return d > 0.0 ? std::pow(d, theta) : 0.0; }, kappa, theta);
}

double lambda_lower_bound(double kappa) { return 1.0 / (1.0 - std::log2(kappa)); }

double default_lambda(double kappa) {
  return std::max(0.9, 0.5 * (1.0 + lambda_lower_bound(kappa)));
}

double theta_stat(const Partition& pi, const Control& omega, const Remainder& varpi,
                  double lambda) {
  const double bound = lambda_lower_bound(varpi.kappa());
  if (!(lambda > bound && lambda < 1.0)) {
    std::ostringstream msg;
    msg << "lambda " << lambda << " outside admissible range (" << bound << ", 1)";
    throw InvalidArgument(msg.str());
  }
  double theta = 0.0;
  auto pts = pi.points();
  for (std::size_t i = 1; i < pts.size(); ++i) {
    theta = std::max(theta, std::pow(varpi(omega(pts[i - 1], pts[i])), 1.0 - lambda));
  }
  return theta;
}

}  // namespace sewflow

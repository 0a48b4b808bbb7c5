#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace sewflow {

/// Strictly increasing grid of times t_0 < t_1 < ... < t_n.
///
/// Partitions of [0, T] start at 0; solution grids may start at any r.
class Partition {
 public:
  explicit Partition(std::vector<double> points);

  std::span<const double> points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  double operator[](std::size_t i) const { return points_[i]; }
  double front() const { return points_.front(); }
  double back() const { return points_.back(); }

  /// Largest gap between successive points; 0 for a single point.
  double mesh() const { return mesh_; }

  bool contains(double t) const;
  /// Index of an exact grid point; throws InvalidArgument otherwise.
  std::size_t index_of(double t) const;
  /// True when every point of `coarse` is also a point of this partition.
  bool refines(const Partition& coarse) const;

  bool operator==(const Partition& other) const { return points_ == other.points_; }

 private:
  std::vector<double> points_;
  double mesh_ = 0.0;
};

/// (r, s, t) with r <= s <= t.
struct SimplexTriple {
  double r;
  double s;
  double t;

  SimplexTriple(double r_, double s_, double t_);
};

struct PVariationTable;

/// Super-additive family omega_{s,t} on the time simplex.
class Control {
 public:
  enum class Kind { Linear, PVariation, Custom };
  using Evaluator = std::function<double(double, double)>;

  Control(Kind kind, Evaluator evaluator, double parameter = 0.0,
          std::shared_ptr<const PVariationTable> table = nullptr);

  double operator()(double s, double t) const { return evaluator_(s, t); }

  Kind kind() const { return kind_; }
  /// c for linear controls, p for p-variation controls.
  double parameter() const { return parameter_; }
  const PVariationTable* table() const { return table_.get(); }

 private:
  Kind kind_;
  Evaluator evaluator_;
  double parameter_;
  std::shared_ptr<const PVariationTable> table_;
};

/// Exact p-variation control of a sampled path (rows of `values`).
struct PVariationTable {
  std::vector<double> times;
  Eigen::MatrixXd values;
  double p = 1.0;
  // p == 1: prefix sums of increments. p > 1: dense upper-triangular table.
  std::vector<double> prefix;
  Eigen::MatrixXd omega;

  double at(std::size_t i, std::size_t j) const;
  /// Snaps s down and t up to enclosing sample times.
  double query(double s, double t) const;
};

/// Modulus varpi with the dyadic contraction 2 varpi(d/2) <= kappa varpi(d).
class Remainder {
 public:
  using Evaluator = std::function<double(double)>;

  Remainder(Evaluator evaluator, double kappa, std::optional<double> theta = std::nullopt);

  double operator()(double delta) const { return evaluator_(delta); }
  double kappa() const { return kappa_; }
  /// Exponent when varpi(d) = d^theta.
  std::optional<double> theta() const { return theta_; }

  /// varpi^lambda, with contraction factor 2^{1-lambda} kappa^lambda.
  Remainder pow(double lambda) const;

 private:
  Evaluator evaluator_;
  double kappa_;
  std::optional<double> theta_;
};

Partition uniform_partition(double horizon, std::size_t n);
Partition dyadic_refine(const Partition& pi);
/// Number of gaps between grid points s <= t.
std::size_t pi_distance(const Partition& pi, double s, double t);

Control control_linear(double c);
/// p-variation of a path given by sample times and rows of `values` (l1 distance).
Control control_pvar(std::vector<double> times, Eigen::MatrixXd values, double p);
Control control_custom(Control::Evaluator evaluator);

struct SuperadditivityReport {
  double max_violation = 0.0;
  std::optional<SimplexTriple> worst;
};

SuperadditivityReport check_superadditive(const Control& omega,
                                          std::span<const SimplexTriple> triples);

Remainder remainder_power(double theta);

/// Lower bound 1/(1 - log2 kappa) an admissible lambda must exceed.
double lambda_lower_bound(double kappa);
double default_lambda(double kappa);

/// sup over successive points of varpi(omega_{s,s'})^{1-lambda}.
double theta_stat(const Partition& pi, const Control& omega, const Remainder& varpi,
                  double lambda);

}  // namespace sewflow

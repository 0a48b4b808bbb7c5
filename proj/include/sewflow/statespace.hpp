#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "sewflow/errors.hpp"
#include "sewflow/sampling.hpp"

namespace sewflow {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Element of the truncated tensor algebra T_k(R^d).
///
/// Degree j is stored as a flat vector of d^j coefficients, multi-indices in
/// row-major order. The norm is the sum of the per-degree Frobenius norms,
/// which is sub-multiplicative for the truncated product.
template <typename Scalar>
class TensorElement {
 public:
  using Block = Vector<Scalar>;

  TensorElement() = default;

  static TensorElement zero(int base_dim, int level) {
    if (base_dim < 1 || level < 0) throw InvalidArgument("tensor element needs base_dim >= 1, level >= 0");
    TensorElement out;
    out.base_dim_ = base_dim;
    out.blocks_.resize(static_cast<std::size_t>(level) + 1);
    Eigen::Index size = 1;
    for (auto& b : out.blocks_) {
      b = Block::Zero(size);
      size *= base_dim;
    }
    return out;
  }

  static TensorElement unit(int base_dim, int level) {
    auto out = zero(base_dim, level);
    out.blocks_[0](0) = Scalar(1);
    return out;
  }

  int base_dim() const { return base_dim_; }
  int level() const { return static_cast<int>(blocks_.size()) - 1; }

  Block& block(int degree) { return blocks_.at(static_cast<std::size_t>(degree)); }
  const Block& block(int degree) const { return blocks_.at(static_cast<std::size_t>(degree)); }

  bool same_shape(const TensorElement& other) const {
    return base_dim_ == other.base_dim_ && blocks_.size() == other.blocks_.size();
  }

  Scalar norm() const {
    Scalar n(0);
    for (const auto& b : blocks_) n += b.norm();
    return n;
  }

  TensorElement& operator+=(const TensorElement& other) {
    require_same_shape(other);
    for (std::size_t j = 0; j < blocks_.size(); ++j) blocks_[j] += other.blocks_[j];
    return *this;
  }
  TensorElement& operator-=(const TensorElement& other) {
    require_same_shape(other);
    for (std::size_t j = 0; j < blocks_.size(); ++j) blocks_[j] -= other.blocks_[j];
    return *this;
  }
  TensorElement& operator*=(Scalar c) {
    for (auto& b : blocks_) b *= c;
    return *this;
  }

  friend TensorElement operator+(TensorElement a, const TensorElement& b) { return a += b; }
  friend TensorElement operator-(TensorElement a, const TensorElement& b) { return a -= b; }
  friend TensorElement operator*(Scalar c, TensorElement a) { return a *= c; }

  bool operator==(const TensorElement& other) const {
    if (!same_shape(other)) return false;
    for (std::size_t j = 0; j < blocks_.size(); ++j)
      if (blocks_[j] != other.blocks_[j]) return false;
    return true;
  }

  void require_same_shape(const TensorElement& other) const {
    if (!same_shape(other)) throw InvalidArgument("tensor elements have different shapes");
  }

 private:
  int base_dim_ = 0;
  std::vector<Block> blocks_;
};

/// Truncated tensor product: degree j of the result is sum_{i<=j} a_i (x) b_{j-i}.
template <typename Scalar>
TensorElement<Scalar> tensor_mul(const TensorElement<Scalar>& a, const TensorElement<Scalar>& b) {
  a.require_same_shape(b);
  const int k = a.level();
  auto out = TensorElement<Scalar>::zero(a.base_dim(), k);
  for (int j = 0; j <= k; ++j) {
    auto& dst = out.block(j);
    for (int i = 0; i <= j; ++i) {
      const auto& left = a.block(i);
      const auto& right = b.block(j - i);
      // Row-major flattening of left (x) right.
      Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> view(
          dst.data(), left.size(), right.size());
      view.noalias() += left * right.transpose();
    }
  }
  return out;
}

/// Inverse of an element with degree-0 coefficient 1: sum_n (1 - a)^n, truncated.
template <typename Scalar>
TensorElement<Scalar> tensor_inverse(const TensorElement<Scalar>& a) {
  if (a.block(0)(0) != Scalar(1)) throw InvalidArgument("tensor inverse needs degree-0 coefficient 1");
  const auto unit = TensorElement<Scalar>::unit(a.base_dim(), a.level());
  const auto nil = unit - a;
  auto power = unit;
  auto out = unit;
  for (int n = 1; n <= a.level(); ++n) {
    power = tensor_mul(power, nil);
    out += power;
  }
  return out;
}

/// Group-like metric |a^{-1} (x) b - 1|, restricted to degree-0 coefficient 1.
template <typename Scalar>
double grouplike_distance(const TensorElement<Scalar>& a, const TensorElement<Scalar>& b) {
  if (b.block(0)(0) != Scalar(1)) throw InvalidArgument("group-like metric needs degree-0 coefficient 1");
  auto diff = tensor_mul(tensor_inverse(a), b) - TensorElement<Scalar>::unit(a.base_dim(), a.level());
  return static_cast<double>(diff.norm());
}

/// Per-type metric and algebra structure of a state space.
template <typename State>
struct state_traits;

template <typename Scalar>
struct state_traits<Vector<Scalar>> {
  static constexpr bool additive = true;
  static constexpr bool algebra = false;

  static bool same_shape(const Vector<Scalar>& a, const Vector<Scalar>& b) { return a.size() == b.size(); }
  static double norm(const Vector<Scalar>& a) {
    return a.size() == 0 ? 0.0 : static_cast<double>(a.template lpNorm<Eigen::Infinity>());
  }
  static Vector<Scalar> add(const Vector<Scalar>& a, const Vector<Scalar>& b) { return a + b; }
  static Vector<Scalar> subtract(const Vector<Scalar>& a, const Vector<Scalar>& b) { return a - b; }
  static Vector<Scalar> scale(const Vector<Scalar>& a, double c) { return a * Scalar(c); }
  static std::vector<double> flatten(const Vector<Scalar>& a) {
    return std::vector<double>(a.data(), a.data() + a.size());
  }
  static Vector<Scalar> random(const Vector<Scalar>& proto, std::mt19937_64& rng, double lo, double hi) {
    Vector<Scalar> v(proto.size());
    for (auto& x : v) x = Scalar(lo + (hi - lo) * unit_uniform(rng));
    return v;
  }
};

template <typename Scalar>
struct state_traits<Matrix<Scalar>> {
  static constexpr bool additive = true;
  static constexpr bool algebra = true;

  static bool same_shape(const Matrix<Scalar>& a, const Matrix<Scalar>& b) {
    return a.rows() == b.rows() && a.cols() == b.cols();
  }
  static double norm(const Matrix<Scalar>& a) { return static_cast<double>(a.norm()); }
  static Matrix<Scalar> add(const Matrix<Scalar>& a, const Matrix<Scalar>& b) { return a + b; }
  static Matrix<Scalar> subtract(const Matrix<Scalar>& a, const Matrix<Scalar>& b) { return a - b; }
  static Matrix<Scalar> mul(const Matrix<Scalar>& a, const Matrix<Scalar>& b) {
    if (a.cols() != b.rows()) throw InvalidArgument("matrix product shape mismatch");
    return a * b;
  }
  static Matrix<Scalar> unit(const Matrix<Scalar>& proto) {
    return Matrix<Scalar>::Identity(proto.rows(), proto.cols());
  }
  static Matrix<Scalar> scale(const Matrix<Scalar>& a, double c) { return a * Scalar(c); }
  /// Row-major coefficients.
  static std::vector<double> flatten(const Matrix<Scalar>& a) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(a.size()));
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      for (Eigen::Index j = 0; j < a.cols(); ++j) out.push_back(static_cast<double>(a(i, j)));
    return out;
  }
  /// Right-multiplication Lipschitz factor: |x a|_F <= |x|_F |a|_2.
  static double operator_norm(const Matrix<Scalar>& a) {
    return static_cast<double>(Eigen::JacobiSVD<Matrix<Scalar>>(a).singularValues()(0));
  }
  static Matrix<Scalar> random(const Matrix<Scalar>& proto, std::mt19937_64& rng, double lo, double hi) {
    Matrix<Scalar> m(proto.rows(), proto.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = Scalar(lo + (hi - lo) * unit_uniform(rng));
    return m;
  }
};

template <typename Scalar>
struct state_traits<TensorElement<Scalar>> {
  static constexpr bool additive = true;
  static constexpr bool algebra = true;

  static bool same_shape(const TensorElement<Scalar>& a, const TensorElement<Scalar>& b) {
    return a.same_shape(b);
  }
  static double norm(const TensorElement<Scalar>& a) { return static_cast<double>(a.norm()); }
  static TensorElement<Scalar> add(const TensorElement<Scalar>& a, const TensorElement<Scalar>& b) { return a + b; }
  static TensorElement<Scalar> subtract(const TensorElement<Scalar>& a, const TensorElement<Scalar>& b) {
    return a - b;
  }
  static TensorElement<Scalar> mul(const TensorElement<Scalar>& a, const TensorElement<Scalar>& b) {
    return tensor_mul(a, b);
  }
  static TensorElement<Scalar> unit(const TensorElement<Scalar>& proto) {
    return TensorElement<Scalar>::unit(proto.base_dim(), proto.level());
  }
  static TensorElement<Scalar> scale(const TensorElement<Scalar>& a, double c) { return Scalar(c) * a; }
  static double operator_norm(const TensorElement<Scalar>& a) { return norm(a); }
  /// Degree blocks concatenated in order.
  static std::vector<double> flatten(const TensorElement<Scalar>& a) {
    std::vector<double> out;
    for (int j = 0; j <= a.level(); ++j)
      for (const auto& x : a.block(j)) out.push_back(static_cast<double>(x));
    return out;
  }
  static TensorElement<Scalar> random(const TensorElement<Scalar>& proto, std::mt19937_64& rng, double lo,
                                      double hi) {
    auto out = TensorElement<Scalar>::zero(proto.base_dim(), proto.level());
    for (int j = 0; j <= out.level(); ++j)
      for (auto& x : out.block(j)) x = Scalar(lo + (hi - lo) * unit_uniform(rng));
    return out;
  }
};

template <typename State>
concept MetricState = requires(const State& a, const State& b) {
  { state_traits<State>::norm(a) } -> std::convertible_to<double>;
  { state_traits<State>::same_shape(a, b) } -> std::convertible_to<bool>;
  { state_traits<State>::flatten(a) } -> std::convertible_to<std::vector<double>>;
};

/// States with vector addition, needed for perturbations.
template <typename State>
concept AdditiveState = MetricState<State> && state_traits<State>::additive;

template <typename State>
concept AlgebraState = MetricState<State> && state_traits<State>::algebra;

/// d(a, b) = |a - b| in the state's norm (max-norm for vectors, Frobenius for
/// matrices, summed per-degree Frobenius for tensors).
template <MetricState State>
double distance(const State& a, const State& b) {
  if (!state_traits<State>::same_shape(a, b)) throw InvalidArgument("distance between states of different shape");
  return state_traits<State>::norm(state_traits<State>::subtract(a, b));
}

/// Exponential series sum_{j<=terms} a^j/j!, with scaling and squaring when |a| > 1.
template <AlgebraState State>
State algebra_exp(const State& a, int terms) {
  using traits = state_traits<State>;
  if (terms < 1) throw InvalidArgument("algebra_exp needs terms >= 1");
  const double n = traits::norm(a);
  int squarings = 0;
  if (n > 1.0) squarings = static_cast<int>(std::ceil(std::log2(n)));
  const State x = traits::scale(a, std::ldexp(1.0, -squarings));
  State sum = traits::unit(a);
  State term = traits::unit(a);
  for (int j = 1; j <= terms; ++j) {
    term = traits::scale(traits::mul(term, x), 1.0 / j);
    if (traits::norm(term) == 0.0) break;
    sum = traits::add(sum, term);
  }
  for (int i = 0; i < squarings; ++i) sum = traits::mul(sum, sum);
  return sum;
}

/// Gauge N_gamma: V -> [1, inf) with Hoelder exponent gamma and constant |N|_gamma.
template <typename State>
struct GrowthGauge {
  std::function<double(const State&)> evaluator;
  double gamma = 1.0;
  double hoelder_const = 0.0;

  double operator()(const State& a) const { return evaluator(a); }

  static GrowthGauge constant(double value) {
    if (!(value >= 1.0)) throw InvalidArgument("gauge values must be >= 1");
    return {[value](const State&) { return value; }, 1.0, 0.0};
  }
};

}  // namespace sewflow

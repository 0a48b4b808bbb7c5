#include <doctest.h>

#include <cmath>
#include <random>

#include "sewflow/errors.hpp"
#include "sewflow/sampling.hpp"
#include "sewflow/statespace.hpp"

using namespace sewflow;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

using Tensor = TensorElement<double>;

Tensor random_tensor(std::mt19937_64& rng, int d, int k) {
  return state_traits<Tensor>::random(Tensor::zero(d, k), rng, -1.0, 1.0);
}

}  // namespace

TEST_SUITE("statespace") {
  TEST_CASE("tensor product laws") {
    std::mt19937_64 rng(5);
    const Tensor b = random_tensor(rng, 3, 3);
    CHECK(tensor_mul(Tensor::unit(3, 3), b) == b);
    CHECK(tensor_mul(b, Tensor::unit(3, 3)) == b);

    // d = 1: exponentials multiply.
    const double x = 0.7, y = -0.3;
    Tensor a1 = Tensor::unit(1, 2), b1 = Tensor::unit(1, 2);
    a1.block(1)(0) = x;
    a1.block(2)(0) = x * x / 2;
    b1.block(1)(0) = y;
    b1.block(2)(0) = y * y / 2;
    const Tensor c1 = tensor_mul(a1, b1);
    CHECK(c1.block(1)(0) == doctest::Approx(x + y));
    CHECK(c1.block(2)(0) == doctest::Approx((x + y) * (x + y) / 2));

    // Truncation: degree-2 times degree-1 is dropped at level 2.
    Tensor top = Tensor::zero(2, 2), one = Tensor::zero(2, 2);
    top.block(2).setOnes();
    one.block(1).setOnes();
    CHECK(tensor_mul(top, one).norm() == 0.0);

    // Degree-2 block is the outer product in row-major order.
    Tensor u = Tensor::zero(2, 2), v = Tensor::zero(2, 2);
    u.block(1) << 1.0, 2.0;
    v.block(1) << 3.0, 5.0;
    const Tensor uv = tensor_mul(u, v);
    CHECK(uv.block(2)(0) == 3.0);
    CHECK(uv.block(2)(1) == 5.0);
    CHECK(uv.block(2)(2) == 6.0);
    CHECK(uv.block(2)(3) == 10.0);

    CHECK_THROWS_AS(tensor_mul(Tensor::unit(2, 2), Tensor::unit(3, 2)), InvalidArgument);
    CHECK_THROWS_AS(tensor_mul(Tensor::unit(2, 2), Tensor::unit(2, 3)), InvalidArgument);
  }

  TEST_CASE("tensor associativity and inverse") {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 50; ++i) {
      const Tensor a = random_tensor(rng, 2, 4), b = random_tensor(rng, 2, 4), c = random_tensor(rng, 2, 4);
      const Tensor l = tensor_mul(tensor_mul(a, b), c);
      const Tensor r = tensor_mul(a, tensor_mul(b, c));
      // Equal as polynomials; the two orders round differently.
      CHECK((l - r).norm() <= 1e-13 * std::max(1.0, l.norm()));
      Tensor g = a;
      g.block(0)(0) = 1.0;
      CHECK((tensor_mul(g, tensor_inverse(g)) - Tensor::unit(2, 4)).norm() <= 1e-12 * std::max(1.0, g.norm()));
      CHECK(grouplike_distance(g, g) <= 1e-12 * std::max(1.0, g.norm()));
    }
    CHECK_THROWS_AS(tensor_inverse(Tensor::zero(2, 2)), InvalidArgument);
  }

  TEST_CASE("metric axioms and sub-multiplicativity") {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 200; ++i) {
      const VectorXd a = state_traits<VectorXd>::random(VectorXd::Zero(4), rng, -2, 2);
      const VectorXd b = state_traits<VectorXd>::random(VectorXd::Zero(4), rng, -2, 2);
      const VectorXd c = state_traits<VectorXd>::random(VectorXd::Zero(4), rng, -2, 2);
      CHECK(distance(a, b) == distance(b, a));
      CHECK(distance(a, c) <= distance(a, b) + distance(b, c));
      CHECK(distance(a, a) == 0.0);

      const MatrixXd A = state_traits<MatrixXd>::random(MatrixXd::Zero(3, 3), rng, -2, 2);
      const MatrixXd B = state_traits<MatrixXd>::random(MatrixXd::Zero(3, 3), rng, -2, 2);
      const MatrixXd C = state_traits<MatrixXd>::random(MatrixXd::Zero(3, 3), rng, -2, 2);
      CHECK(distance(A, B) == distance(B, A));
      CHECK(distance(A, C) <= distance(A, B) + distance(B, C));
      CHECK((A * B).norm() <= A.norm() * B.norm());

      const Tensor x = random_tensor(rng, 2, 3), y = random_tensor(rng, 2, 3), z = random_tensor(rng, 2, 3);
      CHECK(distance(x, y) == distance(y, x));
      CHECK(distance(x, z) <= distance(x, y) + distance(y, z));
      CHECK(tensor_mul(x, y).norm() <= x.norm() * y.norm());
    }
  }

  TEST_CASE("distance examples") {
    VectorXd o = VectorXd::Zero(2), p(2);
    p << 3.0, 4.0;
    CHECK(distance(o, p) == 4.0);
    Tensor a = Tensor::unit(2, 2), b = Tensor::unit(2, 2);
    b.block(2) << 1.0, 2.0, 2.0, 4.0;
    CHECK(distance(a, b) == doctest::Approx(5.0));
    CHECK_THROWS_AS(distance(VectorXd(VectorXd::Zero(2)), VectorXd(VectorXd::Zero(3))), InvalidArgument);
  }

  TEST_CASE("algebra exponential") {
    CHECK(algebra_exp(MatrixXd(MatrixXd::Zero(2, 2)), 20) == MatrixXd::Identity(2, 2));
    MatrixXd N(2, 2);
    N << 0, 1, 0, 0;
    CHECK(algebra_exp(N, 20) == MatrixXd(MatrixXd::Identity(2, 2) + N));
    MatrixXd S(2, 2);
    S << 0, 1, 1, 0;
    const MatrixXd expected = std::cosh(1.0) * MatrixXd::Identity(2, 2) + std::sinh(1.0) * S;
    CHECK((algebra_exp(S, 30) - expected).norm() <= 1e-14);
    // Scaling and squaring for large arguments.
    MatrixXd J(2, 2);
    J << 0, -1, 1, 0;
    MatrixXd rot(2, 2);
    rot << std::cos(5.0), -std::sin(5.0), std::sin(5.0), std::cos(5.0);
    CHECK((algebra_exp(MatrixXd(5.0 * J), 30) - rot).norm() <= 1e-12);
    CHECK_THROWS_AS(algebra_exp(S, 0), InvalidArgument);
  }

  TEST_CASE("growth gauge") {
    CHECK(GrowthGauge<VectorXd>::constant(2.0)(VectorXd::Zero(1)) == 2.0);
    CHECK_THROWS_AS(GrowthGauge<VectorXd>::constant(0.5), InvalidArgument);
    CHECK(state_traits<MatrixXd>::flatten((MatrixXd(2, 2) << 1, 2, 3, 4).finished()) ==
          std::vector<double>{1, 2, 3, 4});
  }
}

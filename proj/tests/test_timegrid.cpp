#include <doctest.h>

#include <cmath>
#include <vector>

#include "sewflow/errors.hpp"
#include "sewflow/sampling.hpp"
#include "sewflow/timegrid.hpp"

using namespace sewflow;

namespace {

// p-variation by enumerating every sub-partition of the sample indices [i, j].
double brute_pvar(const Eigen::MatrixXd& x, std::size_t i, std::size_t j, double p) {
  const std::size_t inner = j > i + 1 ? j - i - 1 : 0;
  double best = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << inner); ++mask) {
    std::size_t prev = i;
    double sum = 0.0;
    for (std::size_t b = 0; b < inner; ++b) {
      if (mask & (std::size_t{1} << b)) {
        const std::size_t k = i + 1 + b;
        sum += std::pow((x.row(static_cast<Eigen::Index>(k)) - x.row(static_cast<Eigen::Index>(prev))).lpNorm<1>(), p);
        prev = k;
      }
    }
    sum += std::pow((x.row(static_cast<Eigen::Index>(j)) - x.row(static_cast<Eigen::Index>(prev))).lpNorm<1>(), p);
    best = std::max(best, sum);
  }
  return best;
}

std::vector<double> pts(const Partition& pi) { return {pi.points().begin(), pi.points().end()}; }

}  // namespace

TEST_SUITE("timegrid") {
  TEST_CASE("uniform partitions") {
    CHECK(pts(uniform_partition(1.0, 1)) == std::vector<double>{0.0, 1.0});
    CHECK(uniform_partition(1.0, 1).mesh() == 1.0);
    CHECK(pts(uniform_partition(1.0, 4)) == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
    CHECK(uniform_partition(1.0, 4).mesh() == 0.25);
    CHECK(pts(uniform_partition(2.0, 2)) == std::vector<double>{0.0, 1.0, 2.0});
    CHECK_THROWS_AS(uniform_partition(0.0, 3), InvalidArgument);
    CHECK_THROWS_AS(uniform_partition(1.0, 0), InvalidArgument);
    CHECK_THROWS_AS(Partition({0.0, 0.5, 0.5}), InvalidArgument);
  }

  TEST_CASE("dyadic refinement inserts midpoints and nests") {
    CHECK(pts(dyadic_refine(Partition({0.0, 1.0}))) == std::vector<double>{0.0, 0.5, 1.0});
    CHECK(pts(dyadic_refine(Partition({0.0, 0.25, 1.0}))) == std::vector<double>{0.0, 0.125, 0.25, 0.625, 1.0});
    CHECK(pts(dyadic_refine(dyadic_refine(Partition({0.0, 1.0})))) ==
          std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
    std::mt19937_64 rng(3);
    for (int k = 0; k < 20; ++k) {
      const Partition pi = random_partition(rng, 1.0, 1 + k);
      const Partition fine = dyadic_refine(pi);
      CHECK(fine.refines(pi));
      CHECK(fine.mesh() == doctest::Approx(pi.mesh() / 2.0).epsilon(1e-15));
    }
  }

  TEST_CASE("pi_distance counts gaps") {
    const Partition pi({0.0, 0.5, 1.0});
    CHECK(pi_distance(pi, 0.0, 1.0) == 2);
    CHECK(pi_distance(pi, 0.0, 0.5) == 1);
    CHECK(pi_distance(Partition({0.0, 1.0}), 0.0, 0.0) == 0);
    CHECK_THROWS_AS(pi_distance(pi, 0.0, 0.7), InvalidArgument);
  }

  TEST_CASE("linear control") {
    CHECK(control_linear(1.0)(0.2, 0.7) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(control_linear(0.0)(0.1, 0.9) == 0.0);
    const Control w = control_linear(2.0);
    CHECK(w(0.0, 1.0) == 2.0);
    CHECK(w(0.0, 0.5) + w(0.5, 1.0) == 2.0);
    CHECK_THROWS_AS(control_linear(-1.0), InvalidArgument);
  }

  TEST_CASE("p-variation control matches brute force") {
    std::vector<double> t{0.0, 0.25, 0.5, 0.75, 1.0};
    Eigen::MatrixXd lin(5, 1);
    lin << 0.0, 0.25, 0.5, 0.75, 1.0;
    CHECK(control_pvar(t, lin, 1.0)(0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));

    Eigen::MatrixXd tent(3, 1);
    tent << 0.0, 1.0, 0.0;
    CHECK(control_pvar({0.0, 0.5, 1.0}, tent, 1.0)(0.0, 1.0) == 2.0);

    Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(5, 2, 0.3);
    const Control zero = control_pvar(t, flat, 2.0);
    CHECK(zero(0.0, 1.0) == 0.0);
    CHECK(zero(0.3, 0.6) == 0.0);

    std::mt19937_64 rng(11);
    const std::size_t n = 11;
    std::vector<double> times;
    Eigen::MatrixXd x(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
      times.push_back(static_cast<double>(i) / (n - 1));
      x(static_cast<Eigen::Index>(i), 0) = unit_uniform(rng) - 0.5;
      x(static_cast<Eigen::Index>(i), 1) = unit_uniform(rng) - 0.5;
    }
    for (double p : {1.0, 1.5, 2.0, 2.5}) {
      const Control w = control_pvar(times, x, p);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          CHECK(w(times[i], times[j]) == doctest::Approx(brute_pvar(x, i, j, p)).epsilon(1e-12));
      // Off-grid queries snap outward.
      CHECK(w(0.05, 0.95) == w(0.0, 1.0));
      CHECK(w(0.15, 0.25) == doctest::Approx(brute_pvar(x, 1, 3, p)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(control_pvar({0.0}, Eigen::MatrixXd::Zero(1, 1), 1.0), InvalidArgument);
  }

  TEST_CASE("super-additivity report") {
    SamplerSpec spec;
    spec.n_times = 64;
    const auto triples = sample_triples(spec, 0.0, 1.0);
    CHECK(check_superadditive(control_linear(1.0), triples).max_violation == 0.0);
    CHECK(check_superadditive(control_custom([](double s, double t) { return (t - s) * (t - s); }), triples)
              .max_violation == 0.0);
    const SimplexTriple half(0.0, 0.5, 1.0);
    const auto bad =
        check_superadditive(control_custom([](double s, double t) { return std::sqrt(t - s); }), std::span(&half, 1));
    CHECK(bad.max_violation == doctest::Approx(2.0 * std::sqrt(0.5) - 1.0));
    REQUIRE(bad.worst.has_value());
    CHECK(bad.worst->s == 0.5);

    // Grid-aligned triples of a p-variation control.
    std::vector<double> times;
    Eigen::MatrixXd x(9, 1);
    for (int i = 0; i < 9; ++i) {
      times.push_back(i / 8.0);
      x(i, 0) = std::sin(3.0 * i);
    }
    const Control w = control_pvar(times, x, 2.0);
    std::vector<SimplexTriple> grid;
    for (int i = 0; i < 9; ++i)
      for (int j = i; j < 9; ++j)
        for (int k = j; k < 9; ++k) grid.emplace_back(times[i], times[j], times[k]);
    CHECK(check_superadditive(w, grid).max_violation == 0.0);
    std::vector<double> many;
    Eigen::MatrixXd y(200, 2);
    for (int i = 0; i < 200; ++i) {
      many.push_back(i / 199.0);
      y(i, 0) = std::sin(7.0 * i);
      y(i, 1) = std::cos(3.0 * i * i);
    }
    std::vector<SimplexTriple> dense;
    for (int i = 0; i < 200; i += 3)
      for (int j = i; j < 200; j += 5)
        for (int k = j; k < 200; k += 7) dense.emplace_back(many[i], many[j], many[k]);
    for (double p : {1.0, 2.5}) CHECK(check_superadditive(control_pvar(many, y, p), dense).max_violation == 0.0);
  }

  TEST_CASE("power remainders") {
    const Remainder v2 = remainder_power(2.0);
    CHECK(v2(0.5) == 0.25);
    CHECK(v2.kappa() == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(2.0 * v2(0.25) <= v2.kappa() * v2(0.5));
    CHECK(remainder_power(1.5).kappa() == doctest::Approx(std::pow(2.0, -0.5)));
    CHECK(remainder_power(1.5)(0.0) == 0.0);
    CHECK_THROWS_AS(remainder_power(1.0), InvalidArgument);
    for (double theta : {1.1, 1.5, 2.0, 3.0}) {
      const Remainder v = remainder_power(theta);
      for (int i = 0; i < 1000; ++i) {
        const double d = std::pow(10.0, -6.0 + 6.0 * i / 999.0);
        CHECK(2.0 * v(d / 2.0) <= v.kappa() * v(d));
      }
    }
  }

  TEST_CASE("lambda bounds and defaults") {
    // kappa = 1/2: bound 1/(1 - log2 kappa) = 1/2, default max(0.9, 0.75).
    CHECK(lambda_lower_bound(0.5) == doctest::Approx(0.5));
    CHECK(default_lambda(0.5) == doctest::Approx(0.9));
    const double k = std::pow(2.0, -0.05);
    CHECK(default_lambda(k) == doctest::Approx(0.5 * (1.0 + 1.0 / 1.05)));
    const Remainder v = remainder_power(2.0).pow(0.9);
    CHECK(v.kappa() == doctest::Approx(std::pow(2.0, 0.1) * std::pow(0.5, 0.9)));
    CHECK(v.kappa() < 1.0);
  }

  TEST_CASE("theta statistic") {
    const Control w = control_linear(1.0);
    const Remainder v = remainder_power(2.0);
    CHECK(theta_stat(uniform_partition(1.0, 4), w, v, 0.9) == doctest::Approx(std::pow(0.0625, 0.1)));
    CHECK(theta_stat(Partition({0.0, 1.0}), w, v, 0.9) == doctest::Approx(1.0));
    CHECK_THROWS_AS(theta_stat(uniform_partition(1.0, 4), w, v, 0.4), InvalidArgument);
    Partition pi = uniform_partition(1.0, 3);
    double prev = theta_stat(pi, w, v, 0.9);
    for (int k = 0; k < 8; ++k) {
      pi = dyadic_refine(pi);
      const double th = theta_stat(pi, w, v, 0.9);
      CHECK(th < prev);
      prev = th;
    }
  }
}

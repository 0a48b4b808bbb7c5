#include <doctest.h>

#include <cmath>
#include <vector>

#include "sewflow/schemes.hpp"
#include "sewflow/sewing.hpp"
#include "sewflow/solutions.hpp"

using namespace sewflow;

namespace {

DiscretePath sine_path() {
  return sample_path([](double t) { return VectorXd::Constant(1, std::sin(t)); }, 1.0, 4096);
}

SamplerSpec young_sampler() {
  SamplerSpec s;
  s.n_times = 16;
  s.n_states = 2;
  s.state_lo = -3.0;
  s.state_hi = 3.0;
  return s;
}

FlowApprox<VectorXd> sew_young(const AlmostFlow<VectorXd>& phi, std::size_t levels) {
  return sew(phi, SewSchedule{uniform_partition(1.0, 16), levels, levels - 1, 1e-14, young_sampler(), std::nullopt});
}

DPath<VectorXd> from_function(const Partition& grid, const std::function<double(double)>& y) {
  std::vector<VectorXd> values;
  for (double t : grid.points()) values.push_back(VectorXd::Constant(1, y(t)));
  return DPath<VectorXd>(grid, values);
}

// f(a) = sqrt|a|: dy = f(y) dt from 0 has the solutions 0 and t^2/4.
VectorField sqrt_field() {
  return VectorField{"sqrt", 1, 1,
                     [](const VectorXd& a) { return MatrixXd(MatrixXd::Constant(1, 1, std::sqrt(std::abs(a(0))))); },
                     nullptr, 0.5, 1.0, 0.0, 1.0, 0.0};
}

}  // namespace

TEST_SUITE("solutions") {
  TEST_CASE("defect of exact and shifted solutions") {
    AlmostFlow<VectorXd> id{[](double, double, const VectorXd& a) { return a; }, GrowthGauge<VectorXd>::constant(1.0),
                            [](double) { return 0.0; }, [](double) { return 0.0; }, remainder_power(2.0),
                            control_linear(1.0), 1.0, VectorXd::Zero(1)};
    const auto flat = from_function(uniform_partition(1.0, 32), [](double) { return 0.7; });
    CHECK(davie_defect(flat, id).k_hat == 0.0);
    CHECK(davie_defect(flat, id).grid_points == 33);

    const auto phi = young_flow(field_scalar_exponential(), sine_path(), 1.0);
    auto exact = [](double t) { return std::exp(std::sin(t)); };
    const auto y64 = from_function(uniform_partition(1.0, 64), exact);
    const auto y256 = from_function(uniform_partition(1.0, 256), exact);
    const double k64 = davie_defect(y64, phi).k_hat;
    const double k256 = davie_defect(y256, phi).k_hat;
    CHECK(std::isfinite(k64));
    CHECK(k256 <= 1.5 * k64);

    // The shifted path misses the step by |x_{s,t}|, so its ratio grows like (t - s)^{-1}.
    const auto s64 = from_function(uniform_partition(1.0, 64), [&](double t) { return exact(t) + 1.0; });
    const auto s256 = from_function(uniform_partition(1.0, 256), [&](double t) { return exact(t) + 1.0; });
    const auto d64 = davie_defect(s64, phi);
    const auto d256 = davie_defect(s256, phi);
    CHECK(d64.k_hat > 10.0 * k64);
    CHECK(d256.k_hat > 3.0 * d64.k_hat);
    REQUIRE(d256.worst.has_value());
    CHECK(d256.worst->second - d256.worst->first == doctest::Approx(1.0 / 256));

    AlmostFlow<VectorXd> short_phi = phi;
    short_phi.horizon = 0.5;
    CHECK_THROWS_AS(davie_defect(y64, short_phi), InvalidArgument);
  }

  TEST_CASE("solutions from sewn flows") {
    const DiscretePath t = sample_path([](double u) { return VectorXd::Constant(1, u); }, 1.0, 16);
    const auto phi = young_flow(field_scalar_exponential(), t, 1.0);
    const auto approx = sew_young(phi, 10);
    const VectorXd a = VectorXd::Constant(1, 0.8);
    const Partition grid = uniform_partition(1.0, 64);
    const auto y = flow_to_solution(approx, 0.0, a, grid);
    CHECK(y.start() == a);
    for (double u : grid.points()) CHECK(y.at(u)(0) == doctest::Approx(0.8 * std::exp(u)).epsilon(1e-3));

    const Partition late({0.25, 0.5, 1.0});
    const auto yl = flow_to_solution(approx, 0.25, a, late);
    CHECK(yl.at(0.5)(0) == doctest::Approx(0.8 * std::exp(0.25)).epsilon(1e-3));
    CHECK_THROWS_AS(flow_to_solution(approx, 0.25, a, grid), InvalidArgument);
    CHECK_THROWS_AS(flow_to_solution(approx, 1.0, a, Partition({1.0})), InvalidArgument);

    AdditiveFunctional<VectorXd> alpha{[](double s, double u) { return VectorXd(VectorXd::Constant(1, s * (u - s))); },
                                       control_linear(1.0), remainder_power(2.0), 0.25, 1.0, VectorXd::Zero(1)};
    const auto add = sew(additive_flow(alpha), SewSchedule{uniform_partition(1.0, 4), 8, 1, 1e-14, {}, std::nullopt});
    const auto ya = flow_to_solution(add, 0.0, VectorXd(VectorXd::Zero(1)), Partition({0.0, 0.25, 0.5, 1.0}));
    CHECK(ya.at(1.0)(0) - ya.at(0.25)(0) == add(0.25, 1.0, VectorXd(VectorXd::Zero(1)))(0));
  }

  TEST_CASE("defect against the uniform bound") {
    const auto phi = young_flow(field_scalar_exponential(), sine_path(), 1.0);
    const auto approx = sew_young(phi, 10);
    const auto y = flow_to_solution(approx, 0.0, VectorXd(VectorXd::Ones(1)), uniform_partition(1.0, 64));
    const auto report = davie_defect(y, phi);
    const double l_hat = approx.fitted_bound();
    CHECK(report.k_hat > 0.0);
    CHECK(report.k_hat <= 2.0 * l_hat);
    // The defect is normalised by the gauge at the start, the bound by the gauge at y_s.
    CHECK(report.k_hat <= l_hat * approx.fitted_gauge_growth());
  }

  TEST_CASE("restriction and thinning") {
    const auto phi = young_flow(field_scalar_exponential(), sine_path(), 1.0);
    const auto approx = sew_young(phi, 9);
    const auto y = flow_to_solution(approx, 0.0, VectorXd(VectorXd::Ones(1)), uniform_partition(1.0, 64));
    const double k = davie_defect(y, phi).k_hat;
    for (std::size_t stride : {2, 3, 7}) CHECK(davie_defect(thin(y, stride), phi).k_hat <= k);
    const auto tail = restrict(y, 0.25, 1.0);
    CHECK(tail.r() == 0.25);
    CHECK(tail.grid().size() == 49);
    CHECK(davie_defect(tail, phi).k_hat <= k);
    CHECK(thin(y, 1).values() == y.values());
    CHECK(thin(y, 10).grid().back() == 1.0);
    CHECK_THROWS_AS(thin(y, 0), InvalidArgument);
    CHECK_THROWS_AS(restrict(y, 0.3, 1.0), InvalidArgument);
  }

  TEST_CASE("splicing") {
    const auto phi = young_flow(field_scalar_exponential(), sine_path(), 1.0);
    const auto approx = sew_young(phi, 9);
    const Partition grid = uniform_partition(1.0, 64);
    const auto y = flow_to_solution(approx, 0.0, VectorXd(VectorXd::Ones(1)), grid);

    const auto same = splice(y, restrict(y, 0.5, 1.0), 0.5);
    CHECK(same.grid() == y.grid());
    CHECK(same.values() == y.values());

    const auto z = flow_to_solution(approx, 0.5, y.at(0.5), restrict(y, 0.5, 1.0).grid());
    const auto joined = splice(y, z, 0.5);
    const double ky = davie_defect(y, phi).k_hat;
    const double kz = davie_defect(z, phi).k_hat;
    CHECK(davie_defect(joined, phi).k_hat <= (2.0 + approx.delta_hat) * std::max(ky, kz));

    std::vector<VectorXd> off = z.values();
    off[0](0) += 1e-3;
    CHECK_THROWS_AS(splice(y, DPath<VectorXd>(z.grid(), off), 0.5), InvalidArgument);
    CHECK_THROWS_AS(splice(y, z, 0.51), InvalidArgument);
    CHECK_THROWS_AS(DPath<VectorXd>(grid, {VectorXd::Zero(1)}), InvalidArgument);
  }

  TEST_CASE("splicing two solutions of a non-unique equation") {
    const DiscretePath t = sample_path([](double u) { return VectorXd::Constant(1, u); }, 1.0, 64);
    const auto phi = young_flow(sqrt_field(), t, 1.0);
    const Partition grid = uniform_partition(1.0, 64);
    const auto rest = from_function(grid, [](double) { return 0.0; });
    const auto late = from_function(restrict(rest, 0.5, 1.0).grid(), [](double u) { return (u - 0.5) * (u - 0.5) / 4.0; });
    const auto rising = from_function(grid, [](double u) { return u * u / 4.0; });
    CHECK(davie_defect(rest, phi).k_hat == 0.0);
    const double k_rise = davie_defect(rising, phi).k_hat;
    CHECK(k_rise > 0.0);
    CHECK(std::isfinite(k_rise));
    const auto joined = splice(rest, late, 0.5);
    const double k = davie_defect(joined, phi).k_hat;
    CHECK(std::isfinite(k));
    CHECK(k > 0.0);
    CHECK(joined.at(1.0)(0) == doctest::Approx(1.0 / 16));
  }
}

#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"

#include "asd/process.hpp"
#include "asd/time_grid.hpp"

using namespace asd;
using testing::simpson;
using testing::unit;

TEST_CASE("vp schedule drift is -u/2") {
  const auto ou = make_ou_schedule(5.0);
  CHECK(ou.h(0.3) == -1.0);
  CHECK(ou.u(0.3) == 2.0);
  for (double c : {0.5, 1.0, 3.0}) {
    const auto s = make_vp_schedule([c](double) { return c; }, 2.0);
    CHECK(s.h(1.1) == doctest::Approx(-c / 2));
  }
  const auto lin = make_vp_schedule([](double t) { return 1.0 + t; }, 2.0);
  CHECK(lin.h(0.5) == doctest::Approx(-0.75));
}

TEST_CASE("ve schedule has zero drift") {
  const auto one = make_ve_schedule([](double) { return 1.0; }, 3.0);
  for (double t : {0.0, 0.7, 3.0}) CHECK(one.h(t) == 0.0);
  const auto ex = make_ve_schedule([](double t) { return std::exp(t); }, 3.0);
  CHECK(ex.h(2.0) == 0.0);
  CHECK(ex.u(1.0) == doctest::Approx(std::exp(1.0)));
  const Vector x = testing::vec({0.3, -1.2});
  const Vector noise = Vector::Zero(2);
  CHECK((euler_forward_step(ex, x, 0.5, 0.25, noise) - x).norm() == 0.0);
}

TEST_CASE("schedule validation") {
  CHECK_THROWS_AS(make_ve_schedule([](double) { return 0.0; }, 1.0), InvalidSchedule);
  CHECK_THROWS_AS(make_ve_schedule([](double t) { return 1.0 - t; }, 2.0), InvalidSchedule);
  CHECK_THROWS_AS(make_ou_schedule(0.0), InvalidSchedule);
  CHECK_THROWS_AS(make_vp_schedule([](double) { return NAN; }, 1.0), InvalidSchedule);
}

TEST_CASE("schedule presets") {
  CHECK(parse_schedule_preset("ou", 2.0).u(1.0) == 2.0);
  CHECK(parse_schedule_preset("ve:1", 2.0).u(1.5) == 1.0);
  CHECK(parse_schedule_preset("ve:const:3", 2.0).u(0.1) == 3.0);
  CHECK(parse_schedule_preset("vp:linear:1:2", 2.0).u(0.5) == doctest::Approx(2.0));
  CHECK(parse_schedule_preset("vp:linear:1:2", 2.0).h(0.5) == doctest::Approx(-1.0));
  CHECK(parse_schedule_preset("ve:exp:2:0.5", 2.0).u(2.0) == doctest::Approx(2.0 * std::exp(1.0)));
  CHECK_THROWS_AS(parse_schedule_preset("cosine", 1.0), InvalidSchedule);
  CHECK_THROWS_AS(parse_schedule_preset("ve:abc", 1.0), InvalidSchedule);
  CHECK_THROWS_AS(parse_schedule_preset("vp:linear:1", 1.0), InvalidSchedule);
}

TEST_CASE("alpha closed forms") {
  const auto ou = make_ou_schedule(4.0);
  CHECK(compute_alpha(ou, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(compute_alpha(ou, 0.0) == 0.0);
  for (double t : {0.1, 0.5, 1.0, 2.0}) {
    CHECK(std::abs(compute_alpha(ou, t) - t) <= 1e-9);
    CHECK(std::abs(compute_r(ou, t) - 1.0) <= 1e-9);
  }
  const auto ve = make_ve_schedule([](double) { return 1.0; }, 4.0);
  CHECK(std::abs(compute_alpha(ve, 3.0) - 0.5 * std::log(4.0)) <= 1e-9);
  CHECK(std::abs(compute_r(ve, 3.0) - 2.0) <= 1e-9);
  CHECK(compute_r(ve, 0.0) == 1.0);
}

TEST_CASE("alpha against an independent quadrature") {
  // u(t) = 1 + t, h = -u/2: H(t) = -(t + t^2/2)/2, and the inner integral
  // has the closed form exp(t + t^2/2) - 1.
  const auto s = make_vp_schedule([](double t) { return 1.0 + t; }, 3.0);
  for (double t : {0.25, 1.0, 2.5}) {
    const double inner =
        simpson([](double tau) { return (1.0 + tau) * std::exp(tau + tau * tau / 2); }, 0.0, t);
    CHECK(inner == doctest::Approx(std::exp(t + t * t / 2) - 1.0).epsilon(1e-10));
    const double expect = 0.5 * std::log1p(inner);
    CHECK(compute_alpha(s, t) == doctest::Approx(expect).epsilon(1e-9));
    CHECK(integrated_drift(s, t) == doctest::Approx(-(t + t * t / 2) / 2).epsilon(1e-10));
    CHECK(compute_r(s, t) == doctest::Approx(std::exp(expect - (t + t * t / 2) / 2)).epsilon(1e-9));
  }
}

TEST_CASE("alpha is monotone") {
  for (const char* p : {"ou", "ve:1", "vp:linear:0.1:4", "ve:exp:0.5:1"}) {
    const auto s = parse_schedule_preset(p, 3.0);
    double prev = -1.0;
    for (int k = 0; k <= 60; ++k) {
      const double a = compute_alpha(s, 3.0 * k / 60);
      CHECK(a >= prev - 2e-10);
      prev = a;
    }
  }
}

TEST_CASE("reparam map round trip") {
  for (const char* p : {"ou", "ve:1", "vp:linear:0.1:4"}) {
    const ReparamMap map(parse_schedule_preset(p, 3.0));
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unif(0.0, 3.0);
    for (int k = 0; k < 50; ++k) {
      const double t = unif(rng);
      CHECK(std::abs(map.alpha_inverse(map.alpha(t)) - t) <= 1e-8);
      CHECK(map.alpha(t) == doctest::Approx(compute_alpha(map.schedule(), t)).epsilon(1e-9));
    }
    CHECK_THROWS_AS(map.alpha_inverse(map.alpha_max() + 0.1), OutOfHorizon);
    CHECK_THROWS_AS(map.alpha_inverse(-0.1), OutOfHorizon);
  }
}

TEST_CASE("SL time change for OU") {
  const double T = 4.0;
  const ReparamMap map(make_ou_schedule(T));
  CHECK(sl_ou_time(1.0) == doctest::Approx(0.5 * std::log(2.0)));
  const SlToDdpm one = sl_time_of_ddpm(map, 1.0);
  CHECK(one.scale == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
  CHECK(one.t_ddpm == doctest::Approx(T - 0.5 * std::log(2.0)).epsilon(1e-9));
  CHECK(map.gamma(1.0) == doctest::Approx(one.scale));
  CHECK(map.zeta(1.0) == doctest::Approx(one.t_ddpm));

  const SlToDdpm e = sl_time_of_ddpm(map, 1.0 / (std::exp(2.0) - 1.0));
  CHECK(sl_ou_time(1.0 / (std::exp(2.0) - 1.0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e.t_ddpm == doctest::Approx(T - 1.0).epsilon(1e-9));

  CHECK(sl_ou_time(1e9) < 1e-9);
  CHECK(sl_time_of_ddpm(map, 1e9).t_ddpm == doctest::Approx(T).epsilon(1e-9));
  // s(t) = 5 > alpha(T) = 4
  CHECK_THROWS_AS(sl_time_of_ddpm(map, 1.0 / (std::exp(10.0) - 1.0)), OutOfHorizon);
}

TEST_CASE("forward Euler step") {
  const auto pure = make_ve_schedule([](double) { return 1.0; }, 2.0);
  const Vector e1 = unit(2, 0);
  CHECK((euler_forward_step(pure, Vector::Zero(2), 0.0, 1.0, e1) - e1).norm() == 0.0);
  const auto ou = make_ou_schedule(2.0);
  CHECK((euler_forward_step(ou, e1, 0.0, 0.1, Vector::Zero(2)) - 0.9 * e1).norm() <= 1e-15);
  CHECK(euler_forward_step(ou, Vector::Zero(3), 0.5, 0.1, Vector::Zero(3)).norm() == 0.0);
}

TEST_CASE("time grids") {
  const TimeGrid g = TimeGrid::sl_uniform(20.0, 200);
  CHECK(g.steps() == 200);
  CHECK(g.is_sl());
  CHECK(g.time(0) == 0.0);
  CHECK(g.horizon() == doctest::Approx(20.0));
  CHECK(g.step(17) == doctest::Approx(0.1));
  CHECK(g.sigma(1) == doctest::Approx(std::sqrt(0.1)));
  const TimeGrid geo = TimeGrid::sl_geometric(10.0, 50, 1e-3);
  CHECK(geo.time(1) == doctest::Approx(1e-3));
  CHECK(geo.horizon() == doctest::Approx(10.0));
  for (int i = 1; i < 49; ++i) CHECK(geo.step(i + 1) > geo.step(i));
  CHECK(geo.max_step() == doctest::Approx(geo.step(49)));
  CHECK_THROWS_AS(TimeGrid({0.0, 1.0, 1.0}, {1.0, 1.0}), ParameterError);
  CHECK_THROWS_AS(TimeGrid({0.0}, {}), ParameterError);
  CHECK_THROWS_AS(TimeGrid({0.0, 1.0}, {0.0}), ParameterError);
  CHECK_FALSE(TimeGrid({0.0, 1.0}, {0.5}).is_sl());
}

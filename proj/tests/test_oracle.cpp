#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"

#include "asd/oracle.hpp"
#include "asd/worker_pool.hpp"

using namespace asd;
using testing::simpson;
using testing::unit;
using testing::vec;

namespace {

MixtureTarget two_point(int d) {
  return MixtureTarget::point_masses({0.5, 0.5}, {-unit(d, 0), unit(d, 0)});
}

MixtureTarget mixture_1d() {
  return MixtureTarget::gaussians({0.5, 0.3, 0.2}, {vec({-2.0}), vec({2.0}), vec({0.0})},
                                  {0.5, 0.3, 0.7});
}

// E[x | t x + sqrt(t) xi = y] for a 1-D mixture density by direct quadrature.
double quadrature_posterior_1d(const MixtureTarget& mu, double t, double y) {
  auto prior = [&](double x) {
    double p = 0.0;
    for (std::size_t k = 0; k < mu.weights.size(); ++k) {
      const double s = mu.stds[k];
      const double z = (x - mu.centers[k][0]) / s;
      p += mu.weights[k] * std::exp(-0.5 * z * z) / (s * std::sqrt(2.0 * M_PI));
    }
    return p;
  };
  auto lik = [&](double x) { return std::exp(-(y - t * x) * (y - t * x) / (2.0 * t)); };
  const double num = simpson([&](double x) { return x * prior(x) * lik(x); }, -12.0, 12.0, 200000);
  const double den = simpson([&](double x) { return prior(x) * lik(x); }, -12.0, 12.0, 200000);
  return num / den;
}

}  // namespace

TEST_CASE("target validation") {
  CHECK_NOTHROW(two_point(2).validate());
  CHECK_THROWS_AS(MixtureTarget::point_masses({0.5, 0.4}, {vec({0.0}), vec({1.0})}), InputError);
  MixtureTarget bad = two_point(2);
  bad.centers[1] = vec({1.0});
  CHECK_THROWS_AS(bad.validate(), InputError);
  CHECK_THROWS_AS(MixtureTarget::gaussians({1.0}, {vec({0.0})}, {-1.0}), InputError);
}

TEST_CASE("posterior mean of a point mass") {
  const Vector x0 = vec({0.3, -1.5});
  const MixtureTarget mu = MixtureTarget::point_masses({1.0}, {x0});
  for (double t : {0.0, 0.01, 1.0, 100.0}) {
    CHECK((posterior_mean(mu, t, vec({5.0, -7.0})) - x0).norm() == 0.0);
  }
}

TEST_CASE("posterior mean of a Gaussian") {
  const MixtureTarget g = MixtureTarget::gaussians({1.0}, {Vector::Zero(3)}, {1.0});
  CHECK((posterior_mean(g, 1.0, unit(3, 0)) - 0.5 * unit(3, 0)).norm() <= 1e-15);
  // Shrinkage limit
  const Vector x = vec({0.4, -1.3, 2.0});
  const Vector m = posterior_mean(g, 1e4, 1e4 * x);
  CHECK((m - x).norm() / x.norm() <= 1e-3);
}

TEST_CASE("posterior mean of the two-point target is tanh") {
  const MixtureTarget mu = two_point(2);
  CHECK(posterior_mean(mu, 3.0, Vector::Zero(2)).norm() == 0.0);
  for (double t : {0.1, 1.0, 7.0}) {
    for (double y1 : {-3.0, -0.2, 0.5, 2.0}) {
      const Vector y = vec({y1, 0.8});
      const Vector m = posterior_mean(mu, t, y);
      CHECK(m[0] == doctest::Approx(std::tanh(y1)).epsilon(1e-13));
      CHECK(m[1] == 0.0);
    }
  }
  // Far tails stay finite.
  CHECK(posterior_mean(mu, 1e6, vec({1e6, 0.0}))[0] == doctest::Approx(1.0));
}

TEST_CASE("posterior mean of a 1-D mixture matches quadrature") {
  const MixtureTarget mu = mixture_1d();
  for (double t : {0.2, 1.0, 5.0}) {
    for (double y : {-4.0, -0.5, 0.0, 1.5, 6.0}) {
      CHECK(posterior_mean(mu, t, vec({y}))[0] ==
            doctest::Approx(quadrature_posterior_1d(mu, t, y)).epsilon(1e-8));
    }
  }
}

TEST_CASE("prior limit and purity") {
  const MixtureTarget mu = MixtureTarget::gaussians(
      {0.5, 0.3, 0.2}, {vec({-2.0, 0.0}), vec({2.0, 1.0}), vec({0.0, -2.0})}, {0.5, 0.3, 0.7});
  const Vector mean = mu.mean();
  CHECK((mean - vec({-0.4, -0.1})).norm() <= 1e-15);
  for (const Vector& y : {vec({0.0, 0.0}), vec({40.0, -3.0})}) {
    CHECK((posterior_mean(mu, 0.0, y) - mean).norm() == 0.0);
  }
  const Vector y = vec({0.7, -0.3});
  const Vector a = posterior_mean(mu, 1.3, y);
  const Vector b = posterior_mean(mu, 1.3, y);
  CHECK((a.array() == b.array()).all());
}

TEST_CASE("covariance trace") {
  CHECK(covariance_trace(MixtureTarget::point_masses({1.0}, {vec({2.0, 1.0})})) == 0.0);
  CHECK(covariance_trace(MixtureTarget::gaussians({1.0}, {Vector::Zero(4)}, {1.0})) ==
        doctest::Approx(4.0));
  // Brute force over the two support points.
  const MixtureTarget tp = two_point(3);
  const Vector mean = 0.5 * tp.centers[0] + 0.5 * tp.centers[1];
  double tr = 0.0;
  for (const auto& c : tp.centers) tr += 0.5 * (c - mean).squaredNorm();
  CHECK(covariance_trace(tp) == doctest::Approx(tr));
  CHECK(tr == 1.0);
}

TEST_CASE("Monte Carlo posterior mean") {
  const Vector x0 = vec({1.0, 2.0});
  const auto pm = monte_carlo_posterior_mean(MixtureTarget::point_masses({1.0}, {x0}), 1.0,
                                             vec({-3.0, 0.0}), 1000, 5);
  CHECK((pm.mean - x0).norm() == 0.0);

  const MixtureTarget g = MixtureTarget::gaussians({1.0}, {Vector::Zero(2)}, {1.0});
  const auto eg = monte_carlo_posterior_mean(g, 1.0, unit(2, 0), 1'000'000, 9);
  for (int j = 0; j < 2; ++j) {
    CHECK(std::abs(eg.mean[j] - 0.5 * unit(2, 0)[j]) <= 5.0 * eg.std_error[j]);
  }

  const MixtureTarget tp = two_point(2);
  const Vector y = 2.0 * unit(2, 0);
  const auto et = monte_carlo_posterior_mean(tp, 2.0, y, 1'000'000, 10);
  const Vector exact = posterior_mean(tp, 2.0, y);
  CHECK(std::abs(et.mean[0] - exact[0]) <= 5.0 * et.std_error[0] + 1e-12);

  CHECK_THROWS_AS(monte_carlo_posterior_mean(g, 1.0, unit(2, 0), 10, 1), ParameterError);
  CHECK_THROWS_AS(monte_carlo_posterior_mean(g, 0.0, unit(2, 0), 1000, 1), ParameterError);
  // A needle-thin likelihood far from the prior mass collapses the ESS.
  CHECK_THROWS_AS(monte_carlo_posterior_mean(g, 1e6, vec({1e7, 0.0}), 1000, 1),
                  UnreliableEstimate);
}

TEST_CASE("oracle input checks") {
  const MixtureTarget g = MixtureTarget::gaussians({1.0}, {Vector::Zero(2)}, {1.0});
  CHECK_THROWS_AS(posterior_mean(g, 1.0, Vector::Zero(3)), InputError);
  CHECK_THROWS_AS(posterior_mean(g, -1.0, Vector::Zero(2)), InputError);
  CHECK_THROWS_AS(posterior_mean(g, 1.0, vec({NAN, 0.0})), InputError);
}

TEST_CASE("counted oracle") {
  const MixtureOracle inner(two_point(2));
  CountedOracle counted(inner);
  counted.call(1.0, Vector::Zero(2));
  CHECK(counted.stats().sequential_calls == 1);
  CHECK(counted.stats().total_evals == 1);
  CHECK(counted.stats().parallel_rounds == 0);
  counted.reset();
  std::vector<double> ts(8, 1.0);
  std::vector<Vector> ys(8, unit(2, 0));
  WorkerPool pool(3);
  const auto out = counted.round(ts, ys, &pool);
  CHECK(out.size() == 8);
  CHECK(counted.stats().parallel_rounds == 1);
  CHECK(counted.stats().total_evals == 8);
  CHECK(counted.stats().sequential_calls == 0);
  CHECK(counted.stats().adaptive_complexity() == 1);
  for (const auto& v : out) CHECK(v[0] == doctest::Approx(std::tanh(1.0)));
}

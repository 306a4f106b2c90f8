#include <cmath>

#include "doctest.h"
#include "helpers.hpp"

#include "asd/asd.hpp"
#include "asd/worker_pool.hpp"

using namespace asd;
using testing::unit;
using testing::vec;

namespace {

MixtureTarget mixture2() {
  return MixtureTarget::gaussians({0.5, 0.3, 0.2},
                                  {vec({-2.0, 0.0}), vec({2.0, 1.0}), vec({0.0, -2.0})},
                                  {0.5, 0.3, 0.7});
}

bool same(const std::vector<Vector>& a, const std::vector<Vector>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i].array() == b[i].array()).all()) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("proposals from a point mass") {
  const Vector x0 = vec({1.0, -1.0});
  const MixtureOracle pm(MixtureTarget::point_masses({1.0}, {x0}));
  CountedOracle c(pm);
  const TimeGrid grid = TimeGrid::sl_uniform(4.0, 16);
  const RandomTape tape = RandomTape::draw(16, 2, 3);
  const Vector ya = vec({0.2, 0.3});
  SpeculationWindow w = build_proposals(c, grid, 5, 4, ya, tape);
  CHECK(w.a == 5);
  CHECK(w.b == 9);
  CHECK(w.length() == 4);
  CHECK(c.stats().sequential_calls == 1);
  CHECK((w.v_a - x0).norm() == 0.0);
  for (int k = 0; k < 4; ++k) {
    const Vector& yhat = w.proposal_states[static_cast<std::size_t>(k)];
    CHECK((w.proposal_means[static_cast<std::size_t>(k)] - (yhat + 0.25 * x0)).norm() <= 1e-15);
  }
  // Telescoping: y-hat_b - y-hat_a = (t_b - t_a) v_a + sum sigma_i xi_i
  Vector noise = Vector::Zero(2);
  for (int i = 6; i <= 9; ++i) noise += grid.sigma(i) * tape.xi(i);
  const Vector lhs = w.proposal_states.back() - w.proposal_states.front();
  CHECK((lhs - ((grid.time(9) - grid.time(5)) * w.v_a + noise)).norm() <= 1e-13);

  compute_target_means(c, grid, w);
  CHECK(c.stats().parallel_rounds == 1);
  CHECK(c.stats().total_evals == 5);
  for (int k = 0; k < 4; ++k) {
    CHECK((w.target_means[static_cast<std::size_t>(k)] - w.proposal_means[static_cast<std::size_t>(k)])
              .norm() <= 1e-15);
  }
  const VerifierResult v = verify(w, tape);
  CHECK_FALSE(v.first_reject.has_value());
  CHECK(v.samples.size() == 4);
}

TEST_CASE("window is clipped at K") {
  const MixtureOracle g(mixture2());
  CountedOracle c(g);
  const TimeGrid grid = TimeGrid::sl_uniform(2.0, 10);
  const RandomTape tape = RandomTape::draw(10, 2, 1);
  const SpeculationWindow w = build_proposals(c, grid, 8, 5, Vector::Zero(2), tape);
  CHECK(w.b == 10);
  CHECK(w.proposal_means.size() == 2);
  CHECK(w.proposal_states.size() == 3);
  CHECK_THROWS_AS(build_proposals(c, grid, 10, 5, Vector::Zero(2), tape), ParameterError);
  CHECK_THROWS_AS(build_proposals(c, grid, 0, 0, Vector::Zero(2), tape), ParameterError);
}

TEST_CASE("target means match a scalar recomputation") {
  const MixtureTarget g1 = MixtureTarget::gaussians({1.0}, {Vector::Zero(1)}, {1.0});
  const MixtureOracle g(g1);
  CountedOracle c(g);
  const TimeGrid grid = TimeGrid::sl_uniform(3.0, 6);
  const RandomTape tape = RandomTape::draw(6, 1, 8);
  const double ya = 0.7;
  SpeculationWindow w = build_proposals(c, grid, 2, 3, vec({ya}), tape);
  compute_target_means(c, grid, w);
  // m(t, y) = y / (1 + t) for N(0, 1).
  const double eta = 0.5;
  double t = grid.time(2);
  double y = ya;
  const double va = ya / (1.0 + t);
  for (int k = 0; k < 3; ++k) {
    const double mhat = y + eta * va;
    const double m = y + eta * y / (1.0 + t);
    CHECK(w.proposal_means[static_cast<std::size_t>(k)][0] == doctest::Approx(mhat).epsilon(1e-15));
    CHECK(w.target_means[static_cast<std::size_t>(k)][0] == doctest::Approx(m).epsilon(1e-15));
    y = mhat + std::sqrt(eta) * tape.xi(3 + k)[0];
    t += eta;
  }
  // Forced agreement at the first index.
  CHECK(w.target_means[0][0] == w.proposal_means[0][0]);
}

TEST_CASE("verifier stops at the first rejection") {
  const TimeGrid grid = TimeGrid::sl_uniform(4.0, 8);
  const RandomTape tape = RandomTape::draw(8, 1, 2);
  SpeculationWindow w;
  w.a = 0;
  w.b = 4;
  w.v_a = vec({0.0});
  for (int k = 0; k < 4; ++k) {
    w.proposal_means.push_back(vec({0.1 * k}));
    w.target_means.push_back(vec({0.1 * k}));
    w.sigmas.push_back(grid.sigma(k + 1));
    w.proposal_states.push_back(vec({0.0}));
  }
  w.proposal_states.push_back(vec({0.0}));
  w.target_means[2] = vec({1e3});
  const VerifierResult v = verify(w, tape);
  REQUIRE(v.first_reject.has_value());
  CHECK(*v.first_reject == 3);
  CHECK(v.samples.size() == 3);
  CHECK(std::abs(v.samples[2][0] - 1e3) < 10.0);
}

TEST_CASE("point mass: no rejections, R = K / theta") {
  const MixtureOracle pm(MixtureTarget::point_masses({1.0}, {vec({0.5, -0.5})}));
  for (int theta : {1, 4, 5, 20}) {
    CountedOracle c(pm);
    AsdOptions o;
    o.theta = theta;
    const AsdRun run =
        sample_asd(c, TimeGrid::sl_uniform(10.0, 100), RandomTape::draw(100, 2, 4), o);
    CHECK(run.stats.iterations == 100 / theta);
    for (int a : run.stats.advances) CHECK(a == theta);
    CHECK(run.stats.oracle.sequential_calls == static_cast<std::uint64_t>(100 / theta));
    CHECK(run.stats.oracle.parallel_rounds == static_cast<std::uint64_t>(100 / theta));
  }
}

TEST_CASE("theta = 1 reproduces the sequential sampler bit for bit") {
  const MixtureOracle g(mixture2());
  const TimeGrid grid = TimeGrid::sl_uniform(20.0, 200);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const RandomTape tape = RandomTape::draw(200, 2, seed);
    CountedOracle a(g), b(g);
    const Trajectory seq = sample_sequential(a, grid, tape);
    AsdOptions o;
    o.theta = 1;
    const AsdRun run = sample_asd(b, grid, tape, o);
    CHECK(same(seq.states, run.trajectory.states));
    CHECK(run.stats.iterations == 200);
  }
}

TEST_CASE("ASD progress, first acceptance and accounting") {
  const MixtureOracle g(mixture2());
  const TimeGrid grid = TimeGrid::sl_uniform(20.0, 400);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    CountedOracle c(g);
    AsdOptions o;
    o.theta = 12;
    o.refresh_tape = seed % 2 == 1;
    const AsdRun run = sample_asd(c, grid, RandomTape::draw(400, 2, seed), o);
    const auto& s = run.stats;
    CHECK(s.iterations <= 400);
    int total = 0;
    for (int a : s.advances) {
      CHECK(a >= 1);
      CHECK(a <= 12);
      total += a;
    }
    CHECK(total == 400);
    CHECK(s.position_accepts[0] == static_cast<std::uint64_t>(s.iterations));
    CHECK(s.position_trials[0] == static_cast<std::uint64_t>(s.iterations));
    CHECK(s.oracle.sequential_calls == static_cast<std::uint64_t>(s.iterations));
    CHECK(s.oracle.parallel_rounds == static_cast<std::uint64_t>(s.iterations));
    CHECK(run.trajectory.states.size() == 401);
  }
}

TEST_CASE("ASD is identical across thread counts") {
  const MixtureOracle g(mixture2());
  const TimeGrid grid = TimeGrid::sl_uniform(20.0, 300);
  const RandomTape tape = RandomTape::draw(300, 2, 99);
  std::vector<std::vector<Vector>> runs;
  for (std::size_t threads : {1, 4, 8}) {
    WorkerPool pool(threads);
    CountedOracle c(g);
    AsdOptions o;
    o.theta = 10;
    o.pool = &pool;
    runs.push_back(sample_asd(c, grid, tape, o).trajectory.states);
  }
  CHECK(same(runs[0], runs[1]));
  CHECK(same(runs[0], runs[2]));
}

TEST_CASE("default theta") {
  // (1000 / (1 * 0.02 * 2))^(1/3) = 25000^(1/3) = 29.24
  long brute = 1;
  while ((brute + 0.5) * (brute + 0.5) * (brute + 0.5) < 25000.0) ++brute;
  CHECK(brute == 29);
  CHECK(default_theta(1000, 0.02, 1.0, 2) == 29);
  CHECK(default_theta(10, 5.0, 1.0, 2) == 1);
  CHECK(default_theta(8 * 3, 1.0, 1.5, 2) == 2);
  CHECK(default_theta(200, 0.1, 0.0, 2) == 200);
  CHECK(default_theta(5, 1e-9, 1.0, 1) == 5);
  CHECK_THROWS_AS(default_theta(0, 0.1, 1.0, 1), ParameterError);
}

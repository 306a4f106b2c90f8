#include "asd/asd.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "asd/grs.hpp"
#include "asd/worker_pool.hpp"

namespace asd {

namespace {

constexpr std::uint64_t kRefreshStream = 0xA5D;

OracleStats delta(const OracleStats& after, const OracleStats& before) {
  return {after.sequential_calls - before.sequential_calls,
          after.parallel_rounds - before.parallel_rounds, after.total_evals - before.total_evals};
}

}  // namespace

SpeculationWindow build_proposals(CountedOracle& oracle, const TimeGrid& grid, int a, int theta,
                                  const Vector& y_a, const RandomTape& tape) {
  const int K = grid.steps();
  if (a < 0 || a >= K) throw ParameterError("build_proposals: need 0 <= a < K");
  if (theta < 1) throw ParameterError("speculation length must be >= 1");
  SpeculationWindow w;
  w.a = a;
  w.b = std::min(K, a + theta);
  w.v_a = oracle.call(grid.time(a), y_a);
  const auto n = static_cast<std::size_t>(w.b - a);
  w.proposal_means.reserve(n);
  w.proposal_states.reserve(n + 1);
  w.sigmas.reserve(n);
  w.proposal_states.push_back(y_a);
  for (int i = a; i < w.b; ++i) {
    const double sigma = grid.sigma(i + 1);
    Vector mean = w.proposal_states.back() + grid.step(i) * w.v_a;
    w.proposal_states.push_back(mean + sigma * tape.xi(i + 1));
    w.proposal_means.push_back(std::move(mean));
    w.sigmas.push_back(sigma);
  }
  return w;
}

void compute_target_means(CountedOracle& oracle, const TimeGrid& grid, SpeculationWindow& w,
                          WorkerPool* pool) {
  const auto n = static_cast<std::size_t>(w.length());
  if (w.proposal_states.size() != n + 1) {
    throw ParameterError("compute_target_means: proposals have not been built");
  }
  std::vector<double> times(n);
  for (std::size_t k = 0; k < n; ++k) times[k] = grid.time(w.a + static_cast<int>(k));
  const std::vector<Vector> g =
      oracle.round(times, std::span<const Vector>(w.proposal_states.data(), n), pool);
  w.target_means.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    w.target_means[k] = w.proposal_states[k] + grid.step(w.a + static_cast<int>(k)) * g[k];
  }
}

VerifierResult verify(const SpeculationWindow& w, const RandomTape& tape, WorkerPool* pool) {
  const auto n = static_cast<std::size_t>(w.length());
  if (w.target_means.size() != n) throw ParameterError("verify: target means missing");
  std::vector<GrsOutcome> out(n);
  parallel_for(pool, n, [&](std::size_t k) {
    const int i = w.a + 1 + static_cast<int>(k);
    out[k] = grs_step(tape.u(i), tape.xi(i), w.proposal_means[k], w.target_means[k], w.sigmas[k]);
  });
  VerifierResult res;
  res.samples.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    res.samples.push_back(std::move(out[k].sample));
    if (!out[k].accepted) {
      res.first_reject = w.a + 1 + static_cast<int>(k);
      break;
    }
  }
  return res;
}

AsdRun sample_asd(CountedOracle& oracle, const TimeGrid& grid, const RandomTape& tape,
                  const AsdOptions& options) {
  const int K = grid.steps();
  if (options.theta < 1) throw ParameterError("speculation length must be >= 1");
  if (tape.steps() < K) {
    throw TapeError("tape holds " + std::to_string(tape.steps()) + " steps, grid needs " +
                    std::to_string(K));
  }
  if (tape.dim() != oracle.dim()) throw TapeError("tape dimension does not match the oracle");

  const OracleStats before = oracle.stats();
  RandomTape refreshed;
  std::mt19937_64 refresh_rng(mix_seed(tape.seed(), kRefreshStream));
  if (options.refresh_tape) refreshed = tape;
  const RandomTape& active = options.refresh_tape ? refreshed : tape;

  AsdRun run{Trajectory{grid, {}}, {}};
  auto& states = run.trajectory.states;
  states.reserve(static_cast<std::size_t>(K) + 1);
  states.push_back(Vector::Zero(oracle.dim()));
  const auto width = static_cast<std::size_t>(std::min(options.theta, K));
  run.stats.position_trials.assign(width, 0);
  run.stats.position_accepts.assign(width, 0);

  int a = 0;
  while (a < K) {
    if (options.refresh_tape) {
      refreshed.redraw(a + 1, std::min(K, a + options.theta), refresh_rng);
    }
    SpeculationWindow w = build_proposals(oracle, grid, a, options.theta, states.back(), active);
    compute_target_means(oracle, grid, w, options.pool);
    VerifierResult vr = verify(w, active, options.pool);

    const int committed = static_cast<int>(vr.samples.size());
    const int accepted = vr.first_reject ? committed - 1 : committed;
    if (accepted < 1) {
      throw InternalError("first speculated step rejected at a = " + std::to_string(a));
    }
    for (int k = 0; k < committed; ++k) {
      ++run.stats.position_trials[static_cast<std::size_t>(k)];
      if (k < accepted) ++run.stats.position_accepts[static_cast<std::size_t>(k)];
    }
    for (auto& z : vr.samples) states.push_back(std::move(z));
    const int next = a + committed;
    if (next <= a || next > w.b) {
      throw InternalError("committed index did not advance strictly (a = " + std::to_string(a) +
                          ", next = " + std::to_string(next) + ")");
    }
    run.stats.advances.push_back(next - a);
    ++run.stats.iterations;
    a = next;
  }
  run.stats.oracle = delta(oracle.stats(), before);
  return run;
}

int default_theta(int steps, double eta, double beta, int dim) {
  if (steps < 1 || !(eta > 0.0) || dim < 1 || !(beta >= 0.0)) {
    throw ParameterError("default_theta: K, eta, d must be positive and beta >= 0");
  }
  if (beta == 0.0) return steps;
  const double x = static_cast<double>(steps) / (beta * eta * dim);
  const long long theta = std::llround(std::cbrt(x));
  return static_cast<int>(std::clamp<long long>(theta, 1, steps));
}

}  // namespace asd

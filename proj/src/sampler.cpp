#include "asd/sampler.hpp"

#include <cstdio>
#include <string>

namespace asd {

Vector target_mean(CountedOracle& oracle, const TimeGrid& grid, int i, const Vector& y_i) {
  if (i < 0 || i >= grid.steps()) {
    throw ParameterError("target_mean: step index " + std::to_string(i) + " out of range");
  }
  return y_i + grid.step(i) * oracle.call(grid.time(i), y_i);
}

Trajectory sample_sequential(CountedOracle& oracle, const TimeGrid& grid, const RandomTape& tape) {
  const int K = grid.steps();
  if (tape.steps() < K) {
    throw TapeError("tape holds " + std::to_string(tape.steps()) + " steps, grid needs " +
                    std::to_string(K));
  }
  if (tape.dim() != oracle.dim()) throw TapeError("tape dimension does not match the oracle");
  Trajectory traj{grid, {}};
  traj.states.reserve(static_cast<std::size_t>(K) + 1);
  traj.states.push_back(Vector::Zero(oracle.dim()));
  for (int i = 0; i < K; ++i) {
    const Vector mean = target_mean(oracle, grid, i, traj.states.back());
    traj.states.push_back(mean + grid.sigma(i + 1) * tape.xi(i + 1));
  }
  return traj;
}

DenoisedOutput denoised_output(const MeanOracle& oracle, const Trajectory& traj) {
  const double tK = traj.grid.horizon();
  if (!(tK > 0.0)) throw ParameterError("denoised_output needs t_K > 0");
  const Vector& yK = traj.states.back();
  return {yK / tK, oracle.mean(tK, yK)};
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const auto d = traj.states.empty() ? 0 : traj.states.front().size();
  out << "step,t";
  for (Eigen::Index j = 0; j < d; ++j) out << ",y_" << j;
  out << '\n';
  char buf[40];
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    out << i;
    std::snprintf(buf, sizeof buf, "%.17g", traj.grid.time(static_cast<int>(i)));
    out << ',' << buf;
    for (Eigen::Index j = 0; j < d; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", traj.states[i][j]);
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace asd

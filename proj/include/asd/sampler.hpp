#pragma once

#include <ostream>
#include <vector>

#include "asd/common.hpp"
#include "asd/oracle.hpp"
#include "asd/tape.hpp"
#include "asd/time_grid.hpp"

namespace asd {

struct Trajectory {
  TimeGrid grid;
  std::vector<Vector> states;  // y_0 .. y_K
};

/// b(eta_i, y_i) = y_i + eta_i m(t_i, y_i); one sequential oracle call.
Vector target_mean(CountedOracle& oracle, const TimeGrid& grid, int i, const Vector& y_i);

/// Euler scheme y_{i+1} = y_i + eta_i m(t_i, y_i) + sigma_{i+1} xi_{i+1} from
/// y_0 = 0. Makes exactly K sequential oracle calls.
Trajectory sample_sequential(CountedOracle& oracle, const TimeGrid& grid, const RandomTape& tape);

struct DenoisedOutput {
  Vector noisy;     // y_K / t_K
  Vector denoised;  // m(t_K, y_K)
};

DenoisedOutput denoised_output(const MeanOracle& oracle, const Trajectory& traj);

/// Columns step,t,y_0..y_{d-1}; 17 significant digits, LF line endings.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

}  // namespace asd

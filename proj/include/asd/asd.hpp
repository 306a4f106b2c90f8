#pragma once

// Autospeculative decoding: propose a window of future Euler steps from one
// oracle call, compute the true target means along the proposal path in one
// parallel round, then verify with the Gaussian rejection sampler and commit
// the accepted prefix plus the reflected sample at the first rejection.

#include <cstdint>
#include <optional>
#include <vector>

#include "asd/common.hpp"
#include "asd/oracle.hpp"
#include "asd/sampler.hpp"
#include "asd/tape.hpp"
#include "asd/time_grid.hpp"

namespace asd {

class WorkerPool;

struct SpeculationWindow {
  int a = 0;  // committed index
  int b = 0;  // min(K, a + theta)
  Vector v_a;                            // m(t_a, y_a)
  std::vector<Vector> proposal_means;    // m-hat_{a+1..b}
  std::vector<Vector> proposal_states;   // y-hat_{a..b}
  std::vector<Vector> target_means;      // m_{a+1..b}, empty until computed
  std::vector<double> sigmas;            // sigma_{a+1..b}

  int length() const { return b - a; }
};

struct VerifierResult {
  /// z_{a+1..} up to and including first_reject (all b - a when none).
  std::vector<Vector> samples;
  /// Absolute step index of the first rejection.
  std::optional<int> first_reject;
};

struct RunStats {
  int iterations = 0;
  std::vector<int> advances;
  OracleStats oracle;
  /// Indexed by window offset (0 = index a+1): how often the offset was
  /// examined by the verifier before the first rejection, and how often it
  /// was accepted.
  std::vector<std::uint64_t> position_trials;
  std::vector<std::uint64_t> position_accepts;
};

struct AsdOptions {
  int theta = 1;
  /// Fresh (u, xi) for every window instead of reusing the tape.
  bool refresh_tape = false;
  /// Within-round parallelism; null runs inline.
  WorkerPool* pool = nullptr;
};

struct AsdRun {
  Trajectory trajectory;
  RunStats stats;
};

/// One sequential call v_a = m(t_a, y_a), then m-hat_{i+1} = y-hat_i + eta_i v_a
/// and y-hat_{i+1} = m-hat_{i+1} + sigma_{i+1} xi_{i+1} for i = a..b-1.
SpeculationWindow build_proposals(CountedOracle& oracle, const TimeGrid& grid, int a, int theta,
                                  const Vector& y_a, const RandomTape& tape);

/// m_{i+1} = y-hat_i + eta_i m(t_i, y-hat_i) for i = a..b-1 as one parallel round.
void compute_target_means(CountedOracle& oracle, const TimeGrid& grid, SpeculationWindow& window,
                          WorkerPool* pool = nullptr);

/// GRS at every window index (independently, possibly in parallel), reduced
/// to the first-rejection prefix.
VerifierResult verify(const SpeculationWindow& window, const RandomTape& tape,
                      WorkerPool* pool = nullptr);

/// Runs the main loop until a >= K. Throws InternalError if the forced first
/// acceptance or strict progress is ever violated.
AsdRun sample_asd(CountedOracle& oracle, const TimeGrid& grid, const RandomTape& tape,
                  const AsdOptions& options);

/// max(1, round((K / (beta eta d))^(1/3))), capped at K. beta = 0 gives K.
int default_theta(int steps, double eta, double beta, int dim);

}  // namespace asd

#pragma once

// Mean oracle m(t, y) = E[x* | t x* + sqrt(t) xi = y] for analytic mixture
// targets, a brute-force importance-sampling reference, and the call-counting
// wrapper whose counters define adaptive complexity.

#include <atomic>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "asd/common.hpp"

namespace asd {

class WorkerPool;

/// Mixture of point masses (std = 0) and isotropic Gaussians N(center, std^2 I).
struct MixtureTarget {
  std::vector<double> weights;
  std::vector<Vector> centers;
  std::vector<double> stds;
  int dim = 0;

  /// Throws InputError unless weights are positive and sum to 1 within 1e-12,
  /// every center has length dim, and every std is finite and >= 0.
  void validate() const;

  Vector mean() const;
  /// Draws x* ~ mu.
  Vector sample(std::mt19937_64& rng) const;

  static MixtureTarget point_masses(std::vector<double> weights, std::vector<Vector> centers);
  static MixtureTarget gaussians(std::vector<double> weights, std::vector<Vector> centers,
                                 std::vector<double> stds);
};

/// Tr Cov[mu] = sum_k w_k (d s_k^2 + |mu_k|^2) - |sum_k w_k mu_k|^2.
double covariance_trace(const MixtureTarget& target);

/// Exact posterior mean. t = 0 returns the prior mean.
Vector posterior_mean(const MixtureTarget& target, double t, const Vector& y);

struct McEstimate {
  Vector mean;
  Vector std_error;  // component-wise, delta-method SE of the ratio estimator
  double ess = 0.0;
};

/// Self-normalized importance estimate of m(t, y) with n prior draws.
/// Throws UnreliableEstimate when the effective sample size is below 10.
McEstimate monte_carlo_posterior_mean(const MixtureTarget& target, double t, const Vector& y,
                                      std::size_t n, std::uint64_t seed);

class MeanOracle {
 public:
  virtual ~MeanOracle() = default;
  virtual Vector mean(double t, const Vector& y) const = 0;
  virtual int dim() const = 0;
};

class MixtureOracle final : public MeanOracle {
 public:
  explicit MixtureOracle(MixtureTarget target);
  Vector mean(double t, const Vector& y) const override;
  int dim() const override { return target_.dim; }
  const MixtureTarget& target() const { return target_; }

 private:
  MixtureTarget target_;
};

struct OracleStats {
  std::uint64_t sequential_calls = 0;
  std::uint64_t parallel_rounds = 0;
  std::uint64_t total_evals = 0;

  /// Oracle rounds on the critical path.
  std::uint64_t adaptive_complexity() const { return sequential_calls + parallel_rounds; }
  bool operator==(const OracleStats&) const = default;
};

/// Counts calls made through it; evaluation results are those of the
/// wrapped oracle.
class CountedOracle {
 public:
  explicit CountedOracle(const MeanOracle& inner) : inner_(&inner) {}

  /// A single sequential model call.
  Vector call(double t, const Vector& y);

  /// One parallel round: out[k] = m(times[k], states[k]).
  std::vector<Vector> round(std::span<const double> times, std::span<const Vector> states,
                            WorkerPool* pool = nullptr);

  OracleStats stats() const;
  void reset();
  const MeanOracle& inner() const { return *inner_; }
  int dim() const { return inner_->dim(); }

 private:
  const MeanOracle* inner_;
  std::atomic<std::uint64_t> sequential_calls_{0};
  std::atomic<std::uint64_t> parallel_rounds_{0};
  std::atomic<std::uint64_t> total_evals_{0};
};

}  // namespace asd

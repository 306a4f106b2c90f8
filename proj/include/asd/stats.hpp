#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "asd/common.hpp"
#include "asd/oracle.hpp"

namespace asd {

class WorkerPool;

enum class TestMethod { EnergyPermutation, KsPerDim };

std::string to_string(TestMethod m);

struct TwoSampleReport {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  TestMethod method = TestMethod::EnergyPermutation;
  int n_perm = 0;
};

/// V-statistic energy distance 2 E|X-Y| - E|X-X'| - E|Y-Y'| in double
/// precision. Nonnegative; zero iff the samples are equal multisets.
double energy_distance(std::span<const Vector> a, std::span<const Vector> b);

/// Energy two-sample test: statistic n_a n_b / (n_a + n_b) times the energy
/// distance, p-value (1 + #{perm >= observed}) / (n_perm + 1). Needs
/// n_a, n_b >= 100 and n_perm >= 500. Deterministic in `seed` for any pool.
TwoSampleReport energy_test(std::span<const Vector> a, std::span<const Vector> b, int n_perm,
                            std::uint64_t seed, WorkerPool* pool = nullptr);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Asymptotic Kolmogorov tail Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_tail(double lambda);

/// One-sample KS against a continuous CDF (Stephens-corrected p-value).
KsResult ks_test(std::span<const double> xs, const std::function<double(double)>& cdf);
KsResult ks_test_normal(std::span<const double> xs, double mean, double sd);
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Two-sample KS per coordinate; p-value Bonferroni-combined over d.
TwoSampleReport ks_per_dim(std::span<const Vector> a, std::span<const Vector> b);

/// Absolute z-scores of per-coordinate mean and variance differences.
struct MomentComparison {
  Vector mean_a, mean_b, var_a, var_b;
  Vector mean_z, var_z;
  double max_abs_z() const;
};

MomentComparison compare_moments(std::span<const Vector> a, std::span<const Vector> b);

struct ExchangeabilityOptions {
  /// pi over increment indices 0..m-1; empty means swap the first two.
  std::vector<int> permutation;
  int n_perm = 500;
  /// Control process: multiply the variance of this increment (0-based).
  int inflated_increment = -1;
  double variance_factor = 2.0;
  WorkerPool* pool = nullptr;
};

struct ExchangeabilityReport {
  TwoSampleReport test;
  std::vector<Vector> increment_means;
  std::vector<Vector> increment_se;
  std::vector<Vector> expected_means;  // eta_i * mean(mu)
  double max_mean_z = 0.0;
};

/// Draws increments of y_t = t x* + W_t on [t_start, t_start + sum(steps)]
/// and tests (D_1..D_m) against an independent pi-permuted sample with the
/// energy test in R^{m d}. Steps must all be equal.
ExchangeabilityReport exchangeability_test(const MixtureTarget& target, double t_start,
                                           std::span<const double> steps, std::size_t n_samples,
                                           std::uint64_t seed,
                                           const ExchangeabilityOptions& options = {});
ExchangeabilityReport exchangeability_test(const MixtureTarget& target, double t_start, double eta,
                                           int m, std::size_t n_samples, std::uint64_t seed,
                                           const ExchangeabilityOptions& options = {});

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<std::pair<double, double>> points;  // (ln K, ln mean R)
};

/// Least squares in log-log space. Needs >= 5 points whose K span at least
/// 1.5 decades.
SlopeFit fit_scaling(std::span<const std::pair<double, double>> points);

}  // namespace asd

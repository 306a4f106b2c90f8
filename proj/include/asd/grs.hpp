#pragma once

#include "asd/common.hpp"

namespace asd {

struct GrsOutcome {
  Vector sample;
  bool accepted = false;
};

/// Gaussian rejection sampler for equal-variance Gaussians via reflection
/// coupling. With v = proposal_mean - target_mean, accepts iff
///   log u <= min(0, -(2 <v, xi> / sigma + |v|^2 / sigma^2) / 2).
/// Accepted: proposal_mean + sigma xi. Rejected: target_mean + sigma times
/// the reflection of xi across the hyperplane orthogonal to v. Either way the
/// sample is distributed N(target_mean, sigma^2 I).
GrsOutcome grs_step(double u, const Vector& xi, const Vector& proposal_mean,
                    const Vector& target_mean, double sigma);

/// Phi, the standard normal CDF.
double standard_normal_cdf(double x);

/// TV(N(a, sigma^2 I), N(b, sigma^2 I)) = 2 Phi(|a - b| / (2 sigma)) - 1.
double gaussian_tv(const Vector& mean_a, const Vector& mean_b, double sigma);

}  // namespace asd

#include "asd/grs.hpp"

#include <cmath>
#include <numbers>

namespace asd {

namespace {
// |v| below this multiple of sigma counts as v = 0.
constexpr double kZeroShift = 1e-14;
}  // namespace

GrsOutcome grs_step(double u, const Vector& xi, const Vector& proposal_mean,
                    const Vector& target_mean, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ParameterError("GRS needs sigma > 0");
  if (xi.size() != proposal_mean.size() || xi.size() != target_mean.size()) {
    throw InputError("GRS: dimension mismatch");
  }
  if (!all_finite(xi)) throw InputError("GRS: non-finite noise");
  if (!(u >= 0.0 && u <= 1.0)) throw ParameterError("GRS: u must lie in [0, 1]");

  const Vector v = proposal_mean - target_mean;
  const double v2 = v.squaredNorm();
  if (std::sqrt(v2) < kZeroShift * sigma) {
    return {proposal_mean + sigma * xi, true};
  }
  const double vxi = v.dot(xi);
  const double log_ratio = -(2.0 * vxi / sigma + v2 / (sigma * sigma)) / 2.0;
  if (std::log(u) <= std::min(0.0, log_ratio)) {
    return {proposal_mean + sigma * xi, true};
  }
  if (!(v2 > 0.0)) throw InternalError("GRS reflection with zero mean difference");
  return {target_mean + sigma * (xi - (2.0 * vxi / v2) * v), false};
}

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double gaussian_tv(const Vector& mean_a, const Vector& mean_b, double sigma) {
  if (!(sigma > 0.0)) throw ParameterError("gaussian_tv needs sigma > 0");
  const double gap = (mean_a - mean_b).norm() / (2.0 * sigma);
  // 2 Phi(x) - 1 = erf(x / sqrt 2)
  return std::erf(gap / std::numbers::sqrt2);
}

}  // namespace asd

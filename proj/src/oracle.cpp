#include "asd/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "asd/worker_pool.hpp"

namespace asd {

namespace {

constexpr double kWeightFloor = 1e-300;

void check_query(const MixtureTarget& target, double t, const Vector& y) {
  if (y.size() != target.dim) {
    throw InputError("oracle query has dimension " + std::to_string(y.size()) + ", expected " +
                     std::to_string(target.dim));
  }
  if (!all_finite(y)) throw InputError("oracle query state contains NaN or Inf");
  if (!(t >= 0.0) || !std::isfinite(t)) throw InputError("oracle query time must be >= 0");
}

}  // namespace

void MixtureTarget::validate() const {
  if (dim < 1) throw InputError("target dimension must be >= 1");
  if (weights.empty()) throw InputError("target needs at least one component");
  if (centers.size() != weights.size() || stds.size() != weights.size()) {
    throw InputError("target weights, centers and stds must have equal length");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (!(weights[k] > 0.0) || !std::isfinite(weights[k])) {
      throw InputError("target weight " + std::to_string(k) + " is not positive");
    }
    if (centers[k].size() != dim) {
      throw InputError("target center " + std::to_string(k) + " has wrong dimension");
    }
    if (!all_finite(centers[k])) throw InputError("target center is not finite");
    if (!(stds[k] >= 0.0) || !std::isfinite(stds[k])) {
      throw InputError("target std " + std::to_string(k) + " must be finite and >= 0");
    }
    total += weights[k];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << "target weights sum to " << total << ", expected 1";
    throw InputError(os.str());
  }
}

Vector MixtureTarget::mean() const {
  Vector m = Vector::Zero(dim);
  for (std::size_t k = 0; k < weights.size(); ++k) m += weights[k] * centers[k];
  return m;
}

Vector MixtureTarget::sample(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double u = unif(rng);
  std::size_t k = 0;
  double acc = weights[0];
  while (u >= acc && k + 1 < weights.size()) acc += weights[++k];
  Vector x = centers[k];
  if (stds[k] > 0.0) {
    for (int j = 0; j < dim; ++j) x[j] += stds[k] * normal(rng);
  }
  return x;
}

MixtureTarget MixtureTarget::point_masses(std::vector<double> weights,
                                          std::vector<Vector> centers) {
  MixtureTarget t;
  t.stds.assign(weights.size(), 0.0);
  t.dim = centers.empty() ? 0 : static_cast<int>(centers.front().size());
  t.weights = std::move(weights);
  t.centers = std::move(centers);
  t.validate();
  return t;
}

MixtureTarget MixtureTarget::gaussians(std::vector<double> weights, std::vector<Vector> centers,
                                       std::vector<double> stds) {
  MixtureTarget t;
  t.dim = centers.empty() ? 0 : static_cast<int>(centers.front().size());
  t.weights = std::move(weights);
  t.centers = std::move(centers);
  t.stds = std::move(stds);
  t.validate();
  return t;
}

double covariance_trace(const MixtureTarget& target) {
  double second = 0.0;
  for (std::size_t k = 0; k < target.weights.size(); ++k) {
    const double s = target.stds[k];
    second += target.weights[k] * (target.dim * s * s + target.centers[k].squaredNorm());
  }
  return std::max(0.0, second - target.mean().squaredNorm());
}

Vector posterior_mean(const MixtureTarget& target, double t, const Vector& y) {
  check_query(target, t, y);
  if (t == 0.0) return target.mean();

  const std::size_t n = target.weights.size();
  const double d = target.dim;
  std::vector<double> logw(n);
  double max_logw = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    const double s = target.stds[k];
    const double var = t * t * s * s + t;
    const double dist2 = (y - t * target.centers[k]).squaredNorm();
    logw[k] = std::log(target.weights[k]) - 0.5 * d * std::log(2.0 * std::numbers::pi * var) -
              dist2 / (2.0 * var);
    max_logw = std::max(max_logw, logw[k]);
  }
  if (!std::isfinite(max_logw)) throw InternalError("all mixture log-weights are -inf");

  Vector num = Vector::Zero(target.dim);
  double denom = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double w = std::exp(logw[k] - max_logw);
    if (w < kWeightFloor) continue;
    const double s = target.stds[k];
    if (s == 0.0) {
      num += w * target.centers[k];
    } else {
      const double s2 = s * s;
      num += w * ((target.centers[k] + s2 * y) / (1.0 + s2 * t));
    }
    denom += w;
  }
  return num / denom;
}

McEstimate monte_carlo_posterior_mean(const MixtureTarget& target, double t, const Vector& y,
                                      std::size_t n, std::uint64_t seed) {
  check_query(target, t, y);
  if (n < 1000) throw ParameterError("monte_carlo_posterior_mean needs n >= 1000");
  if (!(t > 0.0)) throw ParameterError("monte_carlo_posterior_mean needs t > 0");
  std::mt19937_64 rng(seed);
  std::vector<Vector> xs(n);
  std::vector<double> logw(n);
  double max_logw = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    xs[j] = target.sample(rng);
    logw[j] = -(y - t * xs[j]).squaredNorm() / (2.0 * t);
    max_logw = std::max(max_logw, logw[j]);
  }
  double wsum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    logw[j] = std::exp(logw[j] - max_logw);
    wsum += logw[j];
  }
  // Shift by a reference draw so constant samples are reproduced exactly.
  const Vector ref = xs[0];
  Vector shift = Vector::Zero(target.dim);
  double w2 = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double w = logw[j] / wsum;
    shift += w * (xs[j] - ref);
    w2 += w * w;
  }
  McEstimate est;
  est.mean = ref + shift;
  est.ess = 1.0 / w2;
  Vector var = Vector::Zero(target.dim);
  for (std::size_t j = 0; j < n; ++j) {
    const double w = logw[j] / wsum;
    var += (w * w) * (xs[j] - est.mean).array().square().matrix();
  }
  est.std_error = var.cwiseSqrt();
  if (est.ess < 10.0) {
    std::ostringstream os;
    os << "importance estimate unreliable: effective sample size " << est.ess << " < 10 (t=" << t
       << ", n=" << n << ")";
    throw UnreliableEstimate(os.str());
  }
  return est;
}

MixtureOracle::MixtureOracle(MixtureTarget target) : target_(std::move(target)) {
  target_.validate();
}

Vector MixtureOracle::mean(double t, const Vector& y) const { return posterior_mean(target_, t, y); }

Vector CountedOracle::call(double t, const Vector& y) {
  sequential_calls_.fetch_add(1, std::memory_order_relaxed);
  total_evals_.fetch_add(1, std::memory_order_relaxed);
  return inner_->mean(t, y);
}

std::vector<Vector> CountedOracle::round(std::span<const double> times,
                                         std::span<const Vector> states, WorkerPool* pool) {
  if (times.size() != states.size()) throw InputError("oracle round: times/states mismatch");
  parallel_rounds_.fetch_add(1, std::memory_order_relaxed);
  total_evals_.fetch_add(times.size(), std::memory_order_relaxed);
  std::vector<Vector> out(times.size());
  parallel_for(pool, times.size(), [&](std::size_t k) { out[k] = inner_->mean(times[k], states[k]); });
  return out;
}

OracleStats CountedOracle::stats() const {
  return {sequential_calls_.load(), parallel_rounds_.load(), total_evals_.load()};
}

void CountedOracle::reset() {
  sequential_calls_ = 0;
  parallel_rounds_ = 0;
  total_evals_ = 0;
}

}  // namespace asd

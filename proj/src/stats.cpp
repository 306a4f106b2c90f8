#include "asd/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "asd/grs.hpp"
#include "asd/worker_pool.hpp"

namespace asd {

namespace {

constexpr int kBatch = 8;
constexpr std::size_t kFlush = 512;

void check_samples(std::span<const Vector> a, std::span<const Vector> b) {
  if (a.empty() || b.empty()) throw InputError("two-sample test needs nonempty samples");
  const auto d = a.front().size();
  for (const auto& x : a) {
    if (x.size() != d) throw InputError("two-sample test: dimension mismatch in sample a");
  }
  for (const auto& x : b) {
    if (x.size() != d) throw InputError("two-sample test: dimension mismatch between samples");
  }
}

double mean_pair_distance(std::span<const Vector> a, std::span<const Vector> b) {
  double s = 0.0;
  for (const auto& x : a) {
    for (const auto& y : b) s += (x - y).norm();
  }
  return s / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

// Packed strict upper triangle of the pooled distance matrix.
class DistanceTriangle {
 public:
  explicit DistanceTriangle(const std::vector<const Vector*>& pts, WorkerPool* pool)
      : n_(pts.size()), data_(n_ * (n_ - 1) / 2), row_sums_(n_) {
    parallel_for(pool, n_, [&](std::size_t i) {
      float* row = data_.data() + offset(i);
      double s = 0.0;
      for (std::size_t j = i + 1; j < n_; ++j) {
        const float d = static_cast<float>((*pts[i] - *pts[j]).norm());
        row[j - i - 1] = d;
        s += d;
      }
      row_sums_[i] = s;
    });
    total_ = std::accumulate(row_sums_.begin(), row_sums_.end(), 0.0);
  }

  std::size_t size() const { return n_; }
  const float* row(std::size_t i) const { return data_.data() + offset(i); }
  double row_sum(std::size_t i) const { return row_sums_[i]; }
  double total() const { return total_; }

 private:
  std::size_t offset(std::size_t i) const { return i * (n_ - 1) - i * (i - 1) / 2; }

  std::size_t n_;
  std::vector<float> data_;
  std::vector<double> row_sums_;
  double total_ = 0.0;
};

// Within-group pair sums (unordered pairs) for up to kBatch labellings at
// once. labels[b][i] = 1 puts point i in group A.
void within_sums(const DistanceTriangle& dist, const std::vector<std::vector<std::uint8_t>>& labels,
                 double* s_aa, double* s_bb) {
  const std::size_t n = dist.size();
  const std::size_t nb = labels.size();
  std::vector<float> mask(n * kBatch, 0.0f);
  for (std::size_t b = 0; b < nb; ++b) {
    for (std::size_t i = 0; i < n; ++i) mask[i * kBatch + b] = labels[b][i] ? 1.0f : 0.0f;
  }
  double aa[kBatch] = {};
  double bb[kBatch] = {};
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const float* row = dist.row(i);
    const std::size_t len = n - 1 - i;
    const float* z = mask.data() + (i + 1) * kBatch;
    double acc[kBatch] = {};
    for (std::size_t start = 0; start < len; start += kFlush) {
      const std::size_t stop = std::min(len, start + kFlush);
      float part[kBatch] = {};
      for (std::size_t j = start; j < stop; ++j) {
        const float d = row[j];
        const float* zz = z + j * kBatch;
        for (int b = 0; b < kBatch; ++b) part[b] += d * zz[b];
      }
      for (int b = 0; b < kBatch; ++b) acc[b] += part[b];
    }
    const float* zi = mask.data() + i * kBatch;
    for (int b = 0; b < kBatch; ++b) {
      if (zi[b] != 0.0f) {
        aa[b] += acc[b];
      } else {
        bb[b] += dist.row_sum(i) - acc[b];
      }
    }
  }
  for (std::size_t b = 0; b < nb; ++b) {
    s_aa[b] = aa[b];
    s_bb[b] = bb[b];
  }
}

double kolmogorov_p(double d, double n_eff) {
  const double root = std::sqrt(n_eff);
  return kolmogorov_tail((root + 0.12 + 0.11 / root) * d);
}

}  // namespace

std::string to_string(TestMethod m) {
  return m == TestMethod::EnergyPermutation ? "energy-permutation" : "ks-per-dim";
}

double energy_distance(std::span<const Vector> a, std::span<const Vector> b) {
  check_samples(a, b);
  const double e = 2.0 * mean_pair_distance(a, b) - mean_pair_distance(a, a) -
                   mean_pair_distance(b, b);
  return std::max(0.0, e);
}

TwoSampleReport energy_test(std::span<const Vector> a, std::span<const Vector> b, int n_perm,
                            std::uint64_t seed, WorkerPool* pool) {
  check_samples(a, b);
  if (a.size() < 100 || b.size() < 100) throw InputError("energy test needs n_a, n_b >= 100");
  if (n_perm < 500) throw ParameterError("energy test needs at least 500 permutations");

  const std::size_t na = a.size();
  const std::size_t nbs = b.size();
  const std::size_t n = na + nbs;
  std::vector<const Vector*> pts;
  pts.reserve(n);
  for (const auto& x : a) pts.push_back(&x);
  for (const auto& x : b) pts.push_back(&x);
  const DistanceTriangle dist(pts, pool);

  const std::size_t labellings = static_cast<std::size_t>(n_perm) + 1;
  const std::size_t batches = (labellings + kBatch - 1) / kBatch;
  std::vector<double> stat(labellings);
  const double fa = static_cast<double>(na);
  const double fb = static_cast<double>(nbs);
  const double scale = fa * fb / (fa + fb);

  parallel_for(pool, batches, [&](std::size_t batch) {
    const std::size_t first = batch * kBatch;
    const std::size_t count = std::min<std::size_t>(kBatch, labellings - first);
    std::vector<std::vector<std::uint8_t>> labels(count, std::vector<std::uint8_t>(n, 0));
    std::vector<std::size_t> idx(n);
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t perm = first + k;
      if (perm == 0) {
        std::fill(labels[k].begin(), labels[k].begin() + static_cast<std::ptrdiff_t>(na), 1);
        continue;
      }
      std::iota(idx.begin(), idx.end(), 0);
      std::mt19937_64 rng(mix_seed(seed, perm));
      // Fisher-Yates with an explicit draw so the labelling is portable.
      for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
        std::swap(idx[i], idx[j]);
      }
      for (std::size_t i = 0; i < na; ++i) labels[k][idx[i]] = 1;
    }
    double s_aa[kBatch];
    double s_bb[kBatch];
    within_sums(dist, labels, s_aa, s_bb);
    for (std::size_t k = 0; k < count; ++k) {
      const double s_ab = dist.total() - s_aa[k] - s_bb[k];
      const double e = 2.0 * s_ab / (fa * fb) - 2.0 * s_aa[k] / (fa * fa) - 2.0 * s_bb[k] / (fb * fb);
      stat[first + k] = scale * e;
    }
  });

  TwoSampleReport r;
  r.statistic = std::max(0.0, stat[0]);
  std::size_t exceed = 0;
  for (std::size_t k = 1; k < labellings; ++k) {
    if (stat[k] >= stat[0]) ++exceed;
  }
  r.p_value = static_cast<double>(1 + exceed) / static_cast<double>(labellings);
  r.n_a = na;
  r.n_b = nbs;
  r.method = TestMethod::EnergyPermutation;
  r.n_perm = n_perm;
  return r;
}

double kolmogorov_tail(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = sign * 2.0 * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) <= 1e-12 * std::abs(sum)) break;
    sign = -sign;
  }
  return std::clamp(sum, 0.0, 1.0);
}

KsResult ks_test(std::span<const double> xs, const std::function<double(double)>& cdf) {
  if (xs.empty()) throw InputError("KS test needs a nonempty sample");
  std::vector<double> s(xs.begin(), xs.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = cdf(s[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return {d, kolmogorov_p(d, n)};
}

KsResult ks_test_normal(std::span<const double> xs, double mean, double sd) {
  if (!(sd > 0.0)) throw ParameterError("KS normal reference needs sd > 0");
  return ks_test(xs, [mean, sd](double x) { return standard_normal_cdf((x - mean) / sd); });
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InputError("KS test needs nonempty samples");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size());
  const double nb = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return {d, kolmogorov_p(d, na * nb / (na + nb))};
}

TwoSampleReport ks_per_dim(std::span<const Vector> a, std::span<const Vector> b) {
  check_samples(a, b);
  const auto d = a.front().size();
  TwoSampleReport r;
  r.method = TestMethod::KsPerDim;
  r.n_a = a.size();
  r.n_b = b.size();
  double min_p = 1.0;
  std::vector<double> xa(a.size());
  std::vector<double> xb(b.size());
  for (Eigen::Index j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < a.size(); ++i) xa[i] = a[i][j];
    for (std::size_t i = 0; i < b.size(); ++i) xb[i] = b[i][j];
    const KsResult k = ks_two_sample(xa, xb);
    r.statistic = std::max(r.statistic, k.statistic);
    min_p = std::min(min_p, k.p_value);
  }
  r.p_value = std::min(1.0, min_p * static_cast<double>(d));
  return r;
}

double MomentComparison::max_abs_z() const {
  return std::max(mean_z.cwiseAbs().maxCoeff(), var_z.cwiseAbs().maxCoeff());
}

MomentComparison compare_moments(std::span<const Vector> a, std::span<const Vector> b) {
  check_samples(a, b);
  if (a.size() < 2 || b.size() < 2) throw InputError("moment comparison needs n >= 2");
  const auto d = a.front().size();
  auto moments = [d](std::span<const Vector> s, Vector& mean, Vector& var, Vector& m4) {
    const double n = static_cast<double>(s.size());
    mean = Vector::Zero(d);
    for (const auto& x : s) mean += x;
    mean /= n;
    var = Vector::Zero(d);
    m4 = Vector::Zero(d);
    for (const auto& x : s) {
      const Vector c2 = (x - mean).array().square().matrix();
      var += c2;
      m4 += c2.array().square().matrix();
    }
    var /= (n - 1.0);
    m4 /= n;
  };
  MomentComparison c;
  Vector m4a, m4b;
  moments(a, c.mean_a, c.var_a, m4a);
  moments(b, c.mean_b, c.var_b, m4b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  c.mean_z.resize(d);
  c.var_z.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double se_mean = std::sqrt(c.var_a[j] / na + c.var_b[j] / nb);
    const double va2 = c.var_a[j] * c.var_a[j];
    const double vb2 = c.var_b[j] * c.var_b[j];
    const double se_var = std::sqrt(std::max(0.0, m4a[j] - va2) / na + std::max(0.0, m4b[j] - vb2) / nb);
    const double dm = c.mean_a[j] - c.mean_b[j];
    const double dv = c.var_a[j] - c.var_b[j];
    c.mean_z[j] = se_mean > 0.0 ? dm / se_mean : (dm == 0.0 ? 0.0 : INFINITY);
    c.var_z[j] = se_var > 0.0 ? dv / se_var : (dv == 0.0 ? 0.0 : INFINITY);
  }
  return c;
}

ExchangeabilityReport exchangeability_test(const MixtureTarget& target, double t_start,
                                           std::span<const double> steps, std::size_t n_samples,
                                           std::uint64_t seed,
                                           const ExchangeabilityOptions& options) {
  target.validate();
  const int m = static_cast<int>(steps.size());
  if (m < 2) throw ParameterError("exchangeability test needs m >= 2 increments");
  if (!(t_start >= 0.0)) throw ParameterError("exchangeability test needs t_start >= 0");
  for (double s : steps) {
    if (!(s > 0.0)) throw ParameterError("exchangeability test needs positive steps");
    if (s != steps[0]) {
      throw ParameterError("exchangeability requires equal time increments");
    }
  }
  std::vector<int> pi = options.permutation;
  if (pi.empty()) {
    pi.resize(static_cast<std::size_t>(m));
    std::iota(pi.begin(), pi.end(), 0);
    std::swap(pi[0], pi[1]);
  }
  {
    std::vector<int> sorted = pi;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> ident(static_cast<std::size_t>(m));
    std::iota(ident.begin(), ident.end(), 0);
    if (sorted != ident) throw ParameterError("exchangeability: not a permutation of 0..m-1");
    if (pi == ident) throw ParameterError("exchangeability: permutation must be nontrivial");
  }
  if (options.inflated_increment >= m) {
    throw ParameterError("exchangeability: inflated increment index out of range");
  }

  const int d = target.dim;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw = [&]() {
    const Vector x = target.sample(rng);
    // y at t_start is drawn for fidelity to the process; increments only
    // depend on x* and fresh Brownian increments.
    Vector y = t_start * x;
    for (int j = 0; j < d; ++j) y[j] += std::sqrt(t_start) * normal(rng);
    std::vector<Vector> inc(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
      double var = steps[static_cast<std::size_t>(i)];
      if (i == options.inflated_increment) var *= options.variance_factor;
      Vector next = y + steps[static_cast<std::size_t>(i)] * x;
      for (int j = 0; j < d; ++j) next[j] += std::sqrt(var) * normal(rng);
      inc[static_cast<std::size_t>(i)] = next - y;
      y = next;
    }
    return inc;
  };

  std::vector<Vector> arm_a(n_samples, Vector(m * d));
  std::vector<Vector> arm_b(n_samples, Vector(m * d));
  ExchangeabilityReport rep;
  rep.increment_means.assign(static_cast<std::size_t>(m), Vector::Zero(d));
  std::vector<Vector> second(static_cast<std::size_t>(m), Vector::Zero(d));
  for (std::size_t s = 0; s < n_samples; ++s) {
    const auto inc = draw();
    for (int i = 0; i < m; ++i) {
      arm_a[s].segment(i * d, d) = inc[static_cast<std::size_t>(i)];
      rep.increment_means[static_cast<std::size_t>(i)] += inc[static_cast<std::size_t>(i)];
      second[static_cast<std::size_t>(i)] +=
          inc[static_cast<std::size_t>(i)].array().square().matrix();
    }
  }
  for (std::size_t s = 0; s < n_samples; ++s) {
    const auto inc = draw();
    for (int i = 0; i < m; ++i) {
      arm_b[s].segment(i * d, d) = inc[static_cast<std::size_t>(pi[static_cast<std::size_t>(i)])];
    }
  }

  const double n = static_cast<double>(n_samples);
  const Vector mu_mean = target.mean();
  for (int i = 0; i < m; ++i) {
    auto& mean = rep.increment_means[static_cast<std::size_t>(i)];
    mean /= n;
    const Vector var = (second[static_cast<std::size_t>(i)] / n - mean.array().square().matrix()) *
                       (n / (n - 1.0));
    Vector se = (var / n).cwiseSqrt();
    const Vector expected = steps[static_cast<std::size_t>(i)] * mu_mean;
    for (int j = 0; j < d; ++j) {
      rep.max_mean_z = std::max(rep.max_mean_z, std::abs(mean[j] - expected[j]) / se[j]);
    }
    rep.increment_se.push_back(std::move(se));
    rep.expected_means.push_back(expected);
  }
  rep.test = energy_test(arm_a, arm_b, options.n_perm, mix_seed(seed, 0xE7C), options.pool);
  return rep;
}

ExchangeabilityReport exchangeability_test(const MixtureTarget& target, double t_start, double eta,
                                           int m, std::size_t n_samples, std::uint64_t seed,
                                           const ExchangeabilityOptions& options) {
  if (m < 2) throw ParameterError("exchangeability test needs m >= 2 increments");
  const std::vector<double> steps(static_cast<std::size_t>(m), eta);
  return exchangeability_test(target, t_start, steps, n_samples, seed, options);
}

SlopeFit fit_scaling(std::span<const std::pair<double, double>> points) {
  if (points.size() < 5) throw InputError("scaling fit needs at least 5 points");
  double kmin = INFINITY;
  double kmax = 0.0;
  SlopeFit fit;
  for (const auto& [k, r] : points) {
    if (!(k > 0.0) || !(r > 0.0)) throw InputError("scaling fit needs positive K and R");
    kmin = std::min(kmin, k);
    kmax = std::max(kmax, k);
    fit.points.emplace_back(std::log(k), std::log(r));
  }
  if (std::log10(kmax / kmin) < 1.5 - 1e-12) {
    throw InputError("scaling fit needs K values spanning at least 1.5 decades");
  }
  const double n = static_cast<double>(fit.points.size());
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [x, y] : fit.points) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& [x, y] : fit.points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (const auto& [x, y] : fit.points) {
    const double e = y - (fit.intercept + fit.slope * x);
    ss_res += e * e;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

}  // namespace asd

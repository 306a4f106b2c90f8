#include "asd/process.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "asd/quadrature.hpp"

namespace asd {

namespace {

constexpr int kValidationPoints = 257;

quad::SimpsonOptions simpson(double tol) {
  quad::SimpsonOptions o;
  o.abs_tol = tol;
  return o;
}

void check_time(const DdpmSchedule& s, double t) {
  if (!(t >= 0.0 && t <= s.horizon)) {
    std::ostringstream os;
    os << "time " << t << " outside schedule horizon [0, " << s.horizon << "]";
    throw ParameterError(os.str());
  }
}

double parse_number(std::string_view text) {
  std::string owned(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(owned, &used);
  } catch (const std::exception&) {
    throw InvalidSchedule("bad number in schedule spec: '" + owned + "'");
  }
  if (used != owned.size()) throw InvalidSchedule("bad number in schedule spec: '" + owned + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

ScalarFn parse_u_spec(const std::vector<std::string_view>& parts, std::size_t first) {
  const std::size_t n = parts.size() - first;
  if (n == 1) {
    const double c = parse_number(parts[first]);
    return [c](double) { return c; };
  }
  const std::string_view kind = parts[first];
  if (kind == "const" && n == 2) {
    const double c = parse_number(parts[first + 1]);
    return [c](double) { return c; };
  }
  if (kind == "linear" && n == 3) {
    const double a = parse_number(parts[first + 1]);
    const double b = parse_number(parts[first + 2]);
    return [a, b](double t) { return a + b * t; };
  }
  if (kind == "exp" && n == 3) {
    const double a = parse_number(parts[first + 1]);
    const double b = parse_number(parts[first + 2]);
    return [a, b](double t) { return a * std::exp(b * t); };
  }
  throw InvalidSchedule("unknown u-spec '" + std::string(kind) + "'");
}

}  // namespace

void validate_schedule(const DdpmSchedule& s) {
  if (!(s.horizon > 0.0) || !std::isfinite(s.horizon)) {
    throw InvalidSchedule("schedule horizon must be positive");
  }
  if (!s.h || !s.u) throw InvalidSchedule("schedule needs both h and u");
  for (int k = 0; k < kValidationPoints; ++k) {
    const double t = s.horizon * k / (kValidationPoints - 1);
    const double u = s.u(t);
    const double h = s.h(t);
    if (!(u > 0.0) || !std::isfinite(u)) {
      std::ostringstream os;
      os << "schedule '" << s.name << "': u(" << t << ") = " << u << " is not positive";
      throw InvalidSchedule(os.str());
    }
    if (!std::isfinite(h)) {
      std::ostringstream os;
      os << "schedule '" << s.name << "': h(" << t << ") is not finite";
      throw InvalidSchedule(os.str());
    }
  }
}

DdpmSchedule make_vp_schedule(ScalarFn u, double horizon, std::string name) {
  DdpmSchedule s;
  s.u = u;
  s.h = [u](double t) { return -0.5 * u(t); };
  s.horizon = horizon;
  s.name = std::move(name);
  validate_schedule(s);
  return s;
}

DdpmSchedule make_ve_schedule(ScalarFn u, double horizon, std::string name) {
  DdpmSchedule s;
  s.u = std::move(u);
  s.h = [](double) { return 0.0; };
  s.horizon = horizon;
  s.name = std::move(name);
  validate_schedule(s);
  return s;
}

DdpmSchedule make_ou_schedule(double horizon) {
  return make_vp_schedule([](double) { return 2.0; }, horizon, "ou");
}

DdpmSchedule parse_schedule_preset(std::string_view spec, double horizon) {
  const auto parts = split(spec, ':');
  if (parts.size() == 1 && parts[0] == "ou") return make_ou_schedule(horizon);
  if (parts.size() >= 2 && (parts[0] == "vp" || parts[0] == "ve")) {
    auto u = parse_u_spec(parts, 1);
    return parts[0] == "vp" ? make_vp_schedule(std::move(u), horizon, std::string(spec))
                            : make_ve_schedule(std::move(u), horizon, std::string(spec));
  }
  throw InvalidSchedule("unknown schedule preset '" + std::string(spec) + "'");
}

double integrated_drift(const DdpmSchedule& s, double t, double tol) {
  check_time(s, t);
  return quad::adaptive_simpson(s.h, 0.0, t, simpson(tol));
}

double compute_alpha(const DdpmSchedule& s, double t, double tol) {
  check_time(s, t);
  if (!(tol > 0.0)) throw ParameterError("quadrature tolerance must be positive");
  if (t == 0.0) return 0.0;
  const auto opts = simpson(tol);
  auto integrand = [&](double tau) {
    const double H = quad::adaptive_simpson(s.h, 0.0, tau, opts);
    return s.u(tau) * std::exp(-2.0 * H);
  };
  const double I = quad::adaptive_simpson(integrand, 0.0, t, opts);
  return 0.5 * std::log1p(I);
}

double compute_r(const DdpmSchedule& s, double t, double tol) {
  if (t == 0.0) return 1.0;
  return std::exp(compute_alpha(s, t, tol) + integrated_drift(s, t, tol));
}

double sl_ou_time(double t_sl) {
  if (!(t_sl > 0.0)) throw ParameterError("SL time must be positive");
  return 0.5 * std::log1p(1.0 / t_sl);
}

Vector euler_forward_step(const DdpmSchedule& s, const Vector& x, double t, double dt,
                          const Vector& noise) {
  if (!(dt > 0.0)) throw ParameterError("forward step needs dt > 0");
  if (x.size() != noise.size()) throw InputError("forward step: dimension mismatch");
  if (!all_finite(x) || !all_finite(noise)) throw InputError("forward step: non-finite input");
  Vector out = x + s.h(t) * dt * x + std::sqrt(s.u(t) * dt) * noise;
  if (!all_finite(out)) throw InputError("forward step produced a non-finite state");
  return out;
}

ReparamMap::ReparamMap(DdpmSchedule schedule, double tol, int grid_points)
    : schedule_(std::move(schedule)), tol_(tol) {
  validate_schedule(schedule_);
  if (grid_points < 2) throw ParameterError("reparametrization grid needs >= 2 points");
  const std::size_t n = static_cast<std::size_t>(grid_points);
  const double cell_tol = tol_ / static_cast<double>(n);
  const auto opts = simpson(cell_tol);
  nodes_.resize(n);
  cum_I_.assign(n, 0.0);
  cum_H_.assign(n, 0.0);
  alpha_nodes_.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    nodes_[k] = schedule_.horizon * static_cast<double>(k) / static_cast<double>(n - 1);
  }
  nodes_.back() = schedule_.horizon;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double lo = nodes_[k];
    const double hi = nodes_[k + 1];
    const double Hk = cum_H_[k];
    cum_H_[k + 1] = Hk + quad::adaptive_simpson(schedule_.h, lo, hi, opts);
    auto integrand = [&](double tau) {
      const double H = Hk + quad::adaptive_simpson(schedule_.h, lo, tau, opts);
      return schedule_.u(tau) * std::exp(-2.0 * H);
    };
    cum_I_[k + 1] = cum_I_[k] + quad::adaptive_simpson(integrand, lo, hi, opts);
    alpha_nodes_[k + 1] = 0.5 * std::log1p(cum_I_[k + 1]);
  }
}

std::size_t ReparamMap::cell_of(double t) const {
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
  std::size_t k = static_cast<std::size_t>(std::distance(nodes_.begin(), it));
  if (k == 0) return 0;
  return std::min(k - 1, nodes_.size() - 2);
}

ReparamMap::Local ReparamMap::local(double t) const {
  check_time(schedule_, t);
  const std::size_t k = cell_of(t);
  const double lo = nodes_[k];
  if (t == lo) return {alpha_nodes_[k], cum_H_[k]};
  const auto opts = simpson(tol_ / static_cast<double>(nodes_.size()));
  const double Hk = cum_H_[k];
  auto integrand = [&](double tau) {
    const double H = Hk + quad::adaptive_simpson(schedule_.h, lo, tau, opts);
    return schedule_.u(tau) * std::exp(-2.0 * H);
  };
  const double I = cum_I_[k] + quad::adaptive_simpson(integrand, lo, t, opts);
  const double H = Hk + quad::adaptive_simpson(schedule_.h, lo, t, opts);
  return {0.5 * std::log1p(I), H};
}

double ReparamMap::alpha(double t) const { return local(t).alpha; }

double ReparamMap::r(double t) const {
  const Local l = local(t);
  return std::exp(l.alpha + l.H);
}

double ReparamMap::alpha_inverse(double s) const {
  if (!(s >= 0.0) || s > alpha_max()) {
    std::ostringstream os;
    os << "alpha_inverse(" << s << ") outside [0, alpha(T) = " << alpha_max() << "]";
    throw OutOfHorizon(os.str());
  }
  if (s == 0.0) return 0.0;
  auto it = std::lower_bound(alpha_nodes_.begin(), alpha_nodes_.end(), s);
  std::size_t k = static_cast<std::size_t>(std::distance(alpha_nodes_.begin(), it));
  if (alpha_nodes_[k] == s) return nodes_[k];
  double lo = nodes_[k - 1];
  double hi = nodes_[k];
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (alpha(mid) < s) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double ReparamMap::gamma(double t_sl) const {
  const double s = sl_ou_time(t_sl);
  return t_sl * std::exp(s) / r(alpha_inverse(s));
}

double ReparamMap::zeta(double t_sl) const {
  return schedule_.horizon - alpha_inverse(sl_ou_time(t_sl));
}

SlToDdpm sl_time_of_ddpm(const ReparamMap& map, double t_sl) {
  const double s = sl_ou_time(t_sl);
  if (s > map.alpha_max()) {
    std::ostringstream os;
    os << "SL time " << t_sl << " maps to OU time " << s << " beyond alpha(T) = "
       << map.alpha_max();
    throw OutOfHorizon(os.str());
  }
  const double inv = map.alpha_inverse(s);
  return {t_sl * std::exp(s) / map.r(inv), map.horizon() - inv};
}

}  // namespace asd

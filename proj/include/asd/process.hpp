#pragma once

// Forward SDE schedules dx = h(t) x dt + sqrt(u(t)) dW, and the time change
// that maps the stochastic localization (SL) process onto the DDPM reverse
// process: alpha(t), r(t), gamma(t), zeta(t).

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "asd/common.hpp"

namespace asd {

using ScalarFn = std::function<double(double)>;

struct DdpmSchedule {
  ScalarFn h;  // drift coefficient
  ScalarFn u;  // squared diffusion coefficient, u > 0
  double horizon = 1.0;
  std::string name;
};

/// Checks horizon > 0, and u > 0 with finite h, u on a 257-point grid over
/// [0, horizon]. Throws InvalidSchedule.
void validate_schedule(const DdpmSchedule& schedule);

DdpmSchedule make_vp_schedule(ScalarFn u, double horizon, std::string name = "vp");
DdpmSchedule make_ve_schedule(ScalarFn u, double horizon, std::string name = "ve");
/// u = 2, h = -1.
DdpmSchedule make_ou_schedule(double horizon);

/// Parses "ou", "vp:<u-spec>" or "ve:<u-spec>", where <u-spec> is one of
///   c                 constant u = c
///   const:c
///   linear:a:b        u = a + b t
///   exp:a:b           u = a exp(b t)
DdpmSchedule parse_schedule_preset(std::string_view spec, double horizon);

/// H(t) = integral of h over [0, t].
double integrated_drift(const DdpmSchedule& schedule, double t, double tol = 1e-10);

/// alpha(t) = 1/2 ln(1 + int_0^t u(tau) exp(-2 H(tau)) dtau), by nested
/// adaptive Simpson. alpha(0) = 0 exactly.
double compute_alpha(const DdpmSchedule& schedule, double t, double tol = 1e-10);

/// r(t) = exp(alpha(t) + H(t)); r(0) = 1.
double compute_r(const DdpmSchedule& schedule, double t, double tol = 1e-10);

/// s(t) = 1/2 ln(1 + 1/t), the OU time reached by SL at time t.
double sl_ou_time(double t_sl);

/// One Euler-Maruyama step of the forward (noising) SDE.
Vector euler_forward_step(const DdpmSchedule& schedule, const Vector& x, double t, double dt,
                          const Vector& noise);

/// Precomputed time change for one schedule. Immutable after construction.
class ReparamMap {
 public:
  explicit ReparamMap(DdpmSchedule schedule, double tol = 1e-10, int grid_points = 1024);

  double alpha(double t) const;
  /// Monotone bisection to 1e-10 in t, bracketed by the cached grid.
  double alpha_inverse(double s) const;
  double r(double t) const;
  double gamma(double t_sl) const;
  double zeta(double t_sl) const;

  double horizon() const { return schedule_.horizon; }
  double alpha_max() const { return alpha_nodes_.back(); }
  const DdpmSchedule& schedule() const { return schedule_; }

 private:
  struct Local {
    double alpha;
    double H;
  };
  Local local(double t) const;
  std::size_t cell_of(double t) const;

  DdpmSchedule schedule_;
  double tol_;
  std::vector<double> nodes_;
  std::vector<double> cum_I_;  // int_0^{t_k} u exp(-2H)
  std::vector<double> cum_H_;  // H(t_k)
  std::vector<double> alpha_nodes_;
};

struct SlToDdpm {
  double scale;   // gamma(t_sl)
  double t_ddpm;  // zeta(t_sl)
};

/// SL time t_sl -> (gamma, zeta) with  y_{t_sl} =d gamma * x_rev(zeta).
/// Throws OutOfHorizon when s(t_sl) > alpha(T).
SlToDdpm sl_time_of_ddpm(const ReparamMap& map, double t_sl);

}  // namespace asd

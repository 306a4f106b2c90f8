#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <type_traits>

#include "asd/common.hpp"

namespace asd::quad {

struct SimpsonOptions {
  double abs_tol = 1e-10;
  // Local acceptance uses max(tol, rel_tol * |estimate|), so integrals far
  // above 1 do not demand sub-ulp accuracy.
  double rel_tol = 1e-12;
  int max_depth = 50;
  int min_depth = 3;
  std::size_t max_evals = 20'000'000;
};

namespace detail {

template <class F>
struct SimpsonState {
  F& f;
  const SimpsonOptions& opts;
  std::size_t evals = 0;

  double eval(double x) {
    if (++evals > opts.max_evals) {
      throw NumericalIntegrationError("adaptive Simpson: evaluation budget of " +
                                      std::to_string(opts.max_evals) + " exhausted");
    }
    const double v = f(x);
    if (!std::isfinite(v)) {
      throw NumericalIntegrationError("adaptive Simpson: non-finite integrand at x=" +
                                      std::to_string(x));
    }
    return v;
  }

  double recurse(double a, double b, double fa, double fm, double fb, double whole,
                 double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = eval(lm);
    const double frm = eval(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    const double allowed = std::max(tol, opts.rel_tol * std::abs(left + right));
    if (depth >= opts.min_depth && std::abs(delta) <= 15.0 * allowed) {
      return left + right + delta / 15.0;
    }
    if (depth >= opts.max_depth) {
      throw NumericalIntegrationError("adaptive Simpson: no convergence on [" +
                                      std::to_string(a) + ", " + std::to_string(b) + "]");
    }
    return recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
           recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
  }
};

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance
/// opts.abs_tol, or relative tolerance opts.rel_tol where that is looser.
/// Returns 0 for an empty interval.
template <class F>
double adaptive_simpson(F&& f, double a, double b, const SimpsonOptions& opts = {}) {
  if (a == b) return 0.0;
  if (b < a) return -adaptive_simpson(f, b, a, opts);
  detail::SimpsonState<std::remove_reference_t<F>> st{f, opts};
  const double fa = st.eval(a);
  const double fb = st.eval(b);
  const double m = 0.5 * (a + b);
  const double fm = st.eval(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return st.recurse(a, b, fa, fm, fb, whole, opts.abs_tol, 0);
}

}  // namespace asd::quad

#pragma once

#include <cmath>
#include <functional>

#include "asd/common.hpp"

namespace testing {

inline asd::Vector unit(int d, int k) {
  asd::Vector e = asd::Vector::Zero(d);
  e[k] = 1.0;
  return e;
}

inline asd::Vector vec(std::initializer_list<double> xs) {
  asd::Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

// Composite Simpson with n (even) panels; independent of the library's
// adaptive scheme.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace testing

#pragma once

#include <cmath>
#include <functional>
#include <utility>

namespace scarot {

/// Golden-section minimization of a unimodal function on [a, b].
/// Returns (argmin, min). Runs until the bracket is below tol.
template <class F>
std::pair<double, double> golden_minimize(F&& f, double a, double b,
                                          double tol = 1e-10,
                                          int max_iter = 200) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < max_iter && (b - a) > tol; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  double xm = (a + b) / 2.0;
  return {xm, f(xm)};
}

/// Golden-section over [a, b] split into `restarts` equal subintervals;
/// guards against multiple local minima on a compact domain.
template <class F>
std::pair<double, double> golden_minimize_multistart(F&& f, double a, double b,
                                                     int restarts,
                                                     double tol = 1e-10) {
  double best_x = a, best_f = f(a);
  const double step = (b - a) / restarts;
  for (int r = 0; r < restarts; ++r) {
    auto [x, fx] = golden_minimize(f, a + r * step, a + (r + 1) * step, tol);
    if (fx < best_f) {
      best_f = fx;
      best_x = x;
    }
  }
  return {best_x, best_f};
}

}  // namespace scarot

#pragma once

#include <algorithm>
#include <cmath>

#include "darkpath/errors.hpp"

namespace darkpath {

struct OdeOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double initial_step = 0;  // 0 = auto
  long max_steps = 100000000;
};

struct OdeStats {
  long n_steps = 0;
  long n_rejected = 0;
  long n_rhs = 0;
};

/// Adaptive Dormand-Prince 5(4) embedded pair. Rhs has signature
/// rhs(t, y, dydt); State is any Eigen matrix/array type.
template <class State, class Rhs>
OdeStats integrate_dopri5(Rhs&& rhs, State& y, double t0, double t1,
                          const OdeOptions& opts = {}) {
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600,
                          e3 = 500.0 / 1113 - 7571.0 / 16695,
                          e4 = 125.0 / 192 - 393.0 / 640,
                          e5 = -2187.0 / 6784 + 92097.0 / 339200,
                          e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

  OdeStats stats;
  const double span = t1 - t0;
  if (span <= 0) return stats;
  double t = t0;
  double h = opts.initial_step > 0 ? opts.initial_step : span / 100;
  h = std::min(h, span);

  State k1 = y, k2 = y, k3 = y, k4 = y, k5 = y, k6 = y, k7 = y, ytmp = y, ynew = y;
  rhs(t, y, k1);
  ++stats.n_rhs;

  while (t < t1) {
    h = std::min(h, t1 - t);
    if (h < 1e-14 * span) throw NumericError("integrate_dopri5: step size underflow");
    if (stats.n_steps + stats.n_rejected > opts.max_steps)
      throw NumericError("integrate_dopri5: step budget exhausted");
    ytmp = y + h * (a21 * k1);
    rhs(t + c2 * h, ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    rhs(t + c3 * h, ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(t + c4 * h, ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(t + c5 * h, ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(t + h, ytmp, k6);
    ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    rhs(t + h, ynew, k7);
    stats.n_rhs += 6;

    const auto err_mat =
        (h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7)).eval();
    double err = 0;
    const auto* ye = y.data();
    const auto* yne = ynew.data();
    const auto* ee = err_mat.data();
    const long n = y.size();
    for (long i = 0; i < n; ++i) {
      const double scale =
          opts.abs_tol + opts.rel_tol * std::max(std::abs(ye[i]), std::abs(yne[i]));
      const double q = std::abs(ee[i]) / scale;
      err += q * q;
    }
    err = std::sqrt(err / n);

    if (err <= 1.0) {
      t += h;
      y.swap(ynew);
      k1.swap(k7);  // FSAL: k7 = rhs at the accepted point
      ++stats.n_steps;
      const double factor = err > 0 ? 0.9 * std::pow(err, -0.2) : 5.0;
      h *= std::clamp(factor, 0.2, 5.0);
    } else {
      ++stats.n_rejected;
      h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
    }
  }
  return stats;
}

/// Fixed-step classical RK4 (reference integrator for cross-checks).
template <class State, class Rhs>
void integrate_rk4(Rhs&& rhs, State& y, double t0, double t1, long n_steps) {
  const double h = (t1 - t0) / n_steps;
  State k1 = y, k2 = y, k3 = y, k4 = y, ytmp = y;
  for (long i = 0; i < n_steps; ++i) {
    const double t = t0 + i * h;
    rhs(t, y, k1);
    ytmp = y + (0.5 * h) * k1;
    rhs(t + 0.5 * h, ytmp, k2);
    ytmp = y + (0.5 * h) * k2;
    rhs(t + 0.5 * h, ytmp, k3);
    ytmp = y + h * k3;
    rhs(t + h, ytmp, k4);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
}

}  // namespace darkpath

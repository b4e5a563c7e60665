#pragma once

#include <stdexcept>
#include <string>

namespace darkpath {

/// Base class for all library failures.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent experiment configuration.
struct ConfigError : Error {
  using Error::Error;
};

/// Floating-point or solver breakdown (non-convergence, step underflow, ...).
struct NumericError : Error {
  using Error::Error;
};

/// A spectral gap fell below the configured floor while a coupling matrix
/// element between the two levels is non-negligible.
struct GapUnderflowError : Error {
  int level_a;
  int level_b;
  GapUnderflowError(int a, int b, double gap, double floor)
      : Error("gap underflow between levels " + std::to_string(a) + " and " +
              std::to_string(b) + ": |gap| = " + std::to_string(gap) +
              " < floor " + std::to_string(floor)),
        level_a(a),
        level_b(b) {}
};

/// An avoided/actual level crossing was detected along a control path.
struct CrossingError : Error {
  double t_at;
  CrossingError(double t, double gap)
      : Error("level crossing near t = " + std::to_string(t) +
              " (min gap " + std::to_string(gap) + ")"),
        t_at(t) {}
};

/// The optimal-time integral diverges because E - V(theta) vanishes at
/// theta_star faster than linearly.
struct DivergentTimeError : Error {
  double theta_star;
  explicit DivergentTimeError(double theta)
      : Error("transfer time diverges: E - V vanishes at theta = " +
              std::to_string(theta)),
        theta_star(theta) {}
};

}  // namespace darkpath

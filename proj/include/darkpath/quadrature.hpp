#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "darkpath/errors.hpp"

namespace darkpath {

struct QuadratureOptions {
  double rel_tol = 1e-12;
  double abs_tol = 1e-14;
  int max_depth = 48;
};

struct QuadratureResult {
  double value = 0;
  double error_estimate = 0;
  long evaluations = 0;
  bool converged = true;
};

namespace detail {

// 7-point Gauss / 15-point Kronrod pair (QUADPACK dqk15 abscissae/weights).
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

template <class F>
QuadratureResult gk15_panel(F&& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double kronrod = 0, gauss = 0;
  for (int i = 0; i < 7; ++i) {
    const double dx = h * kKronrodNodes[i];
    const double fsum = f(c - dx) + f(c + dx);
    kronrod += kKronrodWeights[i] * fsum;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * fsum;
  }
  const double fc = f(c);
  kronrod += kKronrodWeights[7] * fc;
  gauss += kGaussWeights[3] * fc;
  QuadratureResult r;
  r.value = kronrod * h;
  r.error_estimate = std::abs((kronrod - gauss) * h);
  r.evaluations = 15;
  return r;
}

template <class F>
void gk15_adaptive(F&& f, double a, double b, const QuadratureOptions& opts,
                   int depth, QuadratureResult& total) {
  const QuadratureResult panel = gk15_panel(f, a, b);
  total.evaluations += panel.evaluations;
  const double tol =
      std::max(opts.abs_tol, opts.rel_tol * std::abs(panel.value));
  if (panel.error_estimate <= tol || depth >= opts.max_depth) {
    if (panel.error_estimate > tol) total.converged = false;
    total.value += panel.value;
    total.error_estimate += panel.error_estimate;
    return;
  }
  const double m = 0.5 * (a + b);
  gk15_adaptive(f, a, m, opts, depth + 1, total);
  gk15_adaptive(f, m, b, opts, depth + 1, total);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod integration of f over [a, b].
template <class F>
QuadratureResult integrate(F&& f, double a, double b,
                           const QuadratureOptions& opts = {}) {
  QuadratureResult total;
  if (a == b) return total;
  detail::gk15_adaptive(f, a, b, opts, 0, total);
  return total;
}

/// Integration over [a, b] split at interior breakpoints (e.g. integrand
/// kinks), each segment integrated adaptively.
template <class F>
QuadratureResult integrate_segmented(F&& f, std::span<const double> points,
                                     const QuadratureOptions& opts = {}) {
  QuadratureResult total;
  for (size_t i = 0; i + 1 < points.size(); ++i) {
    const QuadratureResult r = integrate(f, points[i], points[i + 1], opts);
    total.value += r.value;
    total.error_estimate += r.error_estimate;
    total.evaluations += r.evaluations;
    total.converged = total.converged && r.converged;
  }
  return total;
}

/// Integration with node clustering toward both endpoints via the map
/// x = a + (b-a) u^2 (and its mirror). Tames integrands that become steep or
/// have inverse-square-root behavior at the interval ends.
template <class F>
QuadratureResult integrate_endpoint_clustered(F&& f, double a, double b,
                                              const QuadratureOptions& opts = {}) {
  QuadratureResult total;
  if (a == b) return total;
  const double m = 0.5 * (a + b);
  const double hl = m - a;
  const double hr = b - m;
  auto left = [&](double u) { return f(a + hl * u * u) * 2.0 * hl * u; };
  auto right = [&](double u) { return f(b - hr * u * u) * 2.0 * hr * u; };
  const QuadratureResult rl = integrate(left, 0.0, 1.0, opts);
  const QuadratureResult rr = integrate(right, 0.0, 1.0, opts);
  total.value = rl.value + rr.value;
  total.error_estimate = rl.error_estimate + rr.error_estimate;
  total.evaluations = rl.evaluations + rr.evaluations;
  total.converged = rl.converged && rr.converged;
  return total;
}

/// Cumulative integral of f at the given ascending nodes; result[0] = 0.
template <class F>
std::vector<double> cumulative_integral(F&& f, std::span<const double> nodes,
                                        const QuadratureOptions& opts = {}) {
  std::vector<double> out(nodes.size(), 0.0);
  for (size_t i = 1; i < nodes.size(); ++i)
    out[i] = out[i - 1] + integrate(f, nodes[i - 1], nodes[i], opts).value;
  return out;
}

}  // namespace darkpath

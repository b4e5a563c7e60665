#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "darkpath/control.hpp"
#include "darkpath/operator_algebra.hpp"

namespace darkpath {

struct FrameOptions {
  int n_grid = 2001;
  /// Relative floor (vs. max |E| at the sample) below which a gap counts as a
  /// near-degeneracy.
  double gap_floor_rel = 1e-6;
  /// Fail the build when the smallest adjacent gap along the path falls below
  /// the floor.
  bool check_crossing = true;
  /// Optional unit phases applied to the t = 0 snapshot before chaining the
  /// gauge, used to probe gauge invariance.
  std::optional<Vector> initial_gauge;
};

/// Gauge-aligned spectral data along a control path, with cumulative dynamical
/// and geometric phases.
struct AdiabaticFrame {
  std::vector<double> times;
  std::vector<SpectrumSnapshot> snapshots;
  RealMatrix dynamical_phases;  // n_grid x dim
  RealMatrix geometric_phases;  // n_grid x dim
  double gap_floor_rel = 1e-6;
  double min_gap = 0;
  double min_gap_t = 0;
  double energy_scale = 1;          // max |E_n| along the path
  double connection_imag_max = 0;   // max |integral of Im(i <E_n|dE_n/dt>)|

  int dim() const { return snapshots.empty() ? 0 : snapshots.front().dim(); }
  int n_grid() const { return static_cast<int>(times.size()); }
  double t_f() const { return times.empty() ? 0 : times.back(); }

  /// Largest grid index k with times[k] <= t.
  int bracket(double t) const {
    const double h = times[1] - times[0];
    int k = static_cast<int>(std::floor(t / h));
    if (k < 0) k = 0;
    if (k > n_grid() - 1) k = n_grid() - 1;
    return k;
  }
};

namespace detail {

inline void apply_initial_gauge(SpectrumSnapshot& snap, const Vector& phases) {
  for (int n = 0; n < snap.dim(); ++n) {
    complexd z = phases[n];
    const double a = std::abs(z);
    if (a > 0) snap.vectors.col(n) *= z / a;
  }
}

}  // namespace detail

/// Builds the adiabatic frame along a path: gauge-chained snapshots on a
/// uniform grid plus trapezoidal cumulative phases.
inline AdiabaticFrame build_frame(const HamiltonianFamily& fam,
                                  const ControlPath& path,
                                  const FrameOptions& opts = {}) {
  if (opts.n_grid < 2) throw std::invalid_argument("build_frame: n_grid < 2");
  validate_family(fam);
  const int n = opts.n_grid;
  const int d = fam.dim();
  AdiabaticFrame frame;
  frame.gap_floor_rel = opts.gap_floor_rel;
  frame.times.resize(n);
  frame.snapshots.reserve(n);
  frame.dynamical_phases = RealMatrix::Zero(n, d);
  frame.geometric_phases = RealMatrix::Zero(n, d);
  frame.min_gap = std::numeric_limits<double>::infinity();

  double scale = 0;
  for (int k = 0; k < n; ++k) {
    const double t = path.t_f * k / (n - 1);
    frame.times[k] = t;
    const Matrix h = fam.hamiltonian(path.value(t));
    SpectrumSnapshot snap =
        eigendecompose(h, k == 0 ? nullptr : &frame.snapshots.back());
    if (k == 0 && opts.initial_gauge) detail::apply_initial_gauge(snap, *opts.initial_gauge);
    scale = std::max(scale, snap.values.cwiseAbs().maxCoeff());
    for (int m = 0; m + 1 < d; ++m) {
      const double gap = snap.values[m + 1] - snap.values[m];
      if (gap < frame.min_gap) {
        frame.min_gap = gap;
        frame.min_gap_t = t;
      }
    }
    frame.snapshots.push_back(std::move(snap));
  }
  frame.energy_scale = scale > 0 ? scale : 1.0;
  if (opts.check_crossing && d > 1 &&
      frame.min_gap < opts.gap_floor_rel * frame.energy_scale)
    throw CrossingError(frame.min_gap_t, frame.min_gap);

  // Dynamical phases: cumulative trapezoid of E_n(t).
  for (int k = 1; k < n; ++k) {
    const double dt = frame.times[k] - frame.times[k - 1];
    for (int m = 0; m < d; ++m)
      frame.dynamical_phases(k, m) =
          frame.dynamical_phases(k - 1, m) +
          0.5 * dt * (frame.snapshots[k - 1].values[m] + frame.snapshots[k].values[m]);
  }

  // Geometric phases: cumulative trapezoid of i <E_n|dE_n/dt>, eigenvector
  // derivatives by central differences in the chained gauge. The imaginary
  // part of the connection must integrate to ~0 for normalized states; its
  // accumulated value is kept as a diagnostic.
  RealMatrix conn = RealMatrix::Zero(n, d);
  RealMatrix conn_imag = RealMatrix::Zero(n, d);
  for (int k = 0; k < n; ++k) {
    const int ka = k == 0 ? 0 : k - 1;
    const int kb = k == n - 1 ? n - 1 : k + 1;
    const double dt = frame.times[kb] - frame.times[ka];
    for (int m = 0; m < d; ++m) {
      const Vector dv =
          (frame.snapshots[kb].vectors.col(m) - frame.snapshots[ka].vectors.col(m)) / dt;
      const complexd c = complexd(0, 1) * frame.snapshots[k].vectors.col(m).dot(dv);
      conn(k, m) = c.real();
      conn_imag(k, m) = c.imag();
    }
  }
  RealVector imag_acc = RealVector::Zero(d);
  for (int k = 1; k < n; ++k) {
    const double dt = frame.times[k] - frame.times[k - 1];
    for (int m = 0; m < d; ++m) {
      frame.geometric_phases(k, m) = frame.geometric_phases(k - 1, m) +
                                     0.5 * dt * (conn(k - 1, m) + conn(k, m));
      imag_acc[m] += 0.5 * dt * (conn_imag(k - 1, m) + conn_imag(k, m));
      frame.connection_imag_max =
          std::max(frame.connection_imag_max, std::abs(imag_acc[m]));
    }
  }
  return frame;
}

namespace detail {

/// eps_{m,n} = <E_m|Hdot|E_n> / (E_m - E_n)^2 with eps_{n,n} = 0. Pairs with a
/// gap under the floor must have a negligible coupling element, otherwise the
/// near-degeneracy is reported.
inline Matrix eps_from_snapshot(const SpectrumSnapshot& snap, const Matrix& hdot,
                                double gap_floor_rel) {
  const int d = snap.dim();
  const Matrix w = snap.vectors.adjoint() * hdot * snap.vectors;
  const double escale = std::max(snap.values.cwiseAbs().maxCoeff(), 1e-300);
  const double floor = gap_floor_rel * escale;
  const double coupling_tol = 1e-12 * std::max(matrix_scale(hdot), 1e-300);
  Matrix eps = Matrix::Zero(d, d);
  for (int m = 0; m < d; ++m) {
    for (int nn = m + 1; nn < d; ++nn) {
      const double gap = snap.values[m] - snap.values[nn];
      if (std::abs(gap) < floor) {
        if (std::abs(w(m, nn)) > coupling_tol)
          throw GapUnderflowError(m, nn, std::abs(gap), floor);
        continue;
      }
      const double g2 = gap * gap;
      eps(m, nn) = w(m, nn) / g2;
      eps(nn, m) = std::conj(eps(m, nn));
    }
  }
  return eps;
}

/// Snapshot at arbitrary t, gauge-aligned to the bracketing grid snapshot.
inline SpectrumSnapshot snapshot_at(const AdiabaticFrame& frame,
                                    const HamiltonianFamily& fam,
                                    const ControlPath& path, double t) {
  const int k = frame.bracket(t);
  if (std::abs(t - frame.times[k]) < 1e-14 * std::max(1.0, frame.t_f()))
    return frame.snapshots[k];
  return eigendecompose(fam.hamiltonian(path.value(t)), &frame.snapshots[k]);
}

}  // namespace detail

/// Non-adiabatic parameter matrix at time t along the path.
inline Matrix nonadiabatic_eps(const AdiabaticFrame& frame,
                               const HamiltonianFamily& fam,
                               const ControlPath& path, double t) {
  if (t < 0 || t > path.t_f)
    throw std::invalid_argument("nonadiabatic_eps: t outside [0, t_f]");
  const SpectrumSnapshot snap = detail::snapshot_at(frame, fam, path, t);
  return detail::eps_from_snapshot(snap, fam.hamiltonian_dot(path.derivative(t)),
                                   frame.gap_floor_rel);
}

/// Leading-order transition amplitudes c_m(t) off the reference level. The
/// returned vector has c[ref] = 0; entries m != ref follow
/// c_m = -i eps_{m,ref}(t) + i eps_{m,ref}(0) e^{i (gamma_m - gamma_ref)}
///       e^{-i (phi_m - phi_ref)}.
inline Vector perturbative_amplitudes(const AdiabaticFrame& frame,
                                      const HamiltonianFamily& fam,
                                      const ControlPath& path, double t,
                                      int ref = 1) {
  const int d = frame.dim();
  if (ref < 0 || ref >= d)
    throw std::invalid_argument("perturbative_amplitudes: bad reference level");
  const SpectrumSnapshot snap = detail::snapshot_at(frame, fam, path, t);
  const Matrix eps_t = detail::eps_from_snapshot(
      snap, fam.hamiltonian_dot(path.derivative(t)), frame.gap_floor_rel);
  const Matrix eps_0 = detail::eps_from_snapshot(
      frame.snapshots.front(), fam.hamiltonian_dot(path.derivative(0.0)),
      frame.gap_floor_rel);

  // Phases at t: stored cumulative value at the bracketing node plus a
  // trapezoid increment using the fresh eigenvalues.
  const int k = frame.bracket(t);
  const double dt = t - frame.times[k];
  const complexd i1(0, 1);
  Vector c = Vector::Zero(d);
  for (int m = 0; m < d; ++m) {
    if (m == ref) continue;
    const double phi_m = frame.dynamical_phases(k, m) +
                         0.5 * dt * (frame.snapshots[k].values[m] + snap.values[m]);
    const double phi_r = frame.dynamical_phases(k, ref) +
                         0.5 * dt * (frame.snapshots[k].values[ref] + snap.values[ref]);
    const double gam_m = frame.geometric_phases(k, m);
    const double gam_r = frame.geometric_phases(k, ref);
    c[m] = -i1 * eps_t(m, ref) +
           i1 * eps_0(m, ref) * std::exp(i1 * (gam_m - gam_r)) *
               std::exp(-i1 * (phi_m - phi_r));
  }
  return c;
}

/// Second-order phase correction of the reference amplitude,
/// delta gamma_ref(t) = sum_{m != ref} int_0^t (E_m - E_ref) |eps_{m,ref}|^2.
inline double phase_correction(const AdiabaticFrame& frame,
                               const HamiltonianFamily& fam,
                               const ControlPath& path, double t, int ref = 1) {
  const int d = frame.dim();
  if (ref < 0 || ref >= d)
    throw std::invalid_argument("phase_correction: bad reference level");
  auto integrand_at = [&](const SpectrumSnapshot& snap, double tau) {
    const Matrix eps = detail::eps_from_snapshot(
        snap, fam.hamiltonian_dot(path.derivative(tau)), frame.gap_floor_rel);
    double s = 0;
    for (int m = 0; m < d; ++m) {
      if (m == ref) continue;
      s += (snap.values[m] - snap.values[ref]) * std::norm(eps(m, ref));
    }
    return s;
  };
  const int k = frame.bracket(t);
  double acc = 0;
  double prev = integrand_at(frame.snapshots[0], frame.times[0]);
  for (int j = 1; j <= k; ++j) {
    const double cur = integrand_at(frame.snapshots[j], frame.times[j]);
    acc += 0.5 * (frame.times[j] - frame.times[j - 1]) * (prev + cur);
    prev = cur;
  }
  const double dt = t - frame.times[k];
  if (dt > 0) {
    const SpectrumSnapshot snap = detail::snapshot_at(frame, fam, path, t);
    acc += 0.5 * dt * (prev + integrand_at(snap, t));
  }
  return acc;
}

}  // namespace darkpath

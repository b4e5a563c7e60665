#pragma once

#include <algorithm>
#include <functional>
#include <utility>
#include <vector>

#include "darkpath/control.hpp"
#include "darkpath/operator_algebra.hpp"
#include "darkpath/quadrature.hpp"

namespace darkpath {

using SpectrumProvider = std::function<SpectrumSnapshot(const RealVector&)>;

/// The classical-mechanics reduction of a controlled dissipative system: the
/// transported level, the dark/bright channel split, and a spectrum provider
/// (plain eigendecomposition unless the model supplies closed-form spectra,
/// e.g. to resolve exact degeneracies deterministically).
struct ActionModel {
  HamiltonianFamily fam;
  int ref_level = 1;
  std::vector<int> dark_channels;
  std::vector<int> bright_channels;
  double gap_floor_rel = 1e-6;
  SpectrumProvider spectrum;

  SpectrumSnapshot spectrum_at(const RealVector& g) const {
    if (spectrum) return spectrum(g);
    return eigendecompose(fam.hamiltonian(g));
  }
};

/// Splits channels into dark (no matrix elements out of the reference level at
/// any sample) and bright. Deterministic under sample reordering.
inline std::pair<std::vector<int>, std::vector<int>> classify_channels(
    const HamiltonianFamily& fam, const std::vector<RealVector>& g_samples,
    int ref_level = 1, double tol = 1e-10, const SpectrumProvider& spectrum = {}) {
  if (g_samples.empty())
    throw std::invalid_argument("classify_channels: need at least one sample");
  const int n_ch = static_cast<int>(fam.channels.size());
  std::vector<double> leakage(n_ch, 0.0);
  for (const auto& g : g_samples) {
    const SpectrumSnapshot snap =
        spectrum ? spectrum(g) : eigendecompose(fam.hamiltonian(g));
    const Vector ref = snap.state(ref_level);
    for (int a = 0; a < n_ch; ++a) {
      const Vector w = fam.channels[a].op * ref;
      // sum_{m != ref} |<E_m|A|E_ref>|^2 = |A psi|^2 - |<psi|A|psi>|^2
      const double out = w.squaredNorm() - std::norm(ref.dot(w));
      leakage[a] = std::max(leakage[a], out);
    }
  }
  std::pair<std::vector<int>, std::vector<int>> split;
  for (int a = 0; a < n_ch; ++a) {
    const double scale = fam.channels[a].op.squaredNorm();
    if (leakage[a] <= tol * (scale > 0 ? scale : 1.0))
      split.first.push_back(a);
    else
      split.second.push_back(a);
  }
  return split;
}

inline ActionModel make_action_model(HamiltonianFamily fam,
                                     const std::vector<RealVector>& g_samples,
                                     int ref_level = 1, double tol = 1e-10,
                                     SpectrumProvider spectrum = {}) {
  validate_family(fam);
  ActionModel model;
  model.fam = std::move(fam);
  model.ref_level = ref_level;
  model.spectrum = std::move(spectrum);
  auto split = classify_channels(model.fam, g_samples, ref_level, tol, model.spectrum);
  model.dark_channels = std::move(split.first);
  model.bright_channels = std::move(split.second);
  return model;
}

/// Direct dissipative loss rate of the transported eigenstate,
///   V(G) = - sum_bright rate * (<E1|A^+A|E1> - |<E1|A|E1>|^2)  (<= 0).
inline double potential(const ActionModel& model, const RealVector& g) {
  const SpectrumSnapshot snap = model.spectrum_at(g);
  const Vector ref = snap.state(model.ref_level);
  double v = 0;
  for (int a : model.bright_channels) {
    const auto& ch = model.fam.channels[a];
    const Vector w = ch.op * ref;
    v -= ch.rate * (w.squaredNorm() - std::norm(ref.dot(w)));
  }
  return v;
}

namespace detail {

/// Linear map from control velocities to leading-order amplitudes:
/// c_n = -i sum_j Gdot_j C(n, j), with C(n, j) = <E_n|H_j|E_ref>/(E_n-E_ref)^2.
/// Rows for levels whose gap to the reference is under the floor must have a
/// vanishing numerator (exactly decoupled levels), otherwise the
/// near-degeneracy is reported.
inline Matrix amplitude_map(const ActionModel& model, const SpectrumSnapshot& snap) {
  const int d = snap.dim();
  const int nj = model.fam.n_controls();
  const int ref = model.ref_level;
  const double escale = std::max(snap.values.cwiseAbs().maxCoeff(), 1e-300);
  const double floor = model.gap_floor_rel * escale;
  Matrix c_map = Matrix::Zero(d, nj);
  const Vector refv = snap.state(ref);
  for (int j = 0; j < nj; ++j) {
    const Vector hj_ref = model.fam.generators[j] * refv;
    const double coupling_tol = 1e-12 * std::max(matrix_scale(model.fam.generators[j]), 1e-300);
    for (int n = 0; n < d; ++n) {
      if (n == ref) continue;
      const double gap = snap.values[n] - snap.values[ref];
      const complexd num = snap.state(n).dot(hj_ref);
      if (std::abs(gap) < floor) {
        if (std::abs(num) > coupling_tol) throw GapUnderflowError(n, ref, std::abs(gap), floor);
        continue;
      }
      c_map(n, j) = num / (gap * gap);
    }
  }
  return c_map;
}

}  // namespace detail

/// Inverse effective mass tensor M^{-1}(G): the PSD quadratic form with
/// K = 1/2 Gdot^T M^{-1} Gdot, assembled from the dark channels and the
/// amplitude map.
inline RealMatrix inverse_mass(const ActionModel& model, const RealVector& g) {
  const SpectrumSnapshot snap = model.spectrum_at(g);
  const int d = snap.dim();
  const int nj = model.fam.n_controls();
  const int ref = model.ref_level;
  const Matrix c_map = detail::amplitude_map(model, snap);
  const Vector refv = snap.state(ref);
  RealMatrix minv = RealMatrix::Zero(nj, nj);
  for (int a : model.dark_channels) {
    const auto& ch = model.fam.channels[a];
    if (ch.rate == 0) continue;
    const complexd a11 = refv.dot(ch.op * refv);
    // Column j of W: components of (A - a11) sum_n C(n,j) |E_n>.
    Matrix w = Matrix::Zero(d, nj);
    for (int n = 0; n < d; ++n) {
      if (n == ref) continue;
      const Vector u = ch.op * snap.state(n) - a11 * snap.state(n);
      for (int j = 0; j < nj; ++j) w.col(j) += c_map(n, j) * u;
    }
    // Project out the reference component and accumulate the quadratic form.
    const Eigen::RowVectorXcd proj = refv.adjoint() * w;
    Matrix gram = w.adjoint() * w;
    gram -= proj.adjoint() * proj;
    minv += 2.0 * ch.rate * gram.real();
  }
  return 0.5 * (minv + minv.transpose());
}

inline double kinetic(const ActionModel& model, const RealVector& g,
                      const RealVector& gdot) {
  const RealMatrix minv = inverse_mass(model, g);
  return 0.5 * gdot.dot(minv * gdot);
}

struct ActionOptions {
  QuadratureOptions quad{1e-11, 1e-14, 40};
  bool require_smooth = true;
};

/// The fidelity-loss action Delta F = int (K - V) dt along a path.
inline double action(const ActionModel& model, const ControlPath& path,
                     const ActionOptions& opts = {}) {
  if (opts.require_smooth && !path.boundary_smooth)
    throw std::invalid_argument("action: path does not declare smooth boundaries");
  auto lagrangian = [&](double t) {
    const RealVector g = path.value(t);
    const RealVector gdot = path.derivative(t);
    const SpectrumSnapshot snap = model.spectrum_at(g);
    const Matrix c_map = detail::amplitude_map(model, snap);
    const Vector refv = snap.state(model.ref_level);
    // K at this point.
    Vector c = Vector::Zero(snap.dim());
    for (int n = 0; n < snap.dim(); ++n)
      for (int j = 0; j < model.fam.n_controls(); ++j)
        c[n] += complexd(0, -1) * c_map(n, j) * gdot[j];
    double k = 0;
    for (int a : model.dark_channels) {
      const auto& ch = model.fam.channels[a];
      if (ch.rate == 0) continue;
      const complexd a11 = refv.dot(ch.op * refv);
      Vector w = Vector::Zero(snap.dim());
      for (int n = 0; n < snap.dim(); ++n) {
        if (n == model.ref_level) continue;
        w += c[n] * (ch.op * snap.state(n) - a11 * snap.state(n));
      }
      k += ch.rate * (w.squaredNorm() - std::norm(refv.dot(w)));
    }
    // V at this point.
    double v = 0;
    for (int a : model.bright_channels) {
      const auto& ch = model.fam.channels[a];
      const Vector w = ch.op * refv;
      v -= ch.rate * (w.squaredNorm() - std::norm(refv.dot(w)));
    }
    return k - v;
  };
  const QuadratureResult r = integrate(lagrangian, 0.0, path.t_f, opts.quad);
  if (!r.converged)
    throw NumericError("action: quadrature did not converge (error estimate " +
                       std::to_string(r.error_estimate) + ")");
  return r.value;
}

}  // namespace darkpath

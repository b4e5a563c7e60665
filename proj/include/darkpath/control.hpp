#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "darkpath/operator_algebra.hpp"

namespace darkpath {

/// Controlled open system H(t) = sum_j G_j(t) H_j plus Lindblad channels.
struct HamiltonianFamily {
  std::vector<Matrix> generators;
  std::vector<LindbladChannel> channels;

  int dim() const {
    return generators.empty() ? 0 : static_cast<int>(generators.front().rows());
  }
  int n_controls() const { return static_cast<int>(generators.size()); }

  Matrix hamiltonian(const RealVector& g) const {
    Matrix h = Matrix::Zero(dim(), dim());
    for (int j = 0; j < n_controls(); ++j) h += g[j] * generators[j];
    return h;
  }

  /// dH/dt for control velocities gdot (same contraction as hamiltonian()).
  Matrix hamiltonian_dot(const RealVector& gdot) const { return hamiltonian(gdot); }
};

inline void validate_family(const HamiltonianFamily& fam) {
  if (fam.generators.empty())
    throw std::invalid_argument("HamiltonianFamily: no generators");
  for (const auto& h : fam.generators) {
    require_hermitian(h, "HamiltonianFamily generator");
    if (h.rows() != fam.dim())
      throw std::invalid_argument("HamiltonianFamily: generator dimension mismatch");
  }
  for (const auto& ch : fam.channels) {
    if (ch.op.rows() != fam.dim() || ch.op.cols() != fam.dim())
      throw std::invalid_argument("HamiltonianFamily: channel dimension mismatch");
    if (ch.rate < 0) throw std::invalid_argument("HamiltonianFamily: negative rate");
  }
}

/// A parameterized control trajectory G(t) on [0, t_f].
struct ControlPath {
  int n_controls = 0;
  double t_f = 0;
  bool boundary_smooth = false;
  std::function<RealVector(double)> value;
  std::function<RealVector(double)> derivative;
};

/// Verifies the boundary_smooth contract: |Gdot| at both ends must be
/// negligible against the largest |Gdot| along the path.
inline bool check_boundary_smooth(const ControlPath& path, int n_probe = 257,
                                  double rel_tol = 1e-9) {
  double max_norm = 0;
  for (int i = 0; i < n_probe; ++i) {
    const double t = path.t_f * i / (n_probe - 1);
    max_norm = std::max(max_norm, path.derivative(t).norm());
  }
  if (max_norm == 0) return true;
  return path.derivative(0.0).norm() <= rel_tol * max_norm &&
         path.derivative(path.t_f).norm() <= rel_tol * max_norm;
}

/// Path with constant controls.
inline ControlPath constant_path(RealVector g, double t_f) {
  ControlPath p;
  p.n_controls = static_cast<int>(g.size());
  p.t_f = t_f;
  p.boundary_smooth = true;
  p.value = [g](double) { return g; };
  p.derivative = [n = g.size()](double) { return RealVector::Zero(n).eval(); };
  return p;
}

/// Path interpolating linearly between two control vectors.
inline ControlPath linear_path(RealVector g0, RealVector g1, double t_f) {
  ControlPath p;
  p.n_controls = static_cast<int>(g0.size());
  p.t_f = t_f;
  p.boundary_smooth = false;
  RealVector slope = (g1 - g0) / t_f;
  p.value = [g0, slope](double t) { return (g0 + t * slope).eval(); };
  p.derivative = [slope](double) { return slope; };
  return p;
}

}  // namespace darkpath

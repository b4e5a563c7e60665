#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "darkpath/errors.hpp"

namespace darkpath {

using complexd = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

inline double matrix_scale(const Matrix& a) {
  double s = a.cwiseAbs().maxCoeff();
  return s > 0 ? s : 1.0;
}

inline double hermiticity_error(const Matrix& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const Matrix& a, double rel_tol = 1e-12) {
  if (a.rows() != a.cols()) return false;
  return hermiticity_error(a) <= rel_tol * matrix_scale(a);
}

inline void require_hermitian(const Matrix& a, const char* what) {
  if (!a.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entries");
  if (!is_hermitian(a)) throw std::invalid_argument(std::string(what) + ": matrix is not Hermitian");
}

inline void require_same_dim(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

/// One Lindblad dissipation channel: rate * D[op].
struct LindbladChannel {
  Matrix op;
  double rate = 0.0;
};

/// Instantaneous eigensystem of a Hermitian operator. Eigenvalues ascending,
/// eigenvector columns orthonormal with a deterministic gauge.
struct SpectrumSnapshot {
  Eigen::VectorXd values;
  Matrix vectors;

  int dim() const { return static_cast<int>(values.size()); }
  Vector state(int n) const { return vectors.col(n); }
};

namespace detail {

// Default gauge: rotate each column so its largest-magnitude entry is
// real-positive.
inline void canonical_gauge(Matrix& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    Eigen::Index imax = 0;
    vectors.col(c).cwiseAbs().maxCoeff(&imax);
    const complexd z = vectors(imax, c);
    if (std::abs(z) > 0) vectors.col(c) *= std::conj(z) / std::abs(z);
  }
}

// Rotate each column by a unit phase so that its overlap with the reference
// column of largest |overlap| becomes real-positive.
inline void align_gauge(Matrix& vectors, const Matrix& ref) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index r = 0; r < ref.cols(); ++r) {
      const double o = std::abs(ref.col(r).dot(vectors.col(c)));
      if (o > best_abs) {
        best_abs = o;
        best = r;
      }
    }
    const complexd overlap = ref.col(best).dot(vectors.col(c));
    if (std::abs(overlap) > 0) vectors.col(c) *= std::conj(overlap) / std::abs(overlap);
  }
}

}  // namespace detail

/// Hermitian eigendecomposition, eigenvalues ascending. When gauge_ref is
/// given, each eigenvector is phased so that its overlap with the matching
/// reference vector is real and positive; otherwise a canonical gauge is used.
inline SpectrumSnapshot eigendecompose(const Matrix& h,
                                       const SpectrumSnapshot* gauge_ref = nullptr) {
  require_hermitian(h, "eigendecompose");
  if (gauge_ref && gauge_ref->dim() != h.rows())
    throw std::invalid_argument("eigendecompose: gauge_ref dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
  if (solver.info() != Eigen::Success)
    throw NumericError("eigendecompose: eigensolver failed to converge");
  SpectrumSnapshot snap;
  snap.values = solver.eigenvalues();
  snap.vectors = solver.eigenvectors();
  if (gauge_ref)
    detail::align_gauge(snap.vectors, gauge_ref->vectors);
  else
    detail::canonical_gauge(snap.vectors);
  return snap;
}

/// Right-hand side of the Lindblad master equation,
///   -i [H, rho] + sum_k rate_k (A rho A^+ - 1/2 {A^+ A, rho}).
inline Matrix lindblad_rhs(const Matrix& rho, const Matrix& h,
                           std::span<const LindbladChannel> channels) {
  require_same_dim(rho, h, "lindblad_rhs");
  const complexd mi(0.0, -1.0);
  Matrix out = mi * (h * rho - rho * h);
  for (const auto& ch : channels) {
    if (ch.rate < 0) throw std::invalid_argument("lindblad_rhs: negative rate");
    if (ch.rate == 0) continue;
    require_same_dim(ch.op, rho, "lindblad_rhs channel");
    const Matrix ad = ch.op.adjoint();
    const Matrix ada = ad * ch.op;
    out += ch.rate * (ch.op * rho * ad - 0.5 * (ada * rho + rho * ada));
  }
  return out;
}

inline Matrix lindblad_rhs(const Matrix& rho, const Matrix& h,
                           const std::vector<LindbladChannel>& channels) {
  return lindblad_rhs(rho, h, std::span<const LindbladChannel>(channels));
}

inline complexd expectation(const Matrix& a, const Vector& psi) {
  if (a.rows() != psi.size())
    throw std::invalid_argument("expectation: dimension mismatch");
  return psi.dot(a * psi);
}

inline complexd expectation(const Matrix& a, const Matrix& rho) {
  require_same_dim(a, rho, "expectation");
  return (a * rho).trace();
}

/// Diagnostics for a candidate density matrix.
struct DensityCheck {
  double hermiticity_err = 0;
  double trace_err = 0;
  double min_eigenvalue = 0;
  bool ok = false;
};

inline DensityCheck check_density(const Matrix& rho, double herm_tol = 1e-10,
                                  double trace_tol = 1e-9, double eig_tol = 1e-8) {
  DensityCheck c;
  c.hermiticity_err = hermiticity_error(rho);
  c.trace_err = std::abs(rho.trace() - complexd(1.0, 0.0));
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (rho + rho.adjoint()));
  c.min_eigenvalue = solver.eigenvalues().minCoeff();
  c.ok = c.hermiticity_err <= herm_tol && c.trace_err <= trace_tol &&
         c.min_eigenvalue >= -eig_tol;
  return c;
}

inline void require_density(const Matrix& rho) {
  const DensityCheck c = check_density(rho);
  if (!c.ok)
    throw std::invalid_argument(
        "invalid density matrix (hermiticity " + std::to_string(c.hermiticity_err) +
        ", trace error " + std::to_string(c.trace_err) + ", min eigenvalue " +
        std::to_string(c.min_eigenvalue) + ")");
}

}  // namespace darkpath

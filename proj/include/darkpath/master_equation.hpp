#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "darkpath/control.hpp"
#include "darkpath/lambda_system.hpp"
#include "darkpath/ode.hpp"
#include "darkpath/operator_algebra.hpp"

namespace darkpath {

/// Truncated Fourier parameterization of the pulse rate,
///   thetadot(t) = pi/(2 t_f) + sum_n alpha_n cos(n pi t / t_f).
/// The constant term is fixed by theta(t_f) = pi/2; every cosine integrates to
/// a sine vanishing at both endpoints, so the boundary values hold identically.
struct FourierPulse {
  double t_f = 1;
  std::vector<double> coefficients;

  int n() const { return static_cast<int>(coefficients.size()); }
};

/// (theta, thetadot) at time t.
inline std::pair<double, double> theta_of_t(const FourierPulse& pulse, double t) {
  const double tf = pulse.t_f;
  double theta = kHalfPi * t / tf;
  double rate = kHalfPi / tf;
  for (int n = 1; n <= pulse.n(); ++n) {
    const double w = n * kPi / tf;
    theta += pulse.coefficients[n - 1] * std::sin(w * t) / w;
    rate += pulse.coefficients[n - 1] * std::cos(w * t);
  }
  return {theta, rate};
}

inline ControlPath fourier_path(const LambdaParams& p, const FourierPulse& pulse) {
  return lambda_path(
      p, [pulse](double t) { return theta_of_t(pulse, t).first; },
      [pulse](double t) { return theta_of_t(pulse, t).second; }, pulse.t_f,
      /*boundary_smooth=*/false);
}

struct PropagationOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
};

struct PropagationReport {
  Matrix rho;
  Vector psi;
  double fidelity = 0;
  double trace_drift = 0;
  double hermiticity_drift = 0;
  double norm_drift = 0;
  long n_steps = 0;
  long n_rhs = 0;
};

namespace detail {

/// Lindblad right-hand side with per-family precomputation and reusable
/// workspace; the inner loop of every fidelity evaluation.
class LindbladGenerator {
 public:
  LindbladGenerator(const HamiltonianFamily& fam, const ControlPath& path)
      : fam_(&fam), path_(&path) {
    const int d = fam.dim();
    for (const auto& ch : fam.channels) {
      if (ch.rate == 0) continue;
      rates_.push_back(ch.rate);
      a_.push_back(ch.op);
      ad_.push_back(ch.op.adjoint());
      ada_.push_back(ch.op.adjoint() * ch.op);
    }
    h_ = Matrix::Zero(d, d);
    t1_ = Matrix::Zero(d, d);
    t2_ = Matrix::Zero(d, d);
  }

  void operator()(double t, const Matrix& rho, Matrix& out) {
    const RealVector g = path_->value(t);
    h_.setZero();
    for (int j = 0; j < fam_->n_controls(); ++j) h_ += g[j] * fam_->generators[j];
    const complexd mi(0, -1);
    t1_.noalias() = h_ * rho;
    t2_.noalias() = rho * h_;
    out = mi * (t1_ - t2_);
    for (size_t k = 0; k < rates_.size(); ++k) {
      t1_.noalias() = a_[k] * rho;
      t2_.noalias() = t1_ * ad_[k];
      out += rates_[k] * t2_;
      t1_.noalias() = ada_[k] * rho;
      out -= (0.5 * rates_[k]) * t1_;
      t1_.noalias() = rho * ada_[k];
      out -= (0.5 * rates_[k]) * t1_;
    }
  }

 private:
  const HamiltonianFamily* fam_;
  const ControlPath* path_;
  std::vector<Matrix> a_, ad_, ada_;
  std::vector<double> rates_;
  Matrix h_, t1_, t2_;
};

class SchrodingerGenerator {
 public:
  SchrodingerGenerator(const HamiltonianFamily& fam, const ControlPath& path)
      : fam_(&fam), path_(&path), h_(Matrix::Zero(fam.dim(), fam.dim())) {}

  void operator()(double t, const Vector& psi, Vector& out) {
    const RealVector g = path_->value(t);
    h_.setZero();
    for (int j = 0; j < fam_->n_controls(); ++j) h_ += g[j] * fam_->generators[j];
    out.noalias() = h_ * psi;
    out *= complexd(0, -1);
  }

 private:
  const HamiltonianFamily* fam_;
  const ControlPath* path_;
  Matrix h_;
};

}  // namespace detail

/// Propagates the time-dependent Lindblad equation along a control path.
/// No trace renormalization is applied: the drifts are diagnostics. Optional
/// sample times invoke on_sample(t, rho) at exactly those times.
inline PropagationReport propagate_lindblad(
    const HamiltonianFamily& fam, const ControlPath& path, Matrix rho0,
    const PropagationOptions& opts = {},
    const std::vector<double>& sample_times = {},
    const std::function<void(double, const Matrix&)>& on_sample = {}) {
  require_density(rho0);
  if (rho0.rows() != fam.dim())
    throw std::invalid_argument("propagate_lindblad: state dimension mismatch");
  detail::LindbladGenerator gen(fam, path);
  OdeOptions ode{opts.rel_tol, opts.abs_tol};
  PropagationReport rep;
  double t = 0;
  OdeStats total;
  auto advance = [&](double to) {
    if (to > t) {
      const OdeStats s = integrate_dopri5(gen, rho0, t, to, ode);
      total.n_steps += s.n_steps;
      total.n_rhs += s.n_rhs;
      t = to;
    }
  };
  for (double ts : sample_times) {
    if (ts < 0 || ts > path.t_f)
      throw std::invalid_argument("propagate_lindblad: sample time outside [0, t_f]");
    advance(ts);
    if (on_sample) on_sample(ts, rho0);
  }
  advance(path.t_f);
  rep.rho = std::move(rho0);
  rep.trace_drift = std::abs(rep.rho.trace() - complexd(1, 0));
  rep.hermiticity_drift = hermiticity_error(rep.rho);
  rep.n_steps = total.n_steps;
  rep.n_rhs = total.n_rhs;
  return rep;
}

/// Exact unitary reference propagation of a pure state.
inline PropagationReport propagate_schrodinger(
    const HamiltonianFamily& fam, const ControlPath& path, Vector psi0,
    const PropagationOptions& opts = {},
    const std::vector<double>& sample_times = {},
    const std::function<void(double, const Vector&)>& on_sample = {}) {
  if (psi0.size() != fam.dim())
    throw std::invalid_argument("propagate_schrodinger: state dimension mismatch");
  detail::SchrodingerGenerator gen(fam, path);
  OdeOptions ode{opts.rel_tol, opts.abs_tol};
  PropagationReport rep;
  double t = 0;
  OdeStats total;
  auto advance = [&](double to) {
    if (to > t) {
      const OdeStats s = integrate_dopri5(gen, psi0, t, to, ode);
      total.n_steps += s.n_steps;
      total.n_rhs += s.n_rhs;
      t = to;
    }
  };
  for (double ts : sample_times) {
    advance(ts);
    if (on_sample) on_sample(ts, psi0);
  }
  advance(path.t_f);
  rep.psi = std::move(psi0);
  rep.norm_drift = std::abs(rep.psi.norm() - 1.0);
  rep.n_steps = total.n_steps;
  rep.n_rhs = total.n_rhs;
  return rep;
}

/// Initial state |e,g,0><e,g,0| of the transfer protocol.
inline Matrix lambda_initial_density() {
  Matrix rho = Matrix::Zero(kLambdaDim, kLambdaDim);
  rho(kBasisE1G0, kBasisE1G0) = 1;
  return rho;
}

/// Transfer fidelity F = <E_1(t_f)| rho(t_f) |E_1(t_f)>. The target is the
/// projector onto |g,e,0>, so the sign of |E_1(t_f)> is irrelevant.
inline double transfer_fidelity(const LambdaParams& p, const ControlPath& path,
                                const PropagationOptions& opts = {}) {
  validate(p);
  const HamiltonianFamily fam = lambda_family(p);
  const PropagationReport rep = propagate_lindblad(fam, path, lambda_initial_density(), opts);
  return rep.rho(kBasisG1E0, kBasisG1E0).real();
}

inline double transfer_fidelity(const LambdaParams& p, const FourierPulse& pulse,
                                const PropagationOptions& opts = {}) {
  return transfer_fidelity(p, fourier_path(p, pulse), opts);
}

/// Fixed-step RK4 reference for integrator cross-checks.
inline Matrix propagate_lindblad_rk4(const HamiltonianFamily& fam,
                                     const ControlPath& path, Matrix rho0,
                                     long n_steps) {
  detail::LindbladGenerator gen(fam, path);
  integrate_rk4(gen, rho0, 0.0, path.t_f, n_steps);
  return rho0;
}

}  // namespace darkpath

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <variant>
#include <vector>

#include "darkpath/action.hpp"
#include "darkpath/control.hpp"
#include "darkpath/interp.hpp"
#include "darkpath/least_action.hpp"
#include "darkpath/operator_algebra.hpp"
#include "darkpath/quadrature.hpp"

namespace darkpath {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kHalfPi = std::numbers::pi / 2;

/// Parallel adiabatic passage: constant total coupling.
struct PapConstraint {
  double G_max = 1.0;
};

/// Per-coupling bounds G_1 <= G1_max, G_2 <= G2_max.
struct BoundedConstraint {
  double G1_max = 1.0;
  double G2_max = 1.0;
};

using CouplingConstraint = std::variant<PapConstraint, BoundedConstraint>;

/// Rates and the coupling constraint of the two-qubit + dissipative-bus model.
/// All rates and times are in units of the reference coupling (G_max or
/// G_{1,max} set to 1). The bare frequency omega never enters: the dynamics is
/// written in the resonant rotating frame where only the couplings remain.
struct LambdaParams {
  double gamma1_R = 0;
  double gamma2_R = 0;
  double gamma1_phi = 0;
  double gamma2_phi = 0;
  double kappa_R = 0;
  double kappa_phi = 0;
  CouplingConstraint constraint = PapConstraint{1.0};

  double kappa_tot() const { return kappa_R + kappa_phi; }
  double gamma_phi_tot() const { return gamma1_phi + gamma2_phi; }
  double gamma_tot() const { return gamma1_R + gamma2_R + gamma_phi_tot(); }
  double r1() const { return gamma_tot() > 0 ? gamma1_R / gamma_tot() : 0.0; }
  double r2() const { return gamma_tot() > 0 ? gamma2_R / gamma_tot() : 0.0; }

  bool is_pap() const { return std::holds_alternative<PapConstraint>(constraint); }

  double theta_bar() const {
    const auto* b = std::get_if<BoundedConstraint>(&constraint);
    if (!b) throw std::invalid_argument("theta_bar: PAP constraint has no theta_bar");
    return std::atan2(b->G1_max, b->G2_max);
  }
};

inline void validate(const LambdaParams& p) {
  for (double r : {p.gamma1_R, p.gamma2_R, p.gamma1_phi, p.gamma2_phi, p.kappa_R, p.kappa_phi})
    if (!(r >= 0)) throw std::invalid_argument("LambdaParams: rates must be >= 0");
  if (const auto* pap = std::get_if<PapConstraint>(&p.constraint)) {
    if (!(pap->G_max > 0)) throw std::invalid_argument("LambdaParams: G_max must be > 0");
  } else {
    const auto& b = std::get<BoundedConstraint>(p.constraint);
    if (!(b.G1_max > 0) || !(b.G2_max > 0))
      throw std::invalid_argument("LambdaParams: coupling bounds must be > 0");
  }
}

// ---------------------------------------------------------------------------
// Geometry of the four-level subspace.
// Basis order: 0 = |e,g,0>, 1 = |g,e,0>, 2 = |g,g,1>, 3 = |g,g,0>.
// ---------------------------------------------------------------------------

inline constexpr int kLambdaDim = 4;
inline constexpr int kBasisE1G0 = 0;  // excitation on qubit 1
inline constexpr int kBasisG1E0 = 1;  // excitation on qubit 2
inline constexpr int kBasisBus = 2;   // bus photon
inline constexpr int kBasisGround = 3;

/// Index of the transported eigenstate |E_1> in ascending spectral order, for
/// both the 4-level space (-G, 0, 0, +G) and the single-excitation block.
inline constexpr int kLambdaRefLevel = 1;

/// Largest admissible total coupling at mixing angle theta.
inline double gmax(double theta, const LambdaParams& p) {
  if (const auto* pap = std::get_if<PapConstraint>(&p.constraint)) return pap->G_max;
  const auto& b = std::get<BoundedConstraint>(p.constraint);
  return theta < p.theta_bar() ? b.G2_max / std::cos(theta) : b.G1_max / std::sin(theta);
}

/// d gmax / d theta (one-sided at the kink).
inline double gmax_derivative(double theta, const LambdaParams& p) {
  if (p.is_pap()) return 0.0;
  const auto& b = std::get<BoundedConstraint>(p.constraint);
  if (theta < p.theta_bar()) {
    const double c = std::cos(theta);
    return b.G2_max * std::sin(theta) / (c * c);
  }
  const double s = std::sin(theta);
  return -b.G1_max * std::cos(theta) / (s * s);
}

/// Effective 1-D potential V(theta) <= 0.
inline double potential_theta(double theta, const LambdaParams& p) {
  const double c = std::cos(theta), s = std::sin(theta);
  const double s2 = std::sin(2 * theta);
  return -(p.gamma1_R * c * c + p.gamma2_R * s * s + p.gamma_phi_tot() * s2 * s2);
}

/// Leading-order fidelity-loss rate along a trajectory point.
inline double loss_integrand(double theta, double theta_dot, double g,
                             const LambdaParams& p) {
  if (!(g > 0)) throw std::invalid_argument("loss_integrand: G must be > 0");
  return p.kappa_tot() * theta_dot * theta_dot / (g * g) - potential_theta(theta, p);
}

/// Closed-form instantaneous eigensystem of the 4-level model at (theta, G),
/// ascending (-G, 0, 0, +G) with |E_1> before |E_0> in the degenerate pair.
inline SpectrumSnapshot lambda_snapshot(double theta, double g) {
  const double c = std::cos(theta), s = std::sin(theta);
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  SpectrumSnapshot snap;
  snap.values = Eigen::Vector4d(-g, 0.0, 0.0, g);
  snap.vectors = Matrix::Zero(4, 4);
  snap.vectors.col(0) << s * inv_sqrt2, c * inv_sqrt2, -inv_sqrt2, 0;  // E_-
  snap.vectors.col(1) << c, -s, 0, 0;                                  // E_1
  snap.vectors.col(2) << 0, 0, 0, 1;                                   // E_0
  snap.vectors.col(3) << s * inv_sqrt2, c * inv_sqrt2, inv_sqrt2, 0;   // E_+
  return snap;
}

/// Same for the 3-level single-excitation block, ascending (-G, 0, +G).
inline SpectrumSnapshot lambda_block_snapshot(double theta, double g) {
  const double c = std::cos(theta), s = std::sin(theta);
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  SpectrumSnapshot snap;
  snap.values = Eigen::Vector3d(-g, 0.0, g);
  snap.vectors = Matrix::Zero(3, 3);
  snap.vectors.col(0) << s * inv_sqrt2, c * inv_sqrt2, -inv_sqrt2;
  snap.vectors.col(1) << c, -s, 0;
  snap.vectors.col(2) << s * inv_sqrt2, c * inv_sqrt2, inv_sqrt2;
  return snap;
}

/// Four-level family: generators H_j = a^+ sigma_j^- + a sigma_j^+ restricted
/// to the subspace, plus the six dissipation channels.
inline HamiltonianFamily lambda_family(const LambdaParams& p) {
  validate(p);
  HamiltonianFamily fam;
  Matrix h1 = Matrix::Zero(4, 4), h2 = Matrix::Zero(4, 4);
  h1(kBasisBus, kBasisE1G0) = 1;
  h1(kBasisE1G0, kBasisBus) = 1;
  h2(kBasisBus, kBasisG1E0) = 1;
  h2(kBasisG1E0, kBasisBus) = 1;
  fam.generators = {h1, h2};

  Matrix sm1 = Matrix::Zero(4, 4), sm2 = Matrix::Zero(4, 4);
  sm1(kBasisGround, kBasisE1G0) = 1;
  sm2(kBasisGround, kBasisG1E0) = 1;
  Matrix sz1 = Matrix::Zero(4, 4), sz2 = Matrix::Zero(4, 4);
  sz1.diagonal() << 1, -1, -1, -1;
  sz2.diagonal() << -1, 1, -1, -1;
  Matrix a = Matrix::Zero(4, 4), num = Matrix::Zero(4, 4);
  a(kBasisGround, kBasisBus) = 1;
  num(kBasisBus, kBasisBus) = 1;
  fam.channels = {{sm1, p.gamma1_R}, {sm2, p.gamma2_R}, {sz1, p.gamma1_phi},
                  {sz2, p.gamma2_phi}, {a, p.kappa_R},  {num, p.kappa_phi}};
  return fam;
}

/// Single-excitation block (no channels); used for frames and pure-state
/// propagation where the spectator ground state is irrelevant.
inline HamiltonianFamily lambda_block_family() {
  HamiltonianFamily fam;
  Matrix h1 = Matrix::Zero(3, 3), h2 = Matrix::Zero(3, 3);
  h1(2, 0) = 1;
  h1(0, 2) = 1;
  h2(2, 1) = 1;
  h2(1, 2) = 1;
  fam.generators = {h1, h2};
  return fam;
}

inline RealVector lambda_controls(double theta, const LambdaParams& p) {
  const double g = gmax(theta, p);
  return Eigen::Vector2d(g * std::sin(theta), g * std::cos(theta));
}

/// Control path G(t) driven by a mixing-angle schedule theta(t).
inline ControlPath lambda_path(const LambdaParams& p,
                               std::function<double(double)> theta,
                               std::function<double(double)> theta_dot, double t_f,
                               bool boundary_smooth) {
  ControlPath path;
  path.n_controls = 2;
  path.t_f = t_f;
  path.boundary_smooth = boundary_smooth;
  path.value = [p, theta](double t) { return lambda_controls(theta(t), p); };
  path.derivative = [p, theta, theta_dot](double t) {
    const double th = theta(t);
    const double thd = theta_dot(t);
    const double g = gmax(th, p);
    const double gd = gmax_derivative(th, p);
    const double s = std::sin(th), c = std::cos(th);
    return Eigen::Vector2d((gd * s + g * c) * thd, (gd * c - g * s) * thd).eval();
  };
  return path;
}

inline ControlPath linear_theta_path(const LambdaParams& p, double t_f) {
  return lambda_path(
      p, [t_f](double t) { return kHalfPi * t / t_f; },
      [t_f](double) { return kHalfPi / t_f; }, t_f, false);
}

/// Action model of the 4-level system with the closed-form spectrum provider
/// (resolves the exact E_0 = E_1 degeneracy deterministically).
inline ActionModel lambda_action_model(const LambdaParams& p) {
  HamiltonianFamily fam = lambda_family(p);
  SpectrumProvider provider = [](const RealVector& g) {
    return lambda_snapshot(std::atan2(g[0], g[1]), g.norm());
  };
  std::vector<RealVector> samples;
  for (int i = 0; i < 16; ++i)
    samples.push_back(lambda_controls(kHalfPi * (i + 0.5) / 16, p));
  return make_action_model(std::move(fam), samples, kLambdaRefLevel, 1e-10,
                           std::move(provider));
}

/// Constraint curve G(theta) with s = theta / (pi/2).
inline CurveConstraint lambda_curve(const LambdaParams& p) {
  CurveConstraint curve;
  curve.g_of_s = [p](double s) { return lambda_controls(kHalfPi * s, p); };
  curve.dg_ds = [p](double s) {
    const double th = kHalfPi * s;
    const double g = gmax(th, p);
    const double gd = gmax_derivative(th, p);
    const double si = std::sin(th), c = std::cos(th);
    return (kHalfPi * Eigen::Vector2d(gd * si + g * c, gd * c - g * si)).eval();
  };
  return curve;
}

// ---------------------------------------------------------------------------
// Energy-method optimization.
// ---------------------------------------------------------------------------

/// max_theta V(theta); V touches this value at an endpoint.
inline double potential_max(const LambdaParams& p) {
  return -std::min(p.gamma1_R, p.gamma2_R);
}

/// The theta at which E - V vanishes when the optimal-time integral diverges.
inline std::optional<double> divergence_point(const LambdaParams& p) {
  if (p.gamma1_R == 0 && p.gamma2_R == 0) return 0.0;
  if (p.gamma1_R == 0) return 0.0;
  if (p.gamma2_R == 0) return kHalfPi;
  return std::nullopt;
}

namespace detail {

inline std::vector<double> theta_segments(const LambdaParams& p) {
  if (p.is_pap()) return {0.0, kHalfPi};
  return {0.0, p.theta_bar(), kHalfPi};
}

template <class F>
double lambda_quad(const LambdaParams& p, F&& f) {
  const std::vector<double> seg = theta_segments(p);
  double total = 0;
  bool ok = true;
  for (size_t i = 0; i + 1 < seg.size(); ++i) {
    const QuadratureResult r =
        integrate_endpoint_clustered(f, seg[i], seg[i + 1], {1e-11, 1e-15, 44});
    total += r.value;
    ok = ok && r.converged;
  }
  if (!ok) throw NumericError("lambda quadrature did not converge");
  return total;
}

inline void check_transit_energy(double energy, const LambdaParams& p, bool time_integral) {
  const double vmax = potential_max(p);
  const double tol = 1e-15 * std::max(1.0, std::abs(vmax));
  if (energy < vmax - tol)
    throw std::invalid_argument("energy below the potential barrier: no transit");
  if (energy <= vmax + tol) {
    // E - V has a second-order zero at the touching endpoint. The time
    // integral always diverges there; the loss integral diverges unless E = 0.
    if (time_integral || vmax < -tol) {
      const double theta_star = (p.gamma1_R <= p.gamma2_R) ? 0.0 : kHalfPi;
      throw DivergentTimeError(theta_star);
    }
  }
}

}  // namespace detail

/// Transfer time of the energy-method trajectory,
///   t_f(E) = int d(theta)/G_max sqrt(kappa_tot / (E - V)).
inline double transfer_time(double energy, const LambdaParams& p) {
  validate(p);
  detail::check_transit_energy(energy, p, /*time_integral=*/true);
  const double kappa = p.kappa_tot();
  return detail::lambda_quad(p, [&](double th) {
    return std::sqrt(kappa / (energy - potential_theta(th, p))) / gmax(th, p);
  });
}

/// Fidelity loss of the energy-method trajectory,
///   dF_opt(E) = int d(theta) sqrt(kappa_tot)/G_max (E - 2V)/sqrt(E - V).
inline double optimal_loss(double energy, const LambdaParams& p) {
  validate(p);
  detail::check_transit_energy(energy, p, /*time_integral=*/false);
  const double sqrt_kappa = std::sqrt(p.kappa_tot());
  return detail::lambda_quad(p, [&](double th) {
    const double v = potential_theta(th, p);
    return sqrt_kappa * (energy - 2 * v) / (std::sqrt(energy - v) * gmax(th, p));
  });
}

/// Global minimum of the loss (attained at E = 0),
///   dF_min = 2 int d(theta) sqrt(kappa_tot |V|)/G_max. Always finite.
inline double minimal_loss(const LambdaParams& p) {
  validate(p);
  const double kappa = p.kappa_tot();
  return detail::lambda_quad(p, [&](double th) {
    return 2 * std::sqrt(kappa * -potential_theta(th, p)) / gmax(th, p);
  });
}

// ---------------------------------------------------------------------------
// Prefactors and closed forms.
// ---------------------------------------------------------------------------

/// c(r1, r2) for constant G_max; 1 <= c <= pi sqrt(2)/4.
inline double pap_prefactor(double r1, double r2) {
  if (r1 < -1e-12 || r2 < -1e-12 || r1 + r2 > 1 + 1e-12)
    throw std::invalid_argument("pap_prefactor: need r1, r2 >= 0 and r1 + r2 <= 1");
  const double rphi = std::max(0.0, 1 - r1 - r2);
  auto f = [&](double th) {
    const double c = std::cos(th), s = std::sin(th), s2 = std::sin(2 * th);
    return std::sqrt(std::max(0.0, r1 * c * c + r2 * s * s + rphi * s2 * s2));
  };
  return integrate(f, 0.0, kHalfPi, {1e-12, 1e-15, 44}).value;
}

namespace detail {

inline double g_integrand(double r1, double r2, double x) {
  const double x2 = x * x;
  return r1 * x2 + r2 * (1 - x2) + 4 * (1 - r1 - r2) * x2 * (1 - x2);
}

}  // namespace detail

/// c(r1, r2, theta_bar) for per-coupling bounds.
inline double general_prefactor(double r1, double r2, double theta_bar) {
  if (r1 < -1e-12 || r2 < -1e-12 || r1 + r2 > 1 + 1e-12)
    throw std::invalid_argument("general_prefactor: need r1, r2 >= 0 and r1 + r2 <= 1");
  if (!(theta_bar > 0 && theta_bar < kHalfPi))
    throw std::invalid_argument("general_prefactor: theta_bar must lie in (0, pi/2)");
  const double sb = std::sin(theta_bar), cb = std::cos(theta_bar);
  auto f1 = [&](double x) { return std::sqrt(std::max(0.0, detail::g_integrand(r1, r2, x))); };
  auto f2 = [&](double x) { return std::sqrt(std::max(0.0, detail::g_integrand(r2, r1, x))); };
  const double i1 = integrate(f1, 0.0, cb, {1e-12, 1e-15, 44}).value;
  const double i2 = integrate(f2, 0.0, sb, {1e-12, 1e-15, 44}).value;
  return i1 / sb + i2 / cb;
}

/// c1 = c sin(theta_bar), the order-unity prefactor w.r.t. the weakest
/// coupling; defined for G1_max <= G2_max (theta_bar <= pi/4). 1/2 <= c1 <= 1.
inline double weak_coupling_prefactor(double r1, double r2, double theta_bar) {
  if (!(theta_bar > 0 && theta_bar <= kPi / 4 + 1e-12))
    throw std::invalid_argument("weak_coupling_prefactor: need 0 < theta_bar <= pi/4");
  return general_prefactor(r1, r2, theta_bar) * std::sin(theta_bar);
}

/// Exact closed forms of dF_min in the limiting rate patterns; absent when no
/// limit applies (within 1e-12 on the rates).
inline std::optional<double> closed_form(const LambdaParams& p) {
  validate(p);
  constexpr double tol = 1e-12;
  const double kappa = p.kappa_tot();
  const double gphi = p.gamma_phi_tot();
  const bool no_dephasing = gphi <= tol;
  const bool no_g1 = p.gamma1_R <= tol;
  const bool no_g2 = p.gamma2_R <= tol;

  if (no_dephasing && no_g1 && no_g2) return 0.0;

  if (const auto* pap = std::get_if<PapConstraint>(&p.constraint)) {
    const double g = pap->G_max;
    if (no_dephasing && !no_g1 && !no_g2 && std::abs(p.gamma1_R - p.gamma2_R) <= tol)
      return kPi * std::sqrt(kappa * p.gamma1_R) / g;
    if (no_dephasing && no_g2 && !no_g1) return 2 * std::sqrt(kappa * p.gamma1_R) / g;
    if (no_dephasing && no_g1 && !no_g2) return 2 * std::sqrt(kappa * p.gamma2_R) / g;
    if (no_g1 && no_g2) return 2 * std::sqrt(kappa * gphi) / g;
    return std::nullopt;
  }

  const auto& b = std::get<BoundedConstraint>(p.constraint);
  const double tb = p.theta_bar();
  if (no_dephasing && !no_g1 && !no_g2 && std::abs(p.gamma1_R - p.gamma2_R) <= tol)
    return 2 * std::sqrt(kappa * p.gamma1_R) *
           std::sqrt(1 / (b.G1_max * b.G1_max) + 1 / (b.G2_max * b.G2_max));
  if (no_dephasing && no_g2 && !no_g1)
    return std::sqrt(kappa * p.gamma1_R) * (1 / b.G1_max + tb / b.G2_max);
  if (no_dephasing && no_g1 && !no_g2)
    return std::sqrt(kappa * p.gamma2_R) * (1 / b.G2_max + (kHalfPi - tb) / b.G1_max);
  if (no_g1 && no_g2)
    return 4.0 / 3.0 *
           std::sqrt(kappa * gphi / (b.G1_max * b.G1_max + b.G2_max * b.G2_max)) *
           (1 / std::sin(tb) + 1 / std::cos(tb) - 1);
  return std::nullopt;
}

/// Optimal transfer time for equal relaxation rates and no dephasing under
/// per-coupling bounds. Equals transfer_time(0, p); note that evaluating the
/// E = 0 quadrature gives sqrt(kappa_tot/gamma_1 (1/G1^2 + 1/G2^2)), without
/// the extra factor-2 sometimes quoted for this limit.
inline double optimal_time_equal_rates(const LambdaParams& p) {
  validate(p);
  constexpr double tol = 1e-12;
  const auto* b = std::get_if<BoundedConstraint>(&p.constraint);
  if (!b || std::abs(p.gamma1_R - p.gamma2_R) > tol || p.gamma1_R <= tol ||
      p.gamma_phi_tot() > tol)
    throw std::invalid_argument(
        "optimal_time_equal_rates: requires bounded couplings, gamma1_R = gamma2_R > 0 "
        "and no dephasing");
  return std::sqrt(p.kappa_tot() / p.gamma1_R *
                   (1 / (b->G1_max * b->G1_max) + 1 / (b->G2_max * b->G2_max)));
}

// ---------------------------------------------------------------------------
// Trajectories.
// ---------------------------------------------------------------------------

/// Energy-method trajectory theta(t) with conserved
/// E = kappa_tot thetadot^2 / G_max^2 + V(theta).
struct EnergySolution {
  double energy = 0;
  double t_f = 0;
  double delta_F = 0;
  std::vector<double> t;
  std::vector<double> theta;
  std::vector<double> theta_dot;

  double theta_at(double time) const { return interp()(time); }
  double theta_dot_at(double time) const { return interp().derivative(time); }

 private:
  const CubicHermite& interp() const {
    if (!interp_) interp_ = CubicHermite(t, theta, theta_dot);
    return *interp_;
  }
  mutable std::optional<CubicHermite> interp_;
};

inline EnergySolution optimal_trajectory(double energy, const LambdaParams& p,
                                         int n_samples = 513) {
  validate(p);
  if (n_samples < 3) throw std::invalid_argument("optimal_trajectory: n_samples < 3");
  detail::check_transit_energy(energy, p, /*time_integral=*/true);
  const double kappa = p.kappa_tot();
  auto theta_dot_of = [&](double th) {
    return gmax(th, p) * std::sqrt((energy - potential_theta(th, p)) / kappa);
  };
  auto dt_dtheta = [&](double th) { return 1.0 / theta_dot_of(th); };

  EnergySolution sol;
  sol.energy = energy;
  sol.theta.resize(n_samples);
  sol.theta_dot.resize(n_samples);
  std::vector<double> nodes(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    nodes[i] = kHalfPi * i / (n_samples - 1);
    sol.theta[i] = nodes[i];
    sol.theta_dot[i] = theta_dot_of(nodes[i]);
  }
  // theta grid -> time grid (theta is the integration variable; the map is
  // strictly monotone because theta_dot > 0 in the interior).
  sol.t = cumulative_integral(dt_dtheta, nodes, {1e-11, 1e-15, 44});
  sol.t_f = sol.t.back();
  sol.delta_F = optimal_loss(energy, p);
  return sol;
}

/// Raw (unsmoothed) control path of an energy solution.
inline ControlPath energy_path(const EnergySolution& sol, const LambdaParams& p) {
  return lambda_path(
      p, [sol](double t) { return sol.theta_at(t); },
      [sol](double t) { return sol.theta_dot_at(t); }, sol.t_f, false);
}

/// Applies the piecewise-linear boundary ramp of width delta_t to an energy
/// solution: thetadot is multiplied by t/delta_t (resp. (t_f - t)/delta_t)
/// inside the two windows and globally rescaled so the sweep still reaches
/// pi/2. The result satisfies Gdot(0) = Gdot(t_f) = 0.
inline ControlPath smooth_boundaries(const EnergySolution& sol, const LambdaParams& p,
                                     double delta_t) {
  if (!(delta_t > 0 && delta_t < 0.5 * sol.t_f))
    throw std::invalid_argument("smooth_boundaries: need 0 < delta_t < t_f/2");
  const double t_f = sol.t_f;
  auto ramp = [delta_t, t_f](double t) {
    if (t < delta_t) return t / delta_t;
    if (t > t_f - delta_t) return (t_f - t) / delta_t;
    return 1.0;
  };
  auto raw_rate = [sol](double t) { return sol.theta_dot_at(t); };
  const std::vector<double> breaks = {0.0, delta_t, t_f - delta_t, t_f};
  const double sweep =
      integrate_segmented([&](double t) { return ramp(t) * raw_rate(t); }, breaks,
                          {1e-12, 1e-15, 40})
          .value;
  const double scale = kHalfPi / sweep;

  // Dense cumulative table for theta(t); grid pinned at the ramp boundaries.
  const int n = 2049;
  std::vector<double> grid;
  grid.reserve(n + 2);
  for (int i = 0; i < n; ++i) grid.push_back(t_f * i / (n - 1));
  grid.push_back(delta_t);
  grid.push_back(t_f - delta_t);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  auto rate = [scale, ramp, raw_rate](double t) { return scale * ramp(t) * raw_rate(t); };
  std::vector<double> theta_cum = cumulative_integral(rate, grid, {1e-12, 1e-15, 40});
  std::vector<double> slopes(grid.size());
  for (size_t i = 0; i < grid.size(); ++i) slopes[i] = rate(grid[i]);
  auto theta_interp = std::make_shared<CubicHermite>(grid, theta_cum, slopes);

  ControlPath path = lambda_path(
      p, [theta_interp](double t) { return (*theta_interp)(t); }, rate, t_f, true);
  return path;
}

}  // namespace darkpath

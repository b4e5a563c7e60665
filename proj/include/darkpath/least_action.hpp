#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include "darkpath/action.hpp"
#include "darkpath/interp.hpp"
#include "darkpath/quadrature.hpp"

namespace darkpath {

/// Lagrangian-level view of a model: L = 1/2 Gdot^T Minv(G) Gdot - V(G).
struct LagrangianModel {
  std::function<double(const RealVector&)> potential;
  std::function<RealMatrix(const RealVector&)> inv_mass;
};

inline LagrangianModel lagrangian_of(const ActionModel& model) {
  LagrangianModel lm;
  lm.potential = [&model](const RealVector& g) { return potential(model, g); };
  lm.inv_mass = [&model](const RealVector& g) { return inverse_mass(model, g); };
  return lm;
}

/// A one-dimensional constraint curve G(s) through control space, s in [0, 1].
struct CurveConstraint {
  std::function<RealVector(double)> g_of_s;
  std::function<RealVector(double)> dg_ds;
};

struct CollocationOptions {
  int n_nodes = 201;
  int max_iter = 120;
  double tol = 1e-10;       // relative infinity-norm residual target
  double fd_step = 1e-6;    // step for model-derivative finite differences
};

struct LeastActionResult {
  bool converged = false;
  bool used_energy_fallback = false;
  double residual = 0;
  int iterations = 0;
  double action = 0;
  std::vector<double> times;
  std::vector<RealVector> nodes;
  ControlPath path;
};

namespace detail {

// Discrete action of one segment (midpoint rule).
inline double segment_action(const LagrangianModel& lm, const RealVector& ga,
                             const RealVector& gb, double h) {
  const RealVector mid = 0.5 * (ga + gb);
  const RealVector v = (gb - ga) / h;
  return h * (0.5 * v.dot(lm.inv_mass(mid) * v) - lm.potential(mid));
}

// q_k(g, v) = 1/2 v^T (dMinv/dg_k) v - dV/dg_k, central differences on the
// model functions only.
inline RealVector lagrangian_coordinate_grad(const LagrangianModel& lm,
                                             const RealVector& g, const RealVector& v,
                                             double fd) {
  const int nc = static_cast<int>(g.size());
  RealVector q(nc);
  for (int k = 0; k < nc; ++k) {
    RealVector gp = g, gm = g;
    gp[k] += fd;
    gm[k] -= fd;
    const double lp = 0.5 * v.dot(lm.inv_mass(gp) * v) - lm.potential(gp);
    const double lmv = 0.5 * v.dot(lm.inv_mass(gm) * v) - lm.potential(gm);
    q[k] = (lp - lmv) / (2 * fd);
  }
  return q;
}

// Gradient of the discrete action w.r.t. node i (analytic in the velocities,
// finite differences only on Minv and V):
//   dS/dG_i = Minv(m_{i-1}) v_{i-1} - Minv(m_i) v_i
//             + (h/2) [q(m_{i-1}, v_{i-1}) + q(m_i, v_i)]
// with m_j the midpoint and v_j the velocity of segment j.
inline RealVector node_gradient(const LagrangianModel& lm, const RealVector& gm,
                                const RealVector& gi, const RealVector& gp,
                                double h, double fd) {
  const RealVector mid_prev = 0.5 * (gm + gi);
  const RealVector mid_next = 0.5 * (gi + gp);
  const RealVector v_prev = (gi - gm) / h;
  const RealVector v_next = (gp - gi) / h;
  RealVector grad = lm.inv_mass(mid_prev) * v_prev - lm.inv_mass(mid_next) * v_next;
  grad += 0.5 * h * (lagrangian_coordinate_grad(lm, mid_prev, v_prev, fd) +
                     lagrangian_coordinate_grad(lm, mid_next, v_next, fd));
  return grad;
}

inline ControlPath path_from_nodes(const std::vector<double>& times,
                                   const std::vector<RealVector>& nodes) {
  const int nc = static_cast<int>(nodes.front().size());
  std::vector<CubicHermite> comps;
  comps.reserve(nc);
  for (int k = 0; k < nc; ++k) {
    std::vector<double> y(nodes.size());
    for (size_t i = 0; i < nodes.size(); ++i) y[i] = nodes[i][k];
    comps.emplace_back(times, std::move(y));
  }
  ControlPath p;
  p.n_controls = nc;
  p.t_f = times.back();
  p.boundary_smooth = false;
  auto shared = std::make_shared<std::vector<CubicHermite>>(std::move(comps));
  p.value = [shared, nc](double t) {
    RealVector g(nc);
    for (int k = 0; k < nc; ++k) g[k] = (*shared)[k](t);
    return g;
  };
  p.derivative = [shared, nc](double t) {
    RealVector g(nc);
    for (int k = 0; k < nc; ++k) g[k] = (*shared)[k].derivative(t);
    return g;
  };
  return p;
}

}  // namespace detail

/// Damped-Newton collocation for the Euler-Lagrange boundary-value problem on
/// a uniform time grid. The discrete action uses the midpoint rule; the Newton
/// system is the block-tridiagonal Jacobian of its gradient.
inline LeastActionResult solve_euler_lagrange(const LagrangianModel& lm,
                                              const RealVector& g0,
                                              const RealVector& g1, double t_f,
                                              const CollocationOptions& opts = {}) {
  const int n = opts.n_nodes;
  const int nc = static_cast<int>(g0.size());
  const double h = t_f / (n - 1);
  const double scale = std::max({g0.cwiseAbs().maxCoeff(), g1.cwiseAbs().maxCoeff(), 1e-3});
  const double fd = opts.fd_step * scale;

  LeastActionResult res;
  res.times.resize(n);
  res.nodes.resize(n);
  for (int i = 0; i < n; ++i) {
    res.times[i] = t_f * i / (n - 1);
    const double u = static_cast<double>(i) / (n - 1);
    res.nodes[i] = (1 - u) * g0 + u * g1;
  }

  const int n_int = n - 2;
  const int dim = n_int * nc;
  auto residual = [&](const std::vector<RealVector>& nodes) {
    RealVector r(dim);
    for (int i = 1; i <= n_int; ++i)
      r.segment((i - 1) * nc, nc) =
          detail::node_gradient(lm, nodes[i - 1], nodes[i], nodes[i + 1], h, fd);
    return r;
  };

  RealVector r = residual(res.nodes);
  const double r0 = std::max(r.cwiseAbs().maxCoeff(), 1e-30);
  double rn = r0;
  int it = 0;
  for (; it < opts.max_iter && rn > opts.tol * std::max(1.0, r0); ++it) {
    // Jacobian w.r.t. the three neighboring nodes, by forward differences.
    Eigen::SparseMatrix<double> jac(dim, dim);
    std::vector<Eigen::Triplet<double>> trips;
    const double dj = 10 * fd;
    for (int i = 1; i <= n_int; ++i) {
      const RealVector base =
          detail::node_gradient(lm, res.nodes[i - 1], res.nodes[i], res.nodes[i + 1], h, fd);
      for (int off = -1; off <= 1; ++off) {
        const int jnode = i + off;
        if (jnode < 1 || jnode > n_int) continue;
        for (int k = 0; k < nc; ++k) {
          std::vector<RealVector> pert = {res.nodes[i - 1], res.nodes[i], res.nodes[i + 1]};
          pert[off + 1][k] += dj;
          const RealVector g =
              detail::node_gradient(lm, pert[0], pert[1], pert[2], h, fd);
          const RealVector col = (g - base) / dj;
          for (int kk = 0; kk < nc; ++kk)
            trips.emplace_back((i - 1) * nc + kk, (jnode - 1) * nc + k, col[kk]);
        }
      }
    }
    jac.setFromTriplets(trips.begin(), trips.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(jac);
    if (lu.info() != Eigen::Success)
      throw NumericError("solve_euler_lagrange: singular collocation Jacobian");
    const RealVector step = lu.solve(-r);

    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls) {
      std::vector<RealVector> trial = res.nodes;
      for (int i = 1; i <= n_int; ++i)
        trial[i] += alpha * step.segment((i - 1) * nc, nc);
      const RealVector rt = residual(trial);
      const double rtn = rt.cwiseAbs().maxCoeff();
      if (rtn < (1.0 - 1e-4 * alpha) * rn) {
        res.nodes = std::move(trial);
        r = rt;
        rn = rtn;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
  }
  res.iterations = it;
  res.residual = rn;
  res.converged = rn <= opts.tol * std::max(1.0, r0);
  res.path = detail::path_from_nodes(res.times, res.nodes);
  double s = 0;
  for (int i = 0; i + 1 < n; ++i)
    s += detail::segment_action(lm, res.nodes[i], res.nodes[i + 1], h);
  res.action = s;
  return res;
}

namespace detail {

/// Reduce an n-control Lagrangian onto a curve: effective 1-D mass
/// m(s) = g'(s)^T Minv(g(s)) g'(s) and potential V(s) = V(g(s)).
struct ReducedCurve {
  std::function<double(double)> mass;
  std::function<double(double)> potential;
};

inline ReducedCurve reduce_to_curve(const LagrangianModel& lm,
                                    const CurveConstraint& curve) {
  ReducedCurve rc;
  rc.mass = [&lm, &curve](double s) {
    const RealVector g = curve.g_of_s(s);
    const RealVector dg = curve.dg_ds(s);
    return dg.dot(lm.inv_mass(g) * dg);
  };
  rc.potential = [&lm, &curve](double s) { return lm.potential(curve.g_of_s(s)); };
  return rc;
}

}  // namespace detail

/// 1-D energy-method trajectory on a reduced curve: pick the conserved energy
/// that reproduces the requested duration, then integrate dt = ds / sdot.
inline std::pair<std::vector<double>, std::vector<double>>
energy_method_trajectory(const std::function<double(double)>& mass,
                         const std::function<double(double)>& potential,
                         double t_f, int n_samples = 513) {
  auto duration = [&](double e) {
    auto f = [&](double s) {
      const double d = e - potential(s);
      return std::sqrt(std::max(mass(s), 0.0) / (2.0 * d));
    };
    return integrate_endpoint_clustered(f, 0.0, 1.0, {1e-10, 1e-13, 40}).value;
  };
  // Bracket the energy: duration decreases with e.
  double vmax = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 64; ++i)
    vmax = std::max(vmax, potential(static_cast<double>(i) / 64));
  double lo = vmax + 1e-14 * std::max(1.0, std::abs(vmax));
  double hi = std::max(1.0, 2 * std::abs(vmax));
  while (duration(hi) > t_f) hi *= 2;
  double dlo = duration(lo);
  if (dlo < t_f)
    throw NumericError("energy_method_trajectory: requested duration too long");
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (duration(mid) > t_f ? lo : hi) = mid;
  }
  const double e = 0.5 * (lo + hi);
  std::vector<double> s_nodes(n_samples), t_nodes(n_samples);
  for (int i = 0; i < n_samples; ++i) s_nodes[i] = static_cast<double>(i) / (n_samples - 1);
  auto f = [&](double s) {
    return std::sqrt(std::max(mass(s), 0.0) / (2.0 * std::max(e - potential(s), 1e-300)));
  };
  const std::vector<double> cum = cumulative_integral(f, s_nodes, {1e-11, 1e-14, 40});
  const double tot = cum.back();
  for (int i = 0; i < n_samples; ++i) t_nodes[i] = cum[i] * (t_f / tot);
  return {t_nodes, s_nodes};
}

/// Least-action path constrained to a 1-D curve. Solved by damped-Newton
/// collocation in the curve coordinate; falls back to the energy method if
/// the collocation stalls.
inline LeastActionResult solve_least_action_on_curve(const ActionModel& model,
                                                     const CurveConstraint& curve,
                                                     double t_f,
                                                     const CollocationOptions& opts = {}) {
  const LagrangianModel lm = lagrangian_of(model);
  const detail::ReducedCurve rc = detail::reduce_to_curve(lm, curve);
  LagrangianModel lm1;
  lm1.potential = [rc](const RealVector& s) { return rc.potential(s[0]); };
  lm1.inv_mass = [rc](const RealVector& s) {
    RealMatrix m(1, 1);
    m(0, 0) = rc.mass(s[0]);
    return m;
  };
  RealVector s0(1), s1(1);
  s0[0] = 0.0;
  s1[0] = 1.0;
  // Solve on the requested grid and its refinement; Richardson-extrapolate the
  // shared nodes (the midpoint discretization is second order).
  LeastActionResult res = solve_euler_lagrange(lm1, s0, s1, t_f, opts);
  if (res.converged) {
    CollocationOptions fine_opts = opts;
    fine_opts.n_nodes = 2 * opts.n_nodes - 1;
    const LeastActionResult fine = solve_euler_lagrange(lm1, s0, s1, t_f, fine_opts);
    if (fine.converged) {
      for (size_t i = 0; i < res.nodes.size(); ++i) {
        const RealVector& f = fine.nodes[2 * i];
        res.nodes[i] = f + (f - res.nodes[i]) / 3.0;
      }
      res.residual = std::max(res.residual, fine.residual);
      res.path = detail::path_from_nodes(res.times, res.nodes);
    }
  }
  if (!res.converged) {
    auto [t_nodes, s_nodes] = energy_method_trajectory(rc.mass, rc.potential, t_f);
    res.used_energy_fallback = true;
    res.times = t_nodes;
    res.nodes.clear();
    for (double s : s_nodes) {
      RealVector v(1);
      v[0] = s;
      res.nodes.push_back(v);
    }
    res.path = detail::path_from_nodes(res.times, res.nodes);
  }
  // Lift the 1-D solution back to control space.
  CubicHermite s_of_t = [&] {
    std::vector<double> sv(res.nodes.size());
    for (size_t i = 0; i < res.nodes.size(); ++i) sv[i] = res.nodes[i][0];
    return CubicHermite(res.times, std::move(sv));
  }();
  ControlPath p;
  p.n_controls = model.fam.n_controls();
  p.t_f = t_f;
  p.boundary_smooth = false;
  p.value = [curve, s_of_t](double t) { return curve.g_of_s(s_of_t(t)); };
  p.derivative = [curve, s_of_t](double t) {
    return (curve.dg_ds(s_of_t(t)) * s_of_t.derivative(t)).eval();
  };
  res.path = p;
  res.action = action(model, p, {.quad = {1e-10, 1e-13, 40}, .require_smooth = false});
  return res;
}

/// Unconstrained least-action path between two control points.
inline LeastActionResult solve_least_action(const ActionModel& model,
                                            const RealVector& g0, const RealVector& g1,
                                            double t_f,
                                            const CollocationOptions& opts = {}) {
  LeastActionResult res = solve_euler_lagrange(lagrangian_of(model), g0, g1, t_f, opts);
  if (!res.converged)
    throw NumericError("solve_least_action: collocation did not converge (residual " +
                       std::to_string(res.residual) + ")");
  return res;
}

}  // namespace darkpath

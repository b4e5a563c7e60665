#pragma once

#include <atomic>
#include <cmath>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "darkpath/lambda_system.hpp"
#include "darkpath/master_equation.hpp"
#include "darkpath/nelder_mead.hpp"
#include "darkpath/quadrature.hpp"

namespace darkpath {

/// Deterministic index-parallel map; results land in grid order regardless of
/// scheduling.
inline void parallel_for(int n_items, int threads, const std::function<void(int)>& body) {
  threads = std::max(1, std::min(threads, n_items));
  if (threads == 1) {
    for (int i = 0; i < n_items; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n_items; i = next.fetch_add(1)) body(i);
    });
  for (auto& th : pool) th.join();
}

/// Inverts t_f(E) for the energy-method trajectory (t_f is strictly
/// decreasing in E). Throws NumericError when no bracket can be established.
inline double energy_for_time(const LambdaParams& p, double t_f) {
  validate(p);
  if (!(t_f > 0)) throw std::invalid_argument("energy_for_time: t_f must be > 0");
  const double vmax = potential_max(p);
  const double scale = std::max(1e-12, std::abs(vmax));
  double lo = vmax + 1e-12 * scale;  // duration -> infinity
  double hi = std::max(1.0, 16 * scale);
  for (int i = 0; i < 200 && transfer_time(hi, p) > t_f; ++i) hi *= 2;
  if (transfer_time(hi, p) > t_f)
    throw NumericError("energy_for_time: could not bracket the requested time");
  double tlo = transfer_time(lo, p);
  if (tlo < t_f)
    throw NumericError("energy_for_time: requested time exceeds the slow-transit branch");
  for (int i = 0; i < 120; ++i) {
    const double mid = 0.5 * (lo + hi);
    (transfer_time(mid, p) > t_f ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// 1 - F of the least-action trajectory constrained to duration t_f.
inline double analytic_loss_at_time(const LambdaParams& p, double t_f) {
  return optimal_loss(energy_for_time(p, t_f), p);
}

struct OptimizeOptions {
  PropagationOptions search_tol{1e-8, 1e-11};
  PropagationOptions final_tol{1e-9, 1e-12};
  long max_evals_per_start = 0;  // 0 = 150 * (dim + 1)
  double simplex_scale = 0.1;    // in units of pi / (2 t_f)
  bool use_analytic_seed = true;
  std::vector<Eigen::VectorXd> extra_seeds;
};

struct OptimizationResult {
  int n = 0;
  Eigen::VectorXd alpha;
  double f_opt = 0;
  double t_f = 0;
  long evaluations = 0;
  bool converged = false;
  std::vector<double> history;  // best-so-far trace of the winning start
};

namespace detail {

/// Projection of an energy-optimal trajectory onto the Fourier rate basis:
/// alpha_n = (2/t_f) int (thetadot(t) - pi/(2 t_f)) cos(n pi t / t_f) dt.
inline Eigen::VectorXd analytic_seed(const LambdaParams& p, double t_f, int n_coeffs) {
  const EnergySolution sol = optimal_trajectory(energy_for_time(p, t_f), p, 257);
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n_coeffs);
  for (int n = 1; n <= n_coeffs; ++n) {
    const double w = n * kPi / t_f;
    auto f = [&](double t) {
      return (sol.theta_dot_at(t) - kHalfPi / t_f) * std::cos(w * t);
    };
    alpha[n - 1] = 2.0 / t_f * integrate(f, 0.0, t_f, {1e-9, 1e-12, 24}).value;
  }
  return alpha;
}

}  // namespace detail

/// Derivative-free maximization of the transfer fidelity over the Fourier
/// coefficients at fixed t_f. Multi-start Nelder-Mead (zero seed, analytic
/// projection, +/- perturbation patterns, caller-provided seeds); the result
/// dominates every seed. Deterministic.
inline OptimizationResult optimize_pulse(const LambdaParams& p, double t_f,
                                         int n_coeffs,
                                         const OptimizeOptions& opts = {}) {
  validate(p);
  if (n_coeffs < 0) throw std::invalid_argument("optimize_pulse: N must be >= 0");
  if (!(t_f > 0)) throw std::invalid_argument("optimize_pulse: t_f must be > 0");
  OptimizationResult res;
  res.n = n_coeffs;
  res.t_f = t_f;
  if (n_coeffs == 0) {
    res.alpha = Eigen::VectorXd::Zero(0);
    res.f_opt = transfer_fidelity(p, FourierPulse{t_f, {}}, opts.final_tol);
    res.evaluations = 1;
    res.converged = true;
    res.history = {1 - res.f_opt};
    return res;
  }

  auto objective = [&](const Eigen::VectorXd& a) {
    FourierPulse pulse{t_f, std::vector<double>(a.data(), a.data() + a.size())};
    return 1.0 - transfer_fidelity(p, pulse, opts.search_tol);
  };

  const double base_scale = opts.simplex_scale * kHalfPi / t_f;
  std::vector<Eigen::VectorXd> seeds;
  seeds.push_back(Eigen::VectorXd::Zero(n_coeffs));
  if (opts.use_analytic_seed) {
    try {
      seeds.push_back(detail::analytic_seed(p, t_f, n_coeffs));
    } catch (const Error&) {
      // No analytic trajectory at this duration; skip the seed.
    }
  }
  Eigen::VectorXd pattern(n_coeffs);
  for (int i = 0; i < n_coeffs; ++i) pattern[i] = base_scale / (i + 1);
  seeds.push_back(pattern);
  seeds.push_back((-pattern).eval());
  for (const auto& s : opts.extra_seeds)
    if (s.size() == n_coeffs) seeds.push_back(s);

  NelderMeadOptions nm;
  nm.max_evals = opts.max_evals_per_start > 0 ? opts.max_evals_per_start
                                              : 150 * (n_coeffs + 1);
  const Eigen::VectorXd scale = Eigen::VectorXd::Constant(n_coeffs, base_scale);
  bool first = true;
  NelderMeadResult best;
  long total_evals = 0;
  for (const auto& seed : seeds) {
    const NelderMeadResult r = nelder_mead(objective, seed, scale, nm);
    total_evals += r.evaluations;
    if (first || r.f < best.f) {
      best = r;
      first = false;
    }
  }
  res.alpha = best.x;
  res.f_opt = transfer_fidelity(
      p, FourierPulse{t_f, {best.x.data(), best.x.data() + best.x.size()}},
      opts.final_tol);
  res.evaluations = total_evals;
  res.converged = best.converged;
  res.history = std::move(best.history);
  return res;
}

/// Joint optimization over (t_f, alpha); t_f parameterized as exp(u) and
/// clamped to [t_min, t_max]. Used for transfer-time-optimized figures.
inline OptimizationResult optimize_pulse_and_time(
    const LambdaParams& p, int n_coeffs, double t_f_seed,
    const OptimizeOptions& opts = {}, const Eigen::VectorXd& alpha_seed = {},
    double t_min = 0.5, double t_max = 500.0) {
  validate(p);
  auto objective = [&](const Eigen::VectorXd& x) {
    const double tf = std::exp(x[0]);
    if (tf < t_min || tf > t_max) return 1.0;
    FourierPulse pulse{tf, std::vector<double>(x.data() + 1, x.data() + x.size())};
    return 1.0 - transfer_fidelity(p, pulse, opts.search_tol);
  };
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n_coeffs + 1);
  x0[0] = std::log(t_f_seed);
  for (int i = 0; i < std::min<int>(n_coeffs, static_cast<int>(alpha_seed.size())); ++i)
    x0[i + 1] = alpha_seed[i];
  Eigen::VectorXd scale(n_coeffs + 1);
  scale[0] = 0.15;
  const double base_scale = opts.simplex_scale * kHalfPi / t_f_seed;
  for (int i = 0; i < n_coeffs; ++i) scale[i + 1] = base_scale / (i + 1);

  NelderMeadOptions nm;
  nm.max_evals = opts.max_evals_per_start > 0 ? opts.max_evals_per_start
                                              : 150 * (n_coeffs + 2);
  NelderMeadResult best;
  bool first = true;
  long total = 0;
  for (int s = 0; s < 2; ++s) {
    Eigen::VectorXd seed = x0;
    if (s == 1 && n_coeffs > 0) seed.tail(n_coeffs).array() += 0.3 * base_scale;
    const NelderMeadResult r = nelder_mead(objective, seed, scale, nm);
    total += r.evaluations;
    if (first || r.f < best.f) {
      best = r;
      first = false;
    }
  }
  OptimizationResult res;
  res.n = n_coeffs;
  res.t_f = std::exp(best.x[0]);
  res.alpha = best.x.tail(n_coeffs);
  res.f_opt = transfer_fidelity(
      p, FourierPulse{res.t_f, {best.x.data() + 1, best.x.data() + 1 + n_coeffs}},
      opts.final_tol);
  res.evaluations = total;
  res.converged = best.converged;
  res.history = std::move(best.history);
  return res;
}

struct TfSweepPoint {
  double t_f = 0;
  OptimizationResult numeric;
  double analytic_energy = 0;
  double analytic_loss = 0;
  bool analytic_ok = true;
};

/// Optimized fidelity versus transfer time, alongside the least-action curve.
inline std::vector<TfSweepPoint> sweep_tf(const LambdaParams& p,
                                          const std::vector<double>& t_f_grid,
                                          int n_coeffs,
                                          const OptimizeOptions& opts = {},
                                          int threads = 1) {
  for (size_t i = 1; i < t_f_grid.size(); ++i)
    if (t_f_grid[i] <= t_f_grid[i - 1])
      throw std::invalid_argument("sweep_tf: grid must be strictly increasing");
  std::vector<TfSweepPoint> out(t_f_grid.size());
  parallel_for(static_cast<int>(t_f_grid.size()), threads, [&](int i) {
    TfSweepPoint pt;
    pt.t_f = t_f_grid[i];
    pt.numeric = optimize_pulse(p, pt.t_f, n_coeffs, opts);
    try {
      pt.analytic_energy = energy_for_time(p, pt.t_f);
      pt.analytic_loss = optimal_loss(pt.analytic_energy, p);
    } catch (const Error&) {
      pt.analytic_ok = false;
    }
    out[i] = std::move(pt);
  });
  return out;
}

struct ExtrapolationResult {
  std::vector<int> n_values;
  std::vector<double> df_values;
  double df_infinity = 0;
  double amplitude = 0;
  double exponent = 0;
  double residual = 0;     // rms of the fit on the fitted subset
  std::string model;       // description of the fitted subset
  bool ok = false;
  std::string diagnostics;
};

/// Fits dF(N) = dF_inf + a / N^p (p free in [0.5, 3]) over the largest-N half
/// of the series and reports the N -> infinity limit.
inline ExtrapolationResult extrapolate(const std::vector<int>& n_values,
                                       const std::vector<double>& df_values) {
  if (n_values.size() != df_values.size() || n_values.size() < 4)
    throw std::invalid_argument("extrapolate: need >= 4 (N, dF) pairs");
  for (size_t i = 1; i < n_values.size(); ++i)
    if (n_values[i] <= n_values[i - 1])
      throw std::invalid_argument("extrapolate: N values must increase");

  ExtrapolationResult res;
  res.n_values = n_values;
  res.df_values = df_values;

  struct Subset {
    std::vector<int> n;
    std::vector<double> df;
    std::string name;
  };
  std::vector<Subset> subsets;
  {
    const size_t count = std::max<size_t>(4, n_values.size() / 2);
    Subset tail;
    tail.name = "tail-half";
    for (size_t i = n_values.size() - count; i < n_values.size(); ++i) {
      if (n_values[i] <= 0) continue;
      tail.n.push_back(n_values[i]);
      tail.df.push_back(df_values[i]);
    }
    if (tail.n.size() >= 4) subsets.push_back(std::move(tail));
    Subset even;
    even.name = "even-N";
    for (size_t i = 0; i < n_values.size(); ++i)
      if (n_values[i] > 0 && n_values[i] % 2 == 0) {
        even.n.push_back(n_values[i]);
        even.df.push_back(df_values[i]);
      }
    if (even.n.size() >= 4) subsets.push_back(std::move(even));
  }
  if (subsets.empty()) {
    res.diagnostics = "no usable subset with >= 4 positive N";
    return res;
  }

  double best_sse = std::numeric_limits<double>::infinity();
  for (const auto& sub : subsets) {
    for (double pexp = 0.5; pexp <= 3.0 + 1e-9; pexp += 0.025) {
      // Linear LSQ in (1, N^-p).
      const size_t m = sub.n.size();
      double s1 = m, sx = 0, sxx = 0, sy = 0, sxy = 0;
      for (size_t i = 0; i < m; ++i) {
        const double x = std::pow(static_cast<double>(sub.n[i]), -pexp);
        sx += x;
        sxx += x * x;
        sy += sub.df[i];
        sxy += x * sub.df[i];
      }
      const double det = s1 * sxx - sx * sx;
      if (std::abs(det) < 1e-14 * s1 * sxx) continue;
      const double c0 = (sxx * sy - sx * sxy) / det;
      const double c1 = (s1 * sxy - sx * sy) / det;
      double sse = 0;
      for (size_t i = 0; i < m; ++i) {
        const double fit = c0 + c1 * std::pow(static_cast<double>(sub.n[i]), -pexp);
        sse += (sub.df[i] - fit) * (sub.df[i] - fit);
      }
      if (sse < best_sse) {
        best_sse = sse;
        res.df_infinity = c0;
        res.amplitude = c1;
        res.exponent = pexp;
        res.residual = std::sqrt(sse / m);
        res.model = sub.name;
        res.ok = true;
      }
    }
  }
  if (!res.ok) res.diagnostics = "all candidate fits were ill-conditioned";
  return res;
}

struct LambdaSweepOptions {
  OptimizeOptions optimize;
  int threads = 1;
  double t_f_fallback = 12.0;  // seed when the analytic optimum diverges
};

struct LambdaSweepRow {
  double lambda = 0;
  LambdaParams params;
  std::vector<int> n_values;
  std::vector<double> df_per_n;   // each optimized over t_f
  std::vector<double> t_f_per_n;
  ExtrapolationResult extrapolation;
  double analytic_bound = 0;      // 2 c(r1,r2) sqrt(kappa_tot gamma_tot) / G_max
};

/// Sets gamma1_R from the asymmetry lambda = (gamma2_R - gamma1_R)/gamma_tot
/// at fixed gamma2_R (only the relaxation rates enter the asymmetry).
inline LambdaParams params_for_lambda(const LambdaParams& base, double lambda) {
  if (lambda < -1 || lambda > 1)
    throw std::invalid_argument("params_for_lambda: lambda must lie in [-1, 1]");
  LambdaParams p = base;
  p.gamma1_R = base.gamma2_R * (1 - lambda) / (1 + lambda);
  return p;
}

/// Rate-asymmetry sweep with nested-N seeding and N -> infinity extrapolation
/// (each dF optimized jointly over pulse shape and transfer time).
inline std::vector<LambdaSweepRow> lambda_sweep(const LambdaParams& base,
                                                const std::vector<double>& lambdas,
                                                int n_max,
                                                const LambdaSweepOptions& opts = {}) {
  std::vector<LambdaSweepRow> rows(lambdas.size());
  parallel_for(static_cast<int>(lambdas.size()), opts.threads, [&](int li) {
    LambdaSweepRow row;
    row.lambda = lambdas[li];
    row.params = params_for_lambda(base, lambdas[li]);
    const LambdaParams& p = row.params;
    const auto* pap = std::get_if<PapConstraint>(&p.constraint);
    const double g_ref = pap ? pap->G_max : gmax(p.theta_bar(), p);
    row.analytic_bound = 2 * pap_prefactor(p.r1(), p.r2()) *
                         std::sqrt(p.kappa_tot() * p.gamma_tot()) / g_ref;

    double t_seed = opts.t_f_fallback;
    try {
      t_seed = transfer_time(0.0, p);
    } catch (const Error&) {
      // Divergent optimal time; scan a coarse grid for a sane seed.
      double best = 1.0;
      for (double cand : {4.0, 6.0, 9.0, 14.0, 21.0, 32.0}) {
        const double v = 1 - transfer_fidelity(p, FourierPulse{cand, {}},
                                               opts.optimize.search_tol);
        if (v < best) {
          best = v;
          t_seed = cand;
        }
      }
    }

    Eigen::VectorXd alpha_prev;
    double t_prev = t_seed;
    for (int n = 0; n <= n_max; ++n) {
      const OptimizationResult r =
          optimize_pulse_and_time(p, n, t_prev, opts.optimize, alpha_prev);
      row.n_values.push_back(n);
      row.df_per_n.push_back(1 - r.f_opt);
      row.t_f_per_n.push_back(r.t_f);
      alpha_prev = r.alpha;
      t_prev = r.t_f;
    }
    // Nested seeding makes dF non-increasing in N up to final-tolerance noise;
    // enforce the invariant exactly for the reported series.
    for (size_t i = 1; i < row.df_per_n.size(); ++i)
      row.df_per_n[i] = std::min(row.df_per_n[i], row.df_per_n[i - 1]);
    row.extrapolation = extrapolate(row.n_values, row.df_per_n);
    rows[li] = std::move(row);
  });
  return rows;
}

}  // namespace darkpath

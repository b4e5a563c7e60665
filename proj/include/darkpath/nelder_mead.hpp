#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "darkpath/errors.hpp"

namespace darkpath {

struct NelderMeadOptions {
  long max_evals = 4000;
  double f_tol = 1e-12;        // simplex value-spread convergence target
  int max_restarts = 2;        // rebuilds around the incumbent on stagnation
  double restart_shrink = 0.3;
  bool record_history = true;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double f = 0;
  long evaluations = 0;
  bool converged = false;
  std::vector<double> history;  // best-so-far per evaluation
};

/// Nelder-Mead simplex with the dimension-adaptive coefficients of Gao & Han
/// and deterministic restart-on-stagnation. Minimizes f.
template <class F>
NelderMeadResult nelder_mead(F&& f, const Eigen::VectorXd& x0,
                             const Eigen::VectorXd& scale,
                             const NelderMeadOptions& opts = {}) {
  const int n = static_cast<int>(x0.size());
  NelderMeadResult res;
  res.x = x0;
  if (n == 0) {
    res.f = f(x0);
    res.evaluations = 1;
    res.converged = true;
    if (opts.record_history) res.history.push_back(res.f);
    return res;
  }
  const double alpha = 1.0;
  const double beta = 1.0 + 2.0 / n;
  const double gamma = 0.75 - 0.5 / n;
  const double delta = 1.0 - 1.0 / n;

  std::vector<Eigen::VectorXd> xs;
  std::vector<double> fs;
  long evals = 0;
  double best_f = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_x = x0;
  auto eval = [&](const Eigen::VectorXd& x) {
    const double v = f(x);
    ++evals;
    if (v < best_f) {
      best_f = v;
      best_x = x;
    }
    if (opts.record_history) res.history.push_back(best_f);
    return v;
  };

  auto init_simplex = [&](const Eigen::VectorXd& center, double shrink) {
    xs.assign(1, center);
    fs.assign(1, eval(center));
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd xi = center;
      xi[i] += shrink * (scale[i] != 0 ? scale[i] : 1e-3);
      xs.push_back(xi);
      fs.push_back(eval(xi));
    }
  };

  int restarts = 0;
  init_simplex(x0, 1.0);
  while (evals < opts.max_evals) {
    // Order the simplex.
    std::vector<int> idx(n + 1);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fs[a] < fs[b]; });
    std::vector<Eigen::VectorXd> xs2(n + 1);
    std::vector<double> fs2(n + 1);
    for (int i = 0; i <= n; ++i) {
      xs2[i] = xs[idx[i]];
      fs2[i] = fs[idx[i]];
    }
    xs = std::move(xs2);
    fs = std::move(fs2);

    const double spread = std::abs(fs[n] - fs[0]);
    if (spread <= opts.f_tol * (1.0 + std::abs(fs[0]))) {
      if (restarts >= opts.max_restarts) {
        res.converged = true;
        break;
      }
      ++restarts;
      init_simplex(best_x, std::pow(opts.restart_shrink, restarts));
      continue;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) centroid += xs[i];
    centroid /= n;

    const Eigen::VectorXd xr = centroid + alpha * (centroid - xs[n]);
    const double fr = eval(xr);
    if (fr < fs[0]) {
      const Eigen::VectorXd xe = centroid + beta * (xr - centroid);
      const double fe = eval(xe);
      if (fe < fr) {
        xs[n] = xe;
        fs[n] = fe;
      } else {
        xs[n] = xr;
        fs[n] = fr;
      }
    } else if (fr < fs[n - 1]) {
      xs[n] = xr;
      fs[n] = fr;
    } else {
      const bool outside = fr < fs[n];
      const Eigen::VectorXd xc =
          outside ? (centroid + gamma * (xr - centroid)).eval()
                  : (centroid - gamma * (xr - centroid)).eval();
      const double fc = eval(xc);
      if (fc < std::min(fr, fs[n])) {
        xs[n] = xc;
        fs[n] = fc;
      } else {
        for (int i = 1; i <= n; ++i) {
          xs[i] = xs[0] + delta * (xs[i] - xs[0]);
          fs[i] = eval(xs[i]);
        }
      }
    }
  }
  res.x = best_x;
  res.f = best_f;
  res.evaluations = evals;
  return res;
}

}  // namespace darkpath

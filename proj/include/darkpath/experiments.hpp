#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "darkpath/config.hpp"
#include "darkpath/csv.hpp"
#include "darkpath/master_equation.hpp"
#include "darkpath/optimizer.hpp"
#include "darkpath/version.hpp"

namespace darkpath {

/// Exit codes of the batch front-end.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 2,
  kExitDivergent = 3,
  kExitNumericError = 4,
};

namespace detail {

inline std::string out_path(const std::string& out_dir, const std::string& prefix,
                            const std::string& suffix) {
  std::filesystem::create_directories(out_dir.empty() ? "." : out_dir);
  return (std::filesystem::path(out_dir.empty() ? "." : out_dir) / (prefix + suffix))
      .string();
}

inline void add_provenance(CsvWriter& csv, const ExperimentConfig& cfg) {
  csv.comment(std::string("darkpath ") + kVersion);
  csv.comment("config " + cfg.echo.dump());
}

inline json provenance(const ExperimentConfig& cfg) {
  json j;
  j["version"] = kVersion;
  j["config"] = cfg.echo;
  return j;
}

inline void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open output file: " + path);
  out << j.dump(2) << "\n";
}

/// Builds the control path selected by the pulse section (lambda models).
/// Returns the path plus a label of the realized trajectory.
inline ControlPath pulse_path(const ExperimentConfig& cfg, json* info = nullptr) {
  const LambdaParams& p = cfg.lambda();
  switch (cfg.pulse.kind) {
    case PulseConfig::Kind::linear: {
      if (!cfg.run.t_f) throw ConfigError("run.t_f required for a linear pulse");
      return linear_theta_path(p, *cfg.run.t_f);
    }
    case PulseConfig::Kind::fourier: {
      if (!cfg.run.t_f) throw ConfigError("run.t_f required for a fourier pulse");
      return fourier_path(p, FourierPulse{*cfg.run.t_f, cfg.pulse.coefficients});
    }
    case PulseConfig::Kind::energy_optimal: {
      const EnergySolution sol = optimal_trajectory(cfg.pulse.energy, p);
      if (info) {
        (*info)["energy"] = sol.energy;
        (*info)["t_f"] = sol.t_f;
        (*info)["delta_F_analytic"] = sol.delta_F;
      }
      return smooth_boundaries(sol, p, cfg.pulse.smoothing_dt_fraction * sol.t_f);
    }
    case PulseConfig::Kind::file: {
      std::ifstream in(cfg.pulse.path);
      if (!in) throw ConfigError("cannot open pulse file: " + cfg.pulse.path);
      std::vector<double> times;
      std::vector<std::vector<double>> cols;
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        for (char& c : line)
          if (c == ',') c = ' ';
        std::istringstream ls(line);
        std::vector<double> vals;
        double v;
        while (ls >> v) vals.push_back(v);
        if (vals.empty()) continue;
        if (!cols.empty() && vals.size() != cols.back().size() + 1)
          throw ConfigError("pulse file: inconsistent column count");
        times.push_back(vals[0]);
        cols.push_back({vals.begin() + 1, vals.end()});
      }
      if (times.size() < 2) throw ConfigError("pulse file: need at least two samples");
      const int nc = static_cast<int>(cols.front().size());
      std::vector<CubicHermite> interp;
      for (int k = 0; k < nc; ++k) {
        std::vector<double> y(times.size());
        for (size_t i = 0; i < times.size(); ++i) y[i] = cols[i][k];
        interp.emplace_back(times, std::move(y));
      }
      auto shared = std::make_shared<std::vector<CubicHermite>>(std::move(interp));
      ControlPath path;
      path.n_controls = nc;
      path.t_f = times.back();
      path.value = [shared, nc](double t) {
        RealVector g(nc);
        for (int k = 0; k < nc; ++k) g[k] = (*shared)[k](t);
        return g;
      };
      path.derivative = [shared, nc](double t) {
        RealVector g(nc);
        for (int k = 0; k < nc; ++k) g[k] = (*shared)[k].derivative(t);
        return g;
      };
      return path;
    }
  }
  throw ConfigError("unsupported pulse type");
}

}  // namespace detail

/// `analytic`: potential/coupling profile plus the scalar least-action
/// summary. Returns kExitDivergent when the optimal time diverges.
inline int run_analytic(const ExperimentConfig& cfg, const std::string& out_dir) {
  const LambdaParams& p = cfg.lambda();
  CsvWriter csv(detail::out_path(out_dir, cfg.output.prefix, "_potential.csv"));
  detail::add_provenance(csv, cfg);
  csv.header({"theta", "V", "gmax"});
  const int n = 501;
  for (int i = 0; i < n; ++i) {
    const double th = kHalfPi * i / (n - 1);
    csv.row({th, potential_theta(th, p), gmax(th, p)});
  }

  json out = detail::provenance(cfg);
  json& r = out["results"];
  r["delta_F_min"] = minimal_loss(p);
  if (p.gamma_tot() > 0 && p.kappa_tot() < 10 * p.gamma_tot())
    r["applicability_warning"] =
        "kappa_tot < 10 gamma_tot: the leading-order action is not reliable here";
  if (p.is_pap()) {
    r["c"] = pap_prefactor(p.r1(), p.r2());
  } else {
    r["c"] = general_prefactor(p.r1(), p.r2(), p.theta_bar());
    if (p.theta_bar() <= kPi / 4)
      r["c1"] = weak_coupling_prefactor(p.r1(), p.r2(), p.theta_bar());
  }
  if (const auto cf = closed_form(p)) {
    r["closed_form"] = *cf;
    const double df = r["delta_F_min"].get<double>();
    r["closed_form_match"] = std::abs(*cf - df) <= 1e-8 * std::max(df, 1e-30);
  }
  int code = kExitOk;
  try {
    r["t_f_opt"] = transfer_time(0.0, p);
    r["divergent"] = false;
  } catch (const DivergentTimeError& e) {
    r["divergent"] = true;
    r["theta_star"] = e.theta_star;
    code = kExitDivergent;
  }
  detail::write_json(detail::out_path(out_dir, cfg.output.prefix, "_analytic.json"), out);
  return code;
}

/// `simulate`: propagate the configured pulse and emit the trajectory table.
inline int run_simulate(const ExperimentConfig& cfg, const std::string& out_dir) {
  json info = detail::provenance(cfg);
  PropagationOptions prop{cfg.run.ode_rel, cfg.run.ode_abs};
  CsvWriter csv(detail::out_path(out_dir, cfg.output.prefix, "_trajectory.csv"));
  detail::add_provenance(csv, cfg);

  if (cfg.is_lambda()) {
    const LambdaParams& p = cfg.lambda();
    const ControlPath path = detail::pulse_path(cfg, &info["pulse_realized"]);
    const HamiltonianFamily fam = lambda_family(p);
    csv.header({"t", "theta", "pop_e_g_0", "pop_g_e_0", "pop_g_g_1", "pop_g_g_0",
                "fidelity_running"});
    std::vector<double> samples(cfg.run.trajectory_samples);
    for (size_t i = 0; i < samples.size(); ++i)
      samples[i] = path.t_f * i / (samples.size() - 1);
    auto on_sample = [&](double t, const Matrix& rho) {
      const RealVector g = path.value(t);
      const double th = std::atan2(g[0], g[1]);
      const double c = std::cos(th), s = std::sin(th);
      const double running =
          c * c * rho(0, 0).real() + s * s * rho(1, 1).real() - 2 * c * s * rho(0, 1).real();
      csv.row({t, th, rho(0, 0).real(), rho(1, 1).real(), rho(2, 2).real(),
               rho(3, 3).real(), running});
    };
    const PropagationReport rep =
        propagate_lindblad(fam, path, lambda_initial_density(), prop, samples, on_sample);
    json& res = info["results"];
    res["fidelity"] = rep.rho(kBasisG1E0, kBasisG1E0).real();
    res["trace_drift"] = rep.trace_drift;
    res["hermiticity_drift"] = rep.hermiticity_drift;
    res["n_steps"] = rep.n_steps;
  } else {
    const HamiltonianFamily& fam = std::get<HamiltonianFamily>(cfg.model);
    if (cfg.pulse.kind != PulseConfig::Kind::file)
      throw ConfigError("generic models are simulated with a file pulse");
    const ControlPath path = detail::pulse_path(cfg);
    if (path.n_controls != fam.n_controls())
      throw ConfigError("pulse file column count does not match the generators");
    std::vector<std::string> cols = {"t"};
    for (int k = 0; k < fam.dim(); ++k) cols.push_back("pop_" + std::to_string(k));
    cols.push_back("trace");
    csv.header(cols);
    Matrix rho0 = Matrix::Zero(fam.dim(), fam.dim());
    rho0(0, 0) = 1;
    std::vector<double> samples(cfg.run.trajectory_samples);
    for (size_t i = 0; i < samples.size(); ++i)
      samples[i] = path.t_f * i / (samples.size() - 1);
    auto on_sample = [&](double t, const Matrix& rho) {
      std::vector<double> row = {t};
      for (int k = 0; k < fam.dim(); ++k) row.push_back(rho(k, k).real());
      row.push_back(rho.trace().real());
      csv.row(row);
    };
    const PropagationReport rep = propagate_lindblad(fam, path, rho0, prop, samples, on_sample);
    json& res = info["results"];
    res["trace_drift"] = rep.trace_drift;
    res["hermiticity_drift"] = rep.hermiticity_drift;
    res["n_steps"] = rep.n_steps;
  }
  detail::write_json(detail::out_path(out_dir, cfg.output.prefix, "_simulate.json"), info);
  return kExitOk;
}

namespace detail {

inline OptimizeOptions optimize_options(const RunConfig& run) {
  OptimizeOptions o;
  o.search_tol = {run.search_rel, run.search_rel * 1e-3};
  o.final_tol = {run.ode_rel, run.ode_abs};
  o.max_evals_per_start = run.max_evals;
  for (const auto& s : run.seeds)
    o.extra_seeds.push_back(Eigen::Map<const Eigen::VectorXd>(s.data(), s.size()));
  return o;
}

}  // namespace detail

/// `optimize`: Nelder-Mead over Fourier coefficients at fixed t_f.
inline int run_optimize(const ExperimentConfig& cfg, const std::string& out_dir) {
  const LambdaParams& p = cfg.lambda();
  if (!cfg.run.t_f) throw ConfigError("run.t_f required for optimize");
  const OptimizationResult res =
      optimize_pulse(p, *cfg.run.t_f, cfg.run.n_coeffs, detail::optimize_options(cfg.run));

  json out = detail::provenance(cfg);
  json& r = out["results"];
  r["N"] = res.n;
  r["t_f"] = res.t_f;
  r["F_opt"] = res.f_opt;
  r["delta_F"] = 1 - res.f_opt;
  r["alpha"] = std::vector<double>(res.alpha.data(), res.alpha.data() + res.alpha.size());
  r["evaluations"] = res.evaluations;
  r["converged"] = res.converged;
  r["history"] = res.history;
  detail::write_json(detail::out_path(out_dir, cfg.output.prefix, "_optimize.json"), out);

  CsvWriter csv(detail::out_path(out_dir, cfg.output.prefix, "_best_pulse.csv"));
  detail::add_provenance(csv, cfg);
  csv.header({"t", "theta", "theta_dot"});
  const FourierPulse pulse{res.t_f,
                           {res.alpha.data(), res.alpha.data() + res.alpha.size()}};
  const int n = cfg.run.trajectory_samples;
  for (int i = 0; i < n; ++i) {
    const double t = res.t_f * i / (n - 1);
    const auto [th, thd] = theta_of_t(pulse, t);
    csv.row({t, th, thd});
  }
  return kExitOk;
}

/// `sweep`: transfer-time sweep (t_f_grid) or rate-asymmetry sweep
/// (lambda_grid), with per-row incremental flushing.
inline int run_sweep(const ExperimentConfig& cfg, const std::string& out_dir,
                     int threads = 1) {
  const LambdaParams& p = cfg.lambda();
  const OptimizeOptions opts = detail::optimize_options(cfg.run);

  if (!cfg.run.t_f_grid.empty()) {
    std::vector<int> n_list = cfg.run.n_grid;
    if (n_list.empty()) n_list = {cfg.run.n_coeffs};
    CsvWriter csv(detail::out_path(out_dir, cfg.output.prefix, "_sweep_tf.csv"));
    detail::add_provenance(csv, cfg);
    std::vector<std::string> cols = {"t_f"};
    for (int n : n_list) cols.push_back("F_numeric_N" + std::to_string(n));
    cols.push_back("F_analytic");
    cols.push_back("analytic_ok");
    csv.header(cols);

    // One sweep per requested N; rows flushed in grid order.
    std::vector<std::vector<TfSweepPoint>> per_n;
    for (int n : n_list) per_n.push_back(sweep_tf(p, cfg.run.t_f_grid, n, opts, threads));
    for (size_t i = 0; i < cfg.run.t_f_grid.size(); ++i) {
      std::vector<double> row = {cfg.run.t_f_grid[i]};
      for (size_t k = 0; k < n_list.size(); ++k) row.push_back(per_n[k][i].numeric.f_opt);
      row.push_back(per_n.front()[i].analytic_ok ? 1 - per_n.front()[i].analytic_loss
                                                 : std::nan(""));
      row.push_back(per_n.front()[i].analytic_ok ? 1.0 : 0.0);
      csv.row(row);
    }
    json out = detail::provenance(cfg);
    out["results"]["kind"] = "transfer_time_sweep";
    detail::write_json(detail::out_path(out_dir, cfg.output.prefix, "_sweep.json"), out);
    return kExitOk;
  }

  if (!cfg.run.lambda_grid.empty()) {
    LambdaSweepOptions lo;
    lo.optimize = opts;
    lo.threads = threads;
    const std::vector<LambdaSweepRow> rows =
        lambda_sweep(p, cfg.run.lambda_grid, cfg.run.n_max, lo);
    CsvWriter csv(detail::out_path(out_dir, cfg.output.prefix, "_sweep_lambda.csv"));
    detail::add_provenance(csv, cfg);
    std::vector<std::string> cols = {"lambda"};
    for (int n = 0; n <= cfg.run.n_max; ++n) cols.push_back("dF_N" + std::to_string(n));
    cols.push_back("dF_extrapolated");
    cols.push_back("dF_bound");
    csv.header(cols);
    for (const auto& row : rows) {
      std::vector<double> r = {row.lambda};
      for (double v : row.df_per_n) r.push_back(v);
      r.push_back(row.extrapolation.ok ? row.extrapolation.df_infinity : std::nan(""));
      r.push_back(row.analytic_bound);
      csv.row(r);
    }
    json out = detail::provenance(cfg);
    out["results"]["kind"] = "lambda_sweep";
    for (const auto& row : rows) {
      json jr;
      jr["lambda"] = row.lambda;
      jr["dF_per_N"] = row.df_per_n;
      jr["t_f_per_N"] = row.t_f_per_n;
      jr["dF_bound"] = row.analytic_bound;
      jr["extrapolation_ok"] = row.extrapolation.ok;
      if (row.extrapolation.ok) {
        jr["dF_extrapolated"] = row.extrapolation.df_infinity;
        jr["fit_exponent"] = row.extrapolation.exponent;
        jr["fit_residual"] = row.extrapolation.residual;
        jr["fit_model"] = row.extrapolation.model;
      } else {
        jr["extrapolation_diagnostics"] = row.extrapolation.diagnostics;
      }
      out["results"]["rows"].push_back(jr);
    }
    detail::write_json(detail::out_path(out_dir, cfg.output.prefix, "_sweep.json"), out);
    return kExitOk;
  }

  throw ConfigError("sweep: need run.t_f_grid or run.lambda_grid");
}

}  // namespace darkpath

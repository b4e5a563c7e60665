#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "darkpath/control.hpp"
#include "darkpath/errors.hpp"
#include "darkpath/lambda_system.hpp"

namespace darkpath {

using json = nlohmann::json;

struct PulseConfig {
  enum class Kind { linear, fourier, energy_optimal, file };
  Kind kind = Kind::linear;
  std::vector<double> coefficients;        // fourier
  double energy = 0;                       // energy_optimal
  double smoothing_dt_fraction = 1.0 / 200;  // energy_optimal: dt = frac * t_f
  std::string path;                        // file
};

struct RunConfig {
  std::optional<double> t_f;
  std::vector<double> t_f_grid;
  int n_coeffs = 0;
  std::vector<int> n_grid;
  int n_max = 8;
  std::vector<double> lambda_grid;
  double ode_rel = 1e-9;
  double ode_abs = 1e-12;
  double search_rel = 1e-8;
  long max_evals = 0;  // 0 = optimizer default
  int trajectory_samples = 401;
  std::vector<std::vector<double>> seeds;  // extra Fourier-coefficient seeds
};

struct OutputConfig {
  std::string prefix = "darkpath";
};

struct ExperimentConfig {
  std::variant<LambdaParams, HamiltonianFamily> model;
  PulseConfig pulse;
  RunConfig run;
  OutputConfig output;
  json echo;  // the exact parsed input, embedded into every output file

  bool is_lambda() const { return std::holds_alternative<LambdaParams>(model); }
  const LambdaParams& lambda() const {
    if (!is_lambda()) throw ConfigError("this command requires a lambda model");
    return std::get<LambdaParams>(model);
  }
};

namespace detail {

inline void check_keys(const json& j, std::initializer_list<const char*> allowed,
                       const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) {
        ok = true;
        break;
      }
    if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

inline double number_at(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw ConfigError(std::string("expected number for '") + key + "'");
  return j[key].get<double>();
}

inline double rate_at(const json& j, const char* key) {
  const double v = number_at(j, key, 0.0);
  if (v < 0) throw ConfigError(std::string("rate '") + key + "' must be >= 0");
  return v;
}

inline complexd parse_entry(const json& e, const std::string& where) {
  if (e.is_number()) return complexd(e.get<double>(), 0.0);
  if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
    return complexd(e[0].get<double>(), e[1].get<double>());
  throw ConfigError(where + ": matrix entries must be numbers or [re, im] pairs");
}

inline Matrix parse_matrix(const json& m, const std::string& where) {
  if (!m.is_array() || m.empty()) throw ConfigError(where + ": expected a matrix");
  const size_t d = m.size();
  Matrix out(d, d);
  for (size_t r = 0; r < d; ++r) {
    if (!m[r].is_array() || m[r].size() != d)
      throw ConfigError(where + ": matrix must be square");
    for (size_t c = 0; c < d; ++c) out(r, c) = parse_entry(m[r][c], where);
  }
  return out;
}

inline LambdaParams parse_lambda_model(const json& j) {
  check_keys(j, {"type", "gamma1_R", "gamma2_R", "gamma1_phi", "gamma2_phi", "kappa_R",
                 "kappa_phi", "constraint", "omega"},
             "model");
  LambdaParams p;
  p.gamma1_R = rate_at(j, "gamma1_R");
  p.gamma2_R = rate_at(j, "gamma2_R");
  p.gamma1_phi = rate_at(j, "gamma1_phi");
  p.gamma2_phi = rate_at(j, "gamma2_phi");
  p.kappa_R = rate_at(j, "kappa_R");
  p.kappa_phi = rate_at(j, "kappa_phi");
  if (j.contains("constraint")) {
    const json& c = j["constraint"];
    check_keys(c, {"type", "G_max", "G1_max", "G2_max"}, "model.constraint");
    const std::string type = c.value("type", "pap");
    if (type == "pap") {
      p.constraint = PapConstraint{number_at(c, "G_max", 1.0)};
    } else if (type == "bounded") {
      p.constraint =
          BoundedConstraint{number_at(c, "G1_max", 1.0), number_at(c, "G2_max", 1.0)};
    } else {
      throw ConfigError("model.constraint.type must be 'pap' or 'bounded'");
    }
  }
  try {
    validate(p);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return p;
}

inline HamiltonianFamily parse_generic_model(const json& j) {
  check_keys(j, {"type", "generators", "channels"}, "model");
  if (!j.contains("generators")) throw ConfigError("model: generic model needs 'generators'");
  HamiltonianFamily fam;
  for (const auto& g : j["generators"])
    fam.generators.push_back(parse_matrix(g, "model.generators"));
  if (j.contains("channels")) {
    for (const auto& ch : j["channels"]) {
      check_keys(ch, {"op", "rate"}, "model.channels");
      LindbladChannel c;
      c.op = parse_matrix(ch.at("op"), "model.channels.op");
      c.rate = ch.value("rate", 0.0);
      if (c.rate < 0) throw ConfigError("model.channels: rate must be >= 0");
      fam.channels.push_back(std::move(c));
    }
  }
  try {
    validate_family(fam);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return fam;
}

inline PulseConfig parse_pulse(const json& j) {
  check_keys(j, {"type", "coefficients", "energy", "smoothing_dt_fraction", "path"},
             "pulse");
  PulseConfig pc;
  const std::string type = j.value("type", "linear");
  if (type == "linear") {
    pc.kind = PulseConfig::Kind::linear;
  } else if (type == "fourier") {
    pc.kind = PulseConfig::Kind::fourier;
    if (j.contains("coefficients")) {
      for (const auto& a : j["coefficients"]) {
        if (!a.is_number()) throw ConfigError("pulse.coefficients must be numbers");
        pc.coefficients.push_back(a.get<double>());
      }
    }
  } else if (type == "energy_optimal") {
    pc.kind = PulseConfig::Kind::energy_optimal;
    pc.energy = number_at(j, "energy", 0.0);
    pc.smoothing_dt_fraction = number_at(j, "smoothing_dt_fraction", 1.0 / 200);
    if (!(pc.smoothing_dt_fraction > 0 && pc.smoothing_dt_fraction < 0.5))
      throw ConfigError("pulse.smoothing_dt_fraction must lie in (0, 0.5)");
  } else if (type == "file") {
    pc.kind = PulseConfig::Kind::file;
    if (!j.contains("path")) throw ConfigError("pulse: file pulse needs 'path'");
    pc.path = j["path"].get<std::string>();
  } else {
    throw ConfigError("pulse.type must be linear|fourier|energy_optimal|file");
  }
  return pc;
}

inline RunConfig parse_run(const json& j) {
  check_keys(j,
             {"t_f", "t_f_grid", "N", "N_grid", "N_max", "lambda_grid", "tolerances",
              "max_evals", "trajectory_samples", "seeds"},
             "run");
  RunConfig rc;
  if (j.contains("t_f")) rc.t_f = number_at(j, "t_f", 0.0);
  if (j.contains("t_f_grid"))
    for (const auto& v : j["t_f_grid"]) rc.t_f_grid.push_back(v.get<double>());
  if (j.contains("N")) rc.n_coeffs = j["N"].get<int>();
  if (j.contains("N_grid"))
    for (const auto& v : j["N_grid"]) rc.n_grid.push_back(v.get<int>());
  if (j.contains("N_max")) rc.n_max = j["N_max"].get<int>();
  if (j.contains("lambda_grid"))
    for (const auto& v : j["lambda_grid"]) rc.lambda_grid.push_back(v.get<double>());
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    check_keys(t, {"ode_rel", "ode_abs", "search_rel"}, "run.tolerances");
    rc.ode_rel = number_at(t, "ode_rel", rc.ode_rel);
    rc.ode_abs = number_at(t, "ode_abs", rc.ode_abs);
    rc.search_rel = number_at(t, "search_rel", rc.search_rel);
  }
  if (j.contains("max_evals")) rc.max_evals = j["max_evals"].get<long>();
  if (j.contains("trajectory_samples"))
    rc.trajectory_samples = j["trajectory_samples"].get<int>();
  if (rc.trajectory_samples < 2) throw ConfigError("run.trajectory_samples must be >= 2");
  if (j.contains("seeds")) {
    for (const auto& s : j["seeds"]) {
      std::vector<double> seed;
      for (const auto& v : s) seed.push_back(v.get<double>());
      rc.seeds.push_back(std::move(seed));
    }
  }
  return rc;
}

}  // namespace detail

/// Parses and schema-validates an experiment configuration. Unknown keys are
/// rejected anywhere in the document.
inline ExperimentConfig parse_config(const json& j) {
  detail::check_keys(j, {"model", "pulse", "run", "output"}, "config");
  if (!j.contains("model")) throw ConfigError("config: missing 'model'");
  ExperimentConfig cfg;
  cfg.echo = j;
  const json& m = j["model"];
  const std::string type = m.is_object() ? m.value("type", "lambda") : "lambda";
  if (type == "lambda")
    cfg.model = detail::parse_lambda_model(m);
  else if (type == "generic")
    cfg.model = detail::parse_generic_model(m);
  else
    throw ConfigError("model.type must be 'lambda' or 'generic'");
  if (j.contains("pulse")) cfg.pulse = detail::parse_pulse(j["pulse"]);
  if (j.contains("run")) cfg.run = detail::parse_run(j["run"]);
  if (j.contains("output")) {
    detail::check_keys(j["output"], {"prefix"}, "output");
    cfg.output.prefix = j["output"].value("prefix", cfg.output.prefix);
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return parse_config(j);
}

}  // namespace darkpath

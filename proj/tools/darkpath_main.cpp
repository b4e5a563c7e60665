#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "darkpath/darkpath.hpp"

namespace {

int dispatch(const std::string& command, const std::string& config_path,
             const std::string& out_dir, int threads) {
  const darkpath::ExperimentConfig cfg = darkpath::load_config(config_path);
  if (command == "analytic") return darkpath::run_analytic(cfg, out_dir);
  if (command == "simulate") return darkpath::run_simulate(cfg, out_dir);
  if (command == "optimize") return darkpath::run_optimize(cfg, out_dir);
  if (command == "sweep") return darkpath::run_sweep(cfg, out_dir, threads);
  throw darkpath::ConfigError("unknown command: " + command);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"darkpath: least-action design and Lindblad benchmarking of "
               "quasi-adiabatic state-transfer pulses"};
  app.set_version_flag("--version", darkpath::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  int threads = 1;

  for (const auto& name : {"analytic", "simulate", "optimize", "sweep"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--out-dir", out_dir, "output directory");
    sub->add_option("--threads", threads, "parallel sweep workers");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    return dispatch(command, config_path, out_dir, threads);
  } catch (const darkpath::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return darkpath::kExitConfigError;
  } catch (const darkpath::DivergentTimeError& e) {
    std::cerr << "divergent: " << e.what() << "\n";
    return darkpath::kExitDivergent;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return darkpath::kExitNumericError;
  }
}

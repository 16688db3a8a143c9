#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "gpec/commands.hpp"
#include "gpec/config.hpp"

namespace {

struct Overrides {
  std::optional<double> tol_rel;
  std::optional<double> tol_abs;
  std::optional<std::size_t> max_steps;
  std::optional<double> stop_p;
  std::optional<double> noise_amp;
  bool fixed_step_rk4 = false;
  bool record = false;
  std::optional<std::string> output;

  void add_to(CLI::App& app) {
    app.add_option("--tol-rel", tol_rel, "Relative tolerance of the adaptive integrator");
    app.add_option("--tol-abs", tol_abs, "Absolute tolerance of the adaptive integrator");
    app.add_option("--max-steps", max_steps, "Cap on accepted optimizer steps");
    app.add_option("--stop-p", stop_p, "Stop once the transition probability exceeds this");
    app.add_option("--noise-amp", noise_amp, "Uniform noise amplitude added to the initial controls");
    app.add_flag("--fixed-step-rk4", fixed_step_rk4, "Use classical RK4 with a fixed step in s");
    app.add_flag("--record", record, "Store the final forward trajectory");
    app.add_option("-o,--output", output, "Output directory (overrides output_dir)");
  }

  void apply(gpec::RunConfig& config) const {
    if (tol_rel) config.optimizer.rtol = *tol_rel;
    if (tol_abs) config.optimizer.atol = *tol_abs;
    if (max_steps) config.optimizer.max_steps = *max_steps;
    if (stop_p) config.optimizer.stop_p = *stop_p;
    if (noise_amp) config.optimizer.noise_amplitude = *noise_amp;
    if (fixed_step_rk4) config.optimizer.fixed_step_rk4 = true;
    if (record) config.record = true;
    if (output) config.output_dir = *output;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal control of a one-dimensional Gross-Pitaevskii condensate"};
  app.require_subcommand(1);

  std::string config_path;
  std::size_t jobs = 1;
  Overrides overrides;

  auto* modes = app.add_subcommand("modes", "Locate the coherent mode families with S-AITP");
  bool check = false;
  modes->add_option("config", config_path, "Run configuration file")->required();
  modes->add_flag("--check", check, "Recompute and verify existing outputs are byte-identical");
  modes->add_option("-j,--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  auto* optimize = app.add_subcommand("optimize", "Run a D-MORPH optimization or a sweep of them");
  bool sweep = false;
  optimize->add_option("config", config_path, "Run configuration file")->required();
  optimize->add_flag("--sweep", sweep, "Run every member of the configured sweep");
  optimize->add_option("-j,--jobs", jobs, "Worker threads for sweeps")->check(CLI::PositiveNumber);
  overrides.add_to(*optimize);

  auto* analyze = app.add_subcommand("analyze", "Spectra and population traces of a stored run");
  std::string run_dir;
  analyze->add_option("run", run_dir, "Run directory written by optimize")->required();

  auto* propagate = app.add_subcommand("propagate", "Forward propagation of a stored field");
  std::string field_path;
  std::optional<std::string> controls_dir;
  propagate->add_option("config", config_path, "Run configuration file")->required();
  propagate->add_option("field", field_path, "Initial wave field file")->required();
  propagate->add_option("--controls", controls_dir, "Run directory whose end controls are applied");
  overrides.add_to(*propagate);

  auto* sweep_gen = app.add_subcommand("sweep-gen", "Write the configuration of every sweep member");
  sweep_gen->add_option("config", config_path, "Run configuration file")->required();
  sweep_gen->add_option("-o,--output", overrides.output, "Output directory (overrides output_dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? gpec::exit_ok : gpec::exit_invalid_config;
  }

  try {
    if (analyze->parsed()) {
      return gpec::cmd_analyze(run_dir, std::cout);
    }
    gpec::RunConfig config = gpec::load_config(config_path);
    overrides.apply(config);
    if (modes->parsed()) {
      return gpec::cmd_modes(config, {check, jobs}, std::cout);
    }
    if (optimize->parsed()) {
      return gpec::cmd_optimize(config, sweep, jobs, std::cout);
    }
    if (propagate->parsed()) {
      std::optional<std::filesystem::path> controls;
      if (controls_dir) controls = *controls_dir;
      return gpec::cmd_propagate(config, field_path, controls, std::cout);
    }
    return gpec::cmd_sweep_gen(config, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return gpec::exit_code_for(e);
  }
}

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include "gpec/commands.hpp"
#include "gpec/error.hpp"
#include "gpec/io.hpp"
#include "oracles.hpp"

using namespace gpec;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

int run_cli(const std::string& args) {
  const std::string command = std::string(GPEC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* desk_config =
    "points = 64\n"
    "steps = 200\n"
    "g0 = 1\n"
    "target = 1\n"
    "g0_list = 0, 1\n"
    "j_max = 2\n"
    "mode_dir = modes\n"
    "output_dir = run\n";

// Mode family shared by the command tests, built once.
const fs::path& workspace() {
  static const fs::path dir = [] {
    const fs::path d = oracle::scratch_dir("commands");
    write(d / "config.txt", desk_config);
    std::ostringstream log;
    REQUIRE(cmd_modes(load_config(d / "config.txt"), {}, log) == exit_ok);
    return d;
  }();
  return dir;
}

}  // namespace

TEST_SUITE("commands") {
  TEST_CASE("exit code mapping") {
    CHECK(exit_code_for(ConfigError("x")) == exit_invalid_config);
    CHECK(exit_code_for(GridMismatch("x")) == exit_invalid_config);
    CHECK(exit_code_for(IoError("x")) == exit_io_error);
    CHECK(exit_code_for(InvalidArgument("x")) == exit_failure);
    CHECK(mode_file_name(10.0, 3) == "mode_g10_j3.gpec");
    CHECK(mode_file_name(0.5, 0) == "mode_g0.5_j0.gpec");
  }

  TEST_CASE("mode table and deterministic rerun") {
    const fs::path& dir = workspace();
    const CsvTable table = CsvTable::read(dir / "modes" / "modes.csv");
    CHECK(table.header() == std::vector<std::string>{"g0", "j", "energy", "stability_distance", "residual",
                                                     "iterations", "converged", "file"});
    CHECK(table.rows().size() == 6);
    for (std::size_t r = 0; r < 3; ++r) CHECK(std::abs(table.number(r, "energy") - (r + 0.5)) < 1e-2);
    const auto family = load_mode_family(dir / "modes", 1.0);
    CHECK(family.size() == 3);
    CHECK(family[2].index == 2);
    std::ostringstream log;
    ModesOptions check;
    check.check = true;
    check.jobs = 2;
    CHECK(cmd_modes(load_config(dir / "config.txt"), check, log) == exit_ok);
    CHECK(log.str().find("byte-identical") != std::string::npos);
    CHECK_THROWS_AS(load_mode_family(dir / "modes", 7.0), IoError);
  }

  TEST_CASE("partial mode success has its own exit code") {
    const fs::path dir = oracle::scratch_dir("partial");
    write(dir / "config.txt", std::string(desk_config) + "saitp_max_iters = 3\n");
    std::ostringstream log;
    CHECK(cmd_modes(load_config(dir / "config.txt"), {}, log) == exit_partial);
    const CsvTable table = CsvTable::read(dir / "modes" / "modes.csv");
    CHECK(table.text(0, "converged") == "0");
  }

  TEST_CASE("optimize, analyze and determinism") {
    const fs::path& dir = workspace();
    RunConfig config = load_config(dir / "config.txt");
    std::ostringstream log;
    config.output_dir = dir / "run_a";
    const OptimizationRun run = execute_optimization(config, log);
    CHECK(run.final_objective() > 0.99);
    config.output_dir = dir / "run_b";
    execute_optimization(config, log);
    CHECK(slurp(dir / "run_a" / "history.csv") == slurp(dir / "run_b" / "history.csv"));
    const auto meta = read_metadata(dir / "run_a" / "run.txt");
    CHECK(meta.at("termination") == "converged");
    CHECK(meta.at("trajectory_recorded") == "false");

    CHECK(cmd_analyze(dir / "run_a", log) == exit_ok);
    const std::string first = slurp(dir / "run_a" / "analysis" / "spectrum2d_V.csv");
    const std::string summary = slurp(dir / "run_a" / "analysis" / "summary.txt");
    CHECK(cmd_analyze(dir / "run_a", log) == exit_ok);
    CHECK(slurp(dir / "run_a" / "analysis" / "spectrum2d_V.csv") == first);
    CHECK(slurp(dir / "run_a" / "analysis" / "summary.txt") == summary);

    const CsvTable g = CsvTable::read(dir / "run_a" / "analysis" / "spectrum_g.csv");
    for (std::size_t r = 0; r < g.rows().size(); ++r) CHECK(g.number(r, "power") == 0.0);
    const CsvTable s2 = CsvTable::read(dir / "run_a" / "analysis" / "spectrum2d_V.csv");
    CHECK(s2.header() == std::vector<std::string>{"k", "omega", "power", "dc"});
    CHECK(s2.rows().size() == 64 * 200);
    const CsvTable pop = CsvTable::read(dir / "run_a" / "analysis" / "population.csv");
    CHECK(pop.number(0, "P0") == doctest::Approx(1.0));
    CHECK(pop.number(pop.rows().size() - 1, "P1") > 0.99);

    // A recorded trajectory gives the same analysis as re-propagation.
    config.output_dir = dir / "run_c";
    config.record = true;
    execute_optimization(config, log);
    CHECK(fs::exists(dir / "run_c" / "trajectory.gpec"));
    CHECK(cmd_analyze(dir / "run_c", log) == exit_ok);
    CHECK(slurp(dir / "run_c" / "analysis" / "population.csv") ==
          slurp(dir / "run_a" / "analysis" / "population.csv"));

    // The stored config reproduces the run in place.
    const RunConfig stored = load_config(dir / "run_a" / "config.txt");
    CHECK(stored.output_dir == dir / "run_a" / ".");
    CHECK(stored.mode_dir == fs::absolute(dir / "modes"));
  }

  TEST_CASE("corrupt run files are reported") {
    const fs::path& dir = workspace();
    RunConfig config = load_config(dir / "config.txt");
    config.output_dir = dir / "run_corrupt";
    config.optimizer.max_steps = 1;
    std::ostringstream log;
    execute_optimization(config, log);
    std::string bytes = slurp(dir / "run_corrupt" / "controls_end_V.gpec");
    bytes[100] ^= 1;
    write(dir / "run_corrupt" / "controls_end_V.gpec", bytes);
    CHECK_THROWS_AS(cmd_analyze(dir / "run_corrupt", log), IoError);
    CHECK(run_cli("analyze " + (dir / "run_corrupt").string()) == exit_io_error);
  }

  TEST_CASE("propagate diagnostics") {
    const fs::path& dir = workspace();
    std::ostringstream log;
    RunConfig config = load_config(dir / "config.txt");
    config.g0 = 5.0;
    config.output_dir = dir / "prop";
    config.points = 64;
    CHECK(cmd_propagate(config, dir / "modes" / mode_file_name(1.0, 0), std::nullopt, log) == exit_ok);
    const CsvTable diag = CsvTable::read(dir / "prop" / "diagnostics.csv");
    CHECK(diag.header() ==
          std::vector<std::string>{"t", "norm_drift", "parity_defect", "center_of_mass", "initial_overlap"});
    for (std::size_t r = 0; r < diag.rows().size(); ++r) {
      CHECK(std::abs(diag.number(r, "norm_drift")) < 1e-10);
      CHECK(diag.number(r, "parity_defect") < 1e-8);
    }
    config.points = 32;
    CHECK_THROWS_AS(cmd_propagate(config, dir / "modes" / mode_file_name(1.0, 0), std::nullopt, log), GridMismatch);
  }

  TEST_CASE("displaced packet oscillates with the trap period") {
    const fs::path dir = oracle::scratch_dir("ehrenfest");
    const SpatialGrid grid(20.0, 128);
    WaveField psi(grid);
    for (std::size_t j = 0; j < grid.size(); ++j) psi[j] = oracle::oscillator_state(0, grid.x(j) - grid.center() - 1.5);
    write_field(dir / "packet.gpec", normalize(psi));
    write(dir / "config.txt", "points = 128\ng0 = 0\nduration = 20\nsteps = 2000\noutput_dir = out\n");
    std::ostringstream log;
    REQUIRE(cmd_propagate(load_config(dir / "config.txt"), dir / "packet.gpec", std::nullopt, log) == exit_ok);
    const CsvTable diag = CsvTable::read(dir / "out" / "diagnostics.csv");
    // Upward zero crossings of x_c - L/2, interpolated linearly.
    std::vector<double> crossings;
    for (std::size_t r = 1; r < diag.rows().size(); ++r) {
      const double a = diag.number(r - 1, "center_of_mass") - 10.0, b = diag.number(r, "center_of_mass") - 10.0;
      if (a < 0 && b >= 0) {
        const double t0 = diag.number(r - 1, "t"), t1 = diag.number(r, "t");
        crossings.push_back(t0 + (t1 - t0) * a / (a - b));
      }
    }
    REQUIRE(crossings.size() >= 2);
    const double dt = 20.0 / 2000;
    for (std::size_t i = 1; i < crossings.size(); ++i) {
      CHECK(std::abs(crossings[i] - crossings[i - 1] - 2 * std::numbers::pi) < 2 * dt);
    }
    CHECK(diag.number(0, "center_of_mass") == doctest::Approx(11.5).epsilon(1e-6));
  }

  TEST_CASE("sweep generation") {
    RunConfig base = parse_config(
        "sweep_g0 = 1, 5\nsweep_targets = 1, 2\nsweep_amplitudes = 1\nsweep_phases = symmetric, "
        "spatially_dependent\nsweep_total_g = 1, 5, 10, 20\n");
    base.output_dir = oracle::scratch_dir("sweep");
    const auto members = generate_sweep(base);
    // potential_only: 2 g0 x 2 targets x 2 phases; each g-varying scenario adds 4 totals.
    CHECK(members.size() == 8 + 2 * 8 * 4);
    for (const auto& m : members) {
      if (m.scenario == ScenarioKind::potential_only) {
        CHECK(m.guess.g_const == 0.0);
      } else {
        CHECK(m.g0 + m.guess.g_const > 0.0);
      }
      CHECK(m.mode_dir.is_absolute());
    }
    std::ostringstream log;
    CHECK(cmd_sweep_gen(base, log) == exit_ok);
    const CsvTable index = CsvTable::read(base.output_dir / "sweep" / "index.csv");
    CHECK(index.rows().size() == members.size());
    const RunConfig reloaded = load_config(index.text(5, "config"));
    CHECK(reloaded.g0 == members[5].g0);
    CHECK(reloaded.output_dir == members[5].output_dir / ".");
  }

  TEST_CASE("sweep run reports partial success") {
    const fs::path& dir = workspace();
    RunConfig base = load_config(dir / "config.txt");
    base.sweep_g0 = {1.0};
    base.sweep_targets = {1};
    base.sweep_scenarios = {ScenarioKind::potential_only};
    base.sweep_amplitudes = {1.0 / (5 * std::numbers::pi)};
    base.output_dir = dir / "sweep_run";
    std::ostringstream log;
    // The symmetric member is parity-blocked and stalls.
    CHECK(cmd_optimize(base, true, 2, log) == exit_partial);
    const CsvTable summary = CsvTable::read(dir / "sweep_run" / "sweep" / "summary.csv");
    REQUIRE(summary.rows().size() == 2);
    CHECK(summary.text(0, "outcome") == "stalled");
    CHECK(summary.text(1, "outcome") == "converged");
  }

  TEST_CASE("command line exit codes") {
    const fs::path& dir = workspace();
    write(dir / "bad.txt", "points = 63\n");
    CHECK(run_cli("modes " + (dir / "bad.txt").string()) == exit_invalid_config);
    write(dir / "typo.txt", "pionts = 64\n");
    CHECK(run_cli("modes " + (dir / "typo.txt").string()) == exit_invalid_config);
    write(dir / "nomodes.txt", std::string(desk_config) + "mode_dir = nowhere\n");
    CHECK(run_cli("optimize " + (dir / "nomodes.txt").string()) == exit_io_error);
    CHECK(run_cli("analyze " + (dir / "missing_run").string()) == exit_io_error);
    CHECK(run_cli("propagate " + (dir / "config.txt").string() + " " + (dir / "missing.gpec").string()) ==
          exit_io_error);
    CHECK(run_cli("frobnicate") == exit_invalid_config);
    CHECK(run_cli("--help") == exit_ok);
    CHECK(run_cli("optimize " + (dir / "config.txt").string() + " --max-steps 1 -o " + (dir / "cli_run").string()) ==
          exit_ok);
    CHECK(read_metadata(dir / "cli_run" / "run.txt").at("accepted_steps") == "1");
  }
}

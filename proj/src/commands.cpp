#include "gpec/commands.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "gpec/analysis.hpp"
#include "gpec/error.hpp"
#include "gpec/io.hpp"
#include "gpec/propagator.hpp"

namespace gpec {

namespace fs = std::filesystem;

int exit_code_for(const std::exception& error) noexcept {
  if (dynamic_cast<const ConfigError*>(&error) || dynamic_cast<const GridMismatch*>(&error)) {
    return exit_invalid_config;
  }
  if (dynamic_cast<const IoError*>(&error)) {
    return exit_io_error;
  }
  return exit_failure;
}

std::string mode_file_name(double g0, int j) {
  return "mode_g" + format_double(g0) + "_j" + std::to_string(j) + ".gpec";
}

namespace {

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  write_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

// Runs task(i) for i in [0, count) on up to `jobs` threads; returns the
// messages of tasks that threw, indexed by task.
template <typename Task>
std::vector<std::optional<std::string>> run_parallel(std::size_t count, std::size_t jobs, Task task) {
  std::vector<std::optional<std::string>> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        task(i);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(jobs, count));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return errors;
}

const std::vector<std::string> mode_columns = {"g0",        "j",          "energy", "stability_distance",
                                               "residual",  "iterations", "converged", "file"};

}  // namespace

std::vector<CoherentMode> load_mode_family(const fs::path& mode_dir, double g0) {
  const CsvTable table = CsvTable::read(mode_dir / "modes.csv");
  std::vector<CoherentMode> out;
  for (std::size_t r = 0; r < table.rows().size(); ++r) {
    if (table.number(r, "g0") != g0 || table.text(r, "converged") != "1") continue;
    CoherentMode mode{static_cast<int>(table.number(r, "j")), g0, read_wave_field(mode_dir / table.text(r, "file")),
                      table.number(r, "energy"), table.number(r, "residual"),
                      static_cast<std::size_t>(table.number(r, "iterations"))};
    out.push_back(std::move(mode));
  }
  if (out.empty()) {
    throw IoError("no converged mode family for g0 = " + format_double(g0) + " in " + mode_dir.string());
  }
  std::sort(out.begin(), out.end(), [](const CoherentMode& a, const CoherentMode& b) { return a.index < b.index; });
  return out;
}

namespace {

const CoherentMode& find_mode(const std::vector<CoherentMode>& family, int j) {
  for (const auto& mode : family) {
    if (mode.index == j) return mode;
  }
  throw IoError("mode family for g0 = " + format_double(family.front().g0) + " lacks mode " + std::to_string(j));
}

}  // namespace

int cmd_modes(const RunConfig& config, const ModesOptions& options, std::ostream& log) {
  config.validate();
  const SpatialGrid grid = config.space();
  struct Task {
    double g0;
    int j;
  };
  std::vector<Task> tasks;
  for (double g0 : config.g0_list) {
    for (int j = 0; j <= config.j_max; ++j) tasks.push_back({g0, j});
  }

  struct Outcome {
    SaitpReport report;
    double distance = 0.0;
    std::vector<std::uint8_t> bytes;
  };
  std::vector<std::optional<Outcome>> outcomes(tasks.size());
  std::mutex log_mutex;
  const auto errors = run_parallel(tasks.size(), options.jobs, [&](std::size_t i) {
    const Task& t = tasks[i];
    SaitpReport report = saitp_search(t.j, t.g0, harmonic_trial(t.j, grid, config.constants), config.constants,
                                      config.saitp);
    const double distance =
        stability_distance(report.mode, config.constants, config.stability_duration, config.stability_steps);
    std::vector<std::uint8_t> bytes = encode(report.mode.field);
    {
      std::lock_guard lock(log_mutex);
      log << "g0 = " << format_double(t.g0) << " j = " << t.j << ": E = " << format_double(report.mode.energy)
          << " d = " << format_double(distance) << (report.converged ? "" : " (not converged)") << "\n";
    }
    outcomes[i] = Outcome{std::move(report), distance, std::move(bytes)};
  });

  CsvTable table(mode_columns);
  bool partial = false;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (errors[i]) {
      throw Error("mode search g0 = " + format_double(tasks[i].g0) + " j = " + std::to_string(tasks[i].j) +
                  " failed: " + *errors[i]);
    }
    const Outcome& o = *outcomes[i];
    partial = partial || !o.report.converged;
    table.add_row({format_double(tasks[i].g0), std::to_string(tasks[i].j), format_double(o.report.mode.energy),
                   format_double(o.distance), format_double(o.report.mode.residual),
                   std::to_string(o.report.mode.iterations), o.report.converged ? "1" : "0",
                   mode_file_name(tasks[i].g0, tasks[i].j)});
  }

  if (options.check) {
    bool identical = true;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      const fs::path path = config.mode_dir / mode_file_name(tasks[i].g0, tasks[i].j);
      if (read_bytes(path) != outcomes[i]->bytes) {
        log << "differs: " << path.string() << "\n";
        identical = false;
      }
    }
    const std::vector<std::uint8_t> csv = read_bytes(config.mode_dir / "modes.csv");
    const std::string text = table.str();
    if (std::string(csv.begin(), csv.end()) != text) {
      log << "differs: " << (config.mode_dir / "modes.csv").string() << "\n";
      identical = false;
    }
    log << (identical ? "check passed: outputs are byte-identical\n" : "check failed\n");
    return identical ? exit_ok : exit_failure;
  }

  ensure_directory(config.mode_dir);
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    write_bytes(config.mode_dir / mode_file_name(tasks[i].g0, tasks[i].j), outcomes[i]->bytes);
  }
  table.write(config.mode_dir / "modes.csv");
  return partial ? exit_partial : exit_ok;
}

OptimizationRun execute_optimization(const RunConfig& config, std::ostream& log) {
  config.validate();
  const std::vector<CoherentMode> family = load_mode_family(config.mode_dir, config.g0);
  const CoherentMode& initial_mode = find_mode(family, 0);
  const CoherentMode& target_mode = find_mode(family, config.target);
  const SpatialGrid space = config.space();
  const TimeGrid time = config.time();
  if (!(initial_mode.field.grid() == space)) {
    throw GridMismatch("mode family grid does not match the configured grid");
  }

  const TransitionProblem problem{config.constants, config.g0, initial_mode.field, target_mode.field,
                                  config.adjoint_scheme};
  const InitialGuess guess = config.resolved_guess();
  const ControlPair initial = initial_controls(guess, config.scenario, config.g0, space, time);
  OptimizationRun run = run_optimization(problem, config.target, config.scenario, guess, initial, config.optimizer);

  const fs::path dir = config.output_dir;
  ensure_directory(dir);
  ensure_directory(dir / "modes");
  RunConfig stored = config;
  stored.mode_dir = fs::absolute(config.mode_dir);
  stored.output_dir = ".";
  write_text(dir / "config.txt", stored.to_text());

  std::ostringstream meta;
  meta << "format = 1\n"
       << "g0 = " << format_double(run.g0) << "\n"
       << "target = " << run.target_index << "\n"
       << "scenario = " << to_string(run.scenario) << "\n"
       << "phase = " << to_string(run.guess.phase) << "\n"
       << "amplitude = " << format_double(run.guess.amplitude) << "\n"
       << "omega_v = " << format_double(run.guess.omega_v) << "\n"
       << "g_const = " << format_double(run.guess.g_const) << "\n"
       << "termination = " << to_string(run.termination) << "\n"
       << "final_objective = " << format_double(run.final_objective()) << "\n"
       << "accepted_steps = " << run.accepted_steps() << "\n"
       << "min_total_nonlinearity = " << format_double(run.min_total_nonlinearity) << "\n"
       << "rhs_evaluations = " << run.rhs_evaluations << "\n"
       << "trajectory_recorded = " << (config.record ? "true" : "false") << "\n";
  write_text(dir / "run.txt", meta.str());

  CsvTable history({"step", "s", "objective", "step_size", "tangent_norm"});
  for (const HistoryEntry& h : run.history) {
    history.add_row(std::vector<std::string>{std::to_string(h.step), format_double(h.s), format_double(h.objective),
                                             format_double(h.step_size), format_double(h.tangent_norm)});
  }
  history.write(dir / "history.csv");

  write_field(dir / "controls_start_V.gpec", run.start.v_cont);
  write_field(dir / "controls_start_g.gpec", run.start.g_cont);
  write_field(dir / "controls_end_V.gpec", run.end.v_cont);
  write_field(dir / "controls_end_g.gpec", run.end.g_cont);
  if (!run.snapshots.empty()) {
    ensure_directory(dir / "snapshots");
    for (const ControlSnapshot& snap : run.snapshots) {
      const std::string stem = "step_" + std::to_string(snap.step);
      write_field(dir / "snapshots" / (stem + "_V.gpec"), snap.controls.v_cont);
      write_field(dir / "snapshots" / (stem + "_g.gpec"), snap.controls.g_cont);
    }
  }
  if (config.record) {
    const Hamiltonian1D hamiltonian(config.constants, config.g0, run.end.v_cont, run.end.g_cont);
    write_field(dir / "trajectory.gpec", propagate_recorded(initial_mode.field, hamiltonian));
  }

  CsvTable modes(mode_columns);
  for (const CoherentMode& mode : family) {
    const std::string file = mode_file_name(mode.g0, mode.index);
    write_field(dir / "modes" / file, mode.field);
    modes.add_row({format_double(mode.g0), std::to_string(mode.index), format_double(mode.energy), "nan",
                   format_double(mode.residual), std::to_string(mode.iterations), "1", file});
  }
  modes.write(dir / "modes" / "modes.csv");

  log << dir.string() << ": " << to_string(run.termination) << " after " << run.accepted_steps()
      << " steps, P = " << format_double(run.final_objective()) << "\n";
  return run;
}

std::vector<RunConfig> generate_sweep(const RunConfig& base) {
  base.validate();
  std::vector<RunConfig> out;
  const fs::path root = fs::absolute(base.output_dir) / "sweep";
  const fs::path mode_dir = fs::absolute(base.mode_dir);
  for (const ScenarioKind scenario : base.sweep_scenarios) {
    for (const double g0 : base.sweep_g0) {
      for (const int target : base.sweep_targets) {
        for (const double amplitude : base.sweep_amplitudes) {
          for (const PhaseProfile phase : base.sweep_phases) {
            std::vector<double> g_consts;
            if (scenario == ScenarioKind::potential_only) {
              g_consts.push_back(0.0);
            } else {
              for (double total : base.sweep_total_g) g_consts.push_back(total - g0);
            }
            for (const double g_const : g_consts) {
              RunConfig member = base;
              member.scenario = scenario;
              member.g0 = g0;
              member.target = target;
              member.guess.amplitude = amplitude;
              member.guess.phase = phase;
              member.guess.g_const = g_const;
              member.guess.literal_g_trial = base.guess.literal_g_trial && scenario == ScenarioKind::potential_only;
              member.mode_dir = mode_dir;
              char name[16];
              std::snprintf(name, sizeof name, "%04zu", out.size());
              member.output_dir = root / name;
              member.validate();
              out.push_back(std::move(member));
            }
          }
        }
      }
    }
  }
  return out;
}

int cmd_optimize(const RunConfig& config, bool sweep, std::size_t jobs, std::ostream& log) {
  if (!sweep) {
    execute_optimization(config, log);
    return exit_ok;
  }
  const std::vector<RunConfig> members = generate_sweep(config);
  std::vector<TerminationReason> reasons(members.size(), TerminationReason::step_cap);
  std::mutex log_mutex;
  const auto errors = run_parallel(members.size(), jobs, [&](std::size_t i) {
    std::ostringstream member_log;
    reasons[i] = execute_optimization(members[i], member_log).termination;
    std::lock_guard lock(log_mutex);
    log << member_log.str();
  });

  CsvTable summary({"member", "scenario", "g0", "target", "amplitude", "phase", "g_const", "outcome"});
  std::size_t converged = 0;
  for (std::size_t i = 0; i < members.size(); ++i) {
    const RunConfig& m = members[i];
    const std::string outcome = errors[i] ? "error" : to_string(reasons[i]);
    if (errors[i]) log << m.output_dir.string() << ": error: " << *errors[i] << "\n";
    if (!errors[i] && reasons[i] == TerminationReason::converged) ++converged;
    summary.add_row({m.output_dir.filename().string(), to_string(m.scenario), format_double(m.g0),
                     std::to_string(m.target), format_double(m.guess.amplitude), to_string(m.guess.phase),
                     format_double(m.guess.g_const), outcome});
  }
  ensure_directory(config.output_dir / "sweep");
  summary.write(config.output_dir / "sweep" / "summary.csv");
  log << converged << " of " << members.size() << " sweep runs converged\n";
  return converged == members.size() ? exit_ok : exit_partial;
}

int cmd_sweep_gen(const RunConfig& config, std::ostream& log) {
  const std::vector<RunConfig> members = generate_sweep(config);
  CsvTable index({"member", "scenario", "g0", "target", "amplitude", "phase", "g_const", "config"});
  for (const RunConfig& m : members) {
    ensure_directory(m.output_dir);
    RunConfig stored = m;
    stored.output_dir = ".";
    write_text(m.output_dir / "config.txt", stored.to_text());
    index.add_row({m.output_dir.filename().string(), to_string(m.scenario), format_double(m.g0),
                   std::to_string(m.target), format_double(m.guess.amplitude), to_string(m.guess.phase),
                   format_double(m.guess.g_const), (m.output_dir / "config.txt").string()});
  }
  ensure_directory(config.output_dir / "sweep");
  index.write(config.output_dir / "sweep" / "index.csv");
  log << members.size() << " sweep configurations written to " << (config.output_dir / "sweep").string() << "\n";
  return exit_ok;
}

std::map<std::string, std::string> read_metadata(const fs::path& path) {
  const std::vector<std::uint8_t> bytes = read_bytes(path);
  std::istringstream in(std::string(bytes.begin(), bytes.end()));
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(' '));
      s.erase(s.find_last_not_of(' ') + 1);
      return s;
    };
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

namespace {

void write_spectrum(const fs::path& path, const PowerSpectrum& spectrum) {
  CsvTable table({"bin", "omega", "power"});
  for (std::size_t n = 0; n < spectrum.power.size(); ++n) {
    table.add_row(std::vector<std::string>{std::to_string(n), format_double(spectrum.omega[n]),
                                           format_double(spectrum.power[n])});
  }
  table.write(path);
}

void write_spectrum_2d(const fs::path& path, const Spectrum2D& spectrum) {
  std::string text = "k,omega,power,dc\n";
  text.reserve(spectrum.power.size() * 64);
  for (std::size_t m = 0; m < spectrum.rows(); ++m) {
    for (std::size_t n = 0; n < spectrum.cols(); ++n) {
      text += format_double(spectrum.wavenumber[m]);
      text += ',';
      text += format_double(spectrum.omega[n]);
      text += ',';
      text += format_double(spectrum(m, n));
      text += Spectrum2D::is_dc(m, n) ? ",1\n" : ",0\n";
    }
  }
  write_text(path, text);
}

}  // namespace

int cmd_analyze(const fs::path& run_dir, std::ostream& log) {
  const auto meta = read_metadata(run_dir / "run.txt");
  if (meta.count("format") == 0 || meta.at("format") != "1") {
    throw IoError("run directory " + run_dir.string() + " has an unsupported run.txt format");
  }
  const RunConfig config = load_config(run_dir / "config.txt");
  const ControlField v_cont = read_control(run_dir / "controls_end_V.gpec");
  const ControlField g_cont = read_control(run_dir / "controls_end_g.gpec");
  if (v_cont.kind() != ControlKind::potential || g_cont.kind() != ControlKind::nonlinearity) {
    throw IoError("run directory control files hold the wrong control kinds");
  }
  const std::vector<CoherentMode> family = load_mode_family(run_dir / "modes", config.g0);
  const CoherentMode& initial_mode = find_mode(family, 0);
  const CoherentMode& target_mode = find_mode(family, config.target);

  const Trajectory trajectory = fs::exists(run_dir / "trajectory.gpec")
                                    ? read_trajectory(run_dir / "trajectory.gpec")
                                    : propagate_recorded(initial_mode.field,
                                                         Hamiltonian1D(config.constants, config.g0, v_cont, g_cont));
  if (!(trajectory.space() == v_cont.space()) || !(trajectory.time() == v_cont.time())) {
    throw IoError("stored trajectory does not match the stored controls");
  }

  const fs::path out = run_dir / "analysis";
  ensure_directory(out);
  const PowerSpectrum sv = spectrum_V(v_cont);
  const PowerSpectrum sg = spectrum_g(g_cont, trajectory);
  const PowerSpectrum sd = spectrum_dual(v_cont, g_cont, trajectory);
  write_spectrum(out / "spectrum_V.csv", sv);
  write_spectrum(out / "spectrum_g.csv", sg);
  write_spectrum(out / "spectrum_dual.csv", sd);
  write_spectrum_2d(out / "spectrum2d_V.csv", spectrum_2d(v_cont));
  write_spectrum_2d(out / "spectrum2d_g.csv", spectrum_2d(g_cont, &trajectory));

  const PopulationTrace trace = population_trace(trajectory, family);
  std::vector<std::string> header{"t"};
  for (int j : trace.mode_indices) header.push_back("P" + std::to_string(j));
  CsvTable population(header);
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    std::vector<double> row{trace.times[k]};
    for (const auto& p : trace.populations) row.push_back(p[k]);
    population.add_row(row);
  }
  population.write(out / "population.csv");

  const OverlapProfile profile = target_overlap_profile(initial_mode, target_mode);
  CsvTable profile_table({"x", "magnitude"});
  CsvTable profile_spectrum({"k", "power"});
  for (std::size_t j = 0; j < profile.x.size(); ++j) {
    profile_table.add_row(std::vector<double>{profile.x[j], profile.magnitude[j]});
    profile_spectrum.add_row(std::vector<double>{profile.wavenumber[j], profile.power[j]});
  }
  profile_table.write(out / "overlap_profile.csv");
  profile_spectrum.write(out / "overlap_spectrum.csv");

  std::ostringstream summary;
  const std::size_t peak = sv.peak_bin();
  summary << "transition_energy = " << format_double(target_mode.energy - initial_mode.energy) << "\n"
          << "frequency_resolution = " << format_double(sv.omega.size() > 1 ? sv.omega[1] : 0.0) << "\n"
          << "V_peak_bin = " << peak << "\n"
          << "V_peak_omega = " << format_double(sv.omega[peak]) << "\n"
          << "V_local_maxima =";
  for (std::size_t n : sv.local_maxima()) summary << " " << format_double(sv.omega[n]);
  summary << "\n"
          << "dual_dominance_ratio = " << format_double(dual_dominance_ratio(sd, sv)) << "\n";
  write_text(out / "summary.txt", summary.str());
  log << summary.str();
  return exit_ok;
}

int cmd_propagate(const RunConfig& config, const fs::path& initial_field, const std::optional<fs::path>& controls_run,
                  std::ostream& log) {
  config.validate();
  const WaveField psi0 = read_wave_field(initial_field);
  const SpatialGrid space = config.space();
  if (!(psi0.grid() == space)) {
    throw GridMismatch("initial field grid (L = " + format_double(psi0.grid().length()) +
                       ", N = " + std::to_string(psi0.size()) + ") does not match the configured grid");
  }
  const Hamiltonian1D hamiltonian = [&] {
    if (!controls_run) {
      return Hamiltonian1D(config.constants, space, config.time(), config.g0);
    }
    ControlField v = read_control(*controls_run / "controls_end_V.gpec");
    ControlField g = read_control(*controls_run / "controls_end_g.gpec");
    if (!(v.space() == space)) {
      throw GridMismatch("stored controls do not match the configured grid");
    }
    return Hamiltonian1D(config.constants, config.g0, std::move(v), std::move(g));
  }();

  const Trajectory trajectory = propagate_recorded(psi0, hamiltonian);
  ensure_directory(config.output_dir);
  write_field(config.output_dir / "trajectory.gpec", trajectory);

  CsvTable diagnostics({"t", "norm_drift", "parity_defect", "center_of_mass", "initial_overlap"});
  for (std::size_t k = 0; k < trajectory.nodes(); ++k) {
    const WaveField psi = trajectory.field(k);
    double com = 0.0;
    for (std::size_t j = 0; j < psi.size(); ++j) com += space.x(j) * std::norm(psi[j]);
    com *= space.dx();
    diagnostics.add_row(std::vector<double>{trajectory.time().t(k), norm_squared(psi) - 1.0, parity_defect(psi), com,
                                            std::norm(inner_product(psi0, psi))});
  }
  diagnostics.write(config.output_dir / "diagnostics.csv");
  log << "max norm drift = " << format_double(trajectory.max_norm_drift()) << "\n"
      << "stability distance = " << format_double(1.0 - std::norm(inner_product(psi0, trajectory.final_field())))
      << "\n";
  return exit_ok;
}

}  // namespace gpec

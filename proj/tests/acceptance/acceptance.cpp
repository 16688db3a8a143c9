// Acceptance suite: one PASS/FAIL line per criterion.
//
// Usage: gpec_acceptance [--only 1,3] [--expect-fail 2,7]
// Exits non-zero when a criterion fails that is not listed in --expect-fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fd_support.hpp"
#include "gpec/analysis.hpp"
#include "gpec/fourier.hpp"
#include "gpec/modes.hpp"
#include "gpec/optimizer.hpp"
#include "gpec/propagator.hpp"
#include "oracles.hpp"

using namespace gpec;

namespace {

const PhysicalConstants unit{};
const std::vector<double> g0_values{0.0, 1.0, 5.0, 10.0, 20.0};

// Reference energies E_j (rows j = 0..5, columns g0 as in g0_values).
const double reference_energies[6][5] = {
    {0.50, 0.87, 2.01, 3.11, 4.87}, {1.50, 1.79, 2.81, 3.86, 5.61}, {2.50, 2.75, 3.67, 4.68, 6.39},
    {3.50, 3.73, 4.58, 5.54, 7.20}, {4.50, 4.71, 5.51, 6.42, 8.04}, {5.50, 5.69, 6.45, 7.33, 8.90},
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, value);
  return buf;
}

// Families on the full L = 20, N = 300 grid, computed once.
const std::map<double, std::vector<CoherentMode>>& full_families() {
  static const auto families = [] {
    std::map<double, std::vector<CoherentMode>> out;
    const SpatialGrid grid(20.0, 300);
    for (double g0 : g0_values) {
      for (int j = 0; j <= 5; ++j) out[g0].push_back(saitp_find_mode(j, g0, harmonic_trial(j, grid, unit), unit));
    }
    return out;
  }();
  return families;
}

Outcome mode_energies() {
  double worst = 0;
  std::string where;
  for (std::size_t c = 0; c < g0_values.size(); ++c) {
    for (int j = 0; j <= 5; ++j) {
      const double err = std::abs(full_families().at(g0_values[c])[j].energy - reference_energies[j][c]);
      if (err > worst) {
        worst = err;
        where = "g0 = " + fmt("%g", g0_values[c]) + ", j = " + std::to_string(j);
      }
    }
  }
  return {worst <= 0.02, "30 modes, max |E - E_ref| = " + fmt("%.4f", worst) + " at " + where + " (tolerance 0.02)"};
}

Outcome stability_distances() {
  double worst = 0, worst_linear = 0;
  std::ostringstream failures;
  for (double g0 : g0_values) {
    for (const auto& mode : full_families().at(g0)) {
      const double d = stability_distance(mode, unit, 10.0, 500);
      if (g0 == 0.0) worst_linear = std::max(worst_linear, d);
      worst = std::max(worst, d);
      if (d >= 1e-3 || (g0 == 0.0 && d >= 1e-7)) {
        failures << " [g0 = " << g0 << ", j = " << mode.index << ": d = " << fmt("%.2e", d) << "]";
      }
    }
  }
  const std::string detail = "max d = " + fmt("%.2e", worst) + " (limit 1e-3), max d at g0 = 0 = " +
                             fmt("%.2e", worst_linear) + " (limit 1e-7)";
  const std::string failing = failures.str();
  return {failing.empty(), failing.empty() ? detail : detail + "; failing:" + failing};
}

Outcome linear_limit() {
  const SpatialGrid grid(20.0, 300);
  double worst_energy = 0, worst_fidelity = 1;
  for (const auto& mode : full_families().at(0.0)) {
    worst_energy = std::max(worst_energy, std::abs(mode.energy - (mode.index + 0.5)));
    const WaveField exact = normalize(oracle::oscillator_field(static_cast<unsigned>(mode.index), grid));
    worst_fidelity = std::min(worst_fidelity, std::norm(inner_product(exact, mode.field)));
  }
  return {worst_energy < 1e-3 && worst_fidelity > 1 - 1e-6,
          "max |E - (j + 1/2)| = " + fmt("%.2e", worst_energy) + ", min fidelity 1 - " +
              fmt("%.2e", 1 - worst_fidelity)};
}

Outcome gradient_accuracy() {
  double worst = 0;
  int checks = 0;
  for (double g0 : {0.0, 1.0, 5.0}) {
    const fd::DeskProblem problem(g0);
    for (ControlKind kind : {ControlKind::potential, ControlKind::nonlinearity}) {
      for (std::uint64_t seed : {11u, 12u, 13u}) {
        const fd::GradientCheck c = problem.check(kind, seed + 17 * static_cast<std::uint64_t>(g0),
                                                  AdjointScheme::exact_discrete);
        worst = std::max(worst, c.relative_error());
        ++checks;
      }
    }
  }
  return {worst < 1e-4, std::to_string(checks) + " directional checks, max relative error " + fmt("%.2e", worst)};
}

// g0 = 1 family on the N = 150 desk grid.
const std::vector<CoherentMode>& desk_family() {
  static const auto modes = [] {
    const SpatialGrid grid(20.0, 150);
    std::vector<CoherentMode> out;
    for (int j = 0; j <= 2; ++j) out.push_back(saitp_find_mode(j, 1.0, harmonic_trial(j, grid, unit), unit));
    return out;
  }();
  return modes;
}

OptimizationRun desk_run(int target, PhaseProfile phase, const OptimizerOptions& options) {
  const auto& modes = desk_family();
  const TimeGrid time(std::numbers::pi, 500);
  InitialGuess guess;
  guess.amplitude = 1.0 / (5.0 * std::numbers::pi);
  guess.phase = phase;
  const ControlPair controls =
      initial_controls(guess, ScenarioKind::potential_only, 1.0, modes[0].field.grid(), time);
  const TransitionProblem problem{unit, 1.0, modes[0].field, modes[static_cast<std::size_t>(target)].field,
                                  AdjointScheme::exact_discrete};
  return run_optimization(problem, target, ScenarioKind::potential_only, guess, controls, options);
}

Outcome desk_optimization() {
  std::ostringstream detail;
  bool pass = true;
  for (int target : {1, 2}) {
    const OptimizationRun run = desk_run(target, PhaseProfile::spatially_dependent, {});
    const bool ok = run.final_objective() > 0.99 && run.accepted_steps() <= 200;
    pass = pass && ok;
    detail << (target == 1 ? "" : "; ") << "0->" << target << ": P = " << fmt("%.4f", run.final_objective())
           << " after " << run.accepted_steps() << " steps (" << to_string(run.termination) << ")";
  }
  return {pass, detail.str()};
}

Outcome symmetry_trap() {
  OptimizerOptions options;
  options.max_steps = 20;
  options.detect_stall = false;
  options.stop_p = 1.0;
  const OptimizationRun run = desk_run(1, PhaseProfile::symmetric, options);
  const double p0 = run.history.front().objective;
  const double g0 = run.history.front().tangent_norm;
  double p_max = 0;
  for (const auto& h : run.history) p_max = std::max(p_max, h.objective);
  const bool pass = p0 < 1e-10 && g0 < 1e-10 && run.accepted_steps() == 20 && p_max < 1e-6;
  return {pass, "initial P = " + fmt("%.2e", p0) + ", initial gradient norm = " + fmt("%.2e", g0) +
                    ", max P over " + std::to_string(run.accepted_steps()) + " steps = " + fmt("%.2e", p_max)};
}

Outcome resonance_signature() {
  const auto& modes = full_families().at(10.0);
  const double transition = modes[5].energy - modes[0].energy;
  const SpatialGrid space(20.0, 300);
  const TimeGrid time(10.0, 1592);  // dt = 10 / 1592, the nearest grid to pi / 500
  InitialGuess guess;
  const ControlPair controls = initial_controls(guess, ScenarioKind::potential_only, 10.0, space, time);
  const TransitionProblem problem{unit, 10.0, modes[0].field, modes[5].field, AdjointScheme::exact_discrete};
  const OptimizationRun run = run_optimization(problem, 5, ScenarioKind::potential_only, guess, controls);

  const PowerSpectrum spectrum = spectrum_V(run.end.v_cont);
  const double bin = spectrum.omega[1];
  std::string nearest = "none";
  bool pass = false;
  for (std::size_t n : spectrum.local_maxima()) {
    if (std::abs(spectrum.omega[n] - transition) <= bin) {
      pass = true;
      nearest = fmt("%.3f", spectrum.omega[n]);
    }
  }
  // Non-DC part of the 2-D spectrum, marginalized over wavenumber.
  const Spectrum2D s2 = spectrum_2d(run.end.v_cont);
  std::size_t ridge = 1;
  double ridge_power = -1;
  for (std::size_t n = 1; n <= s2.cols() / 2; ++n) {
    double sum = 0;
    for (std::size_t m = 1; m < s2.rows(); ++m) sum += s2(m, n);
    if (sum > ridge_power) {
      ridge_power = sum;
      ridge = n;
    }
  }
  std::ostringstream detail;
  detail << "run P = " << fmt("%.4f", run.final_objective()) << " (" << to_string(run.termination) << ", "
         << run.accepted_steps() << " steps); E5 - E0 = " << fmt("%.3f", transition) << ", bin width "
         << fmt("%.3f", bin) << "; V-spectrum local maxima in [1, steps/2]: " << spectrum.local_maxima().size()
         << ", matching maximum: " << nearest << "; non-DC 2-D spectrum ridge at omega = "
         << fmt("%.3f", s2.omega[ridge]);
  return {pass, detail.str()};
}

// Ratio of successive differences between final states when dt halves.
double self_convergence_ratio(const SpatialGrid& space, const WaveField& psi0, bool time_dependent) {
  std::vector<WaveField> finals;
  for (std::size_t steps : {100u, 200u, 400u}) {
    const TimeGrid t(2.0, steps);
    ControlField v(space, t, ControlKind::potential), g(space, t, ControlKind::nonlinearity);
    for (std::size_t k = 0; k < t.nodes(); ++k) {
      const double tk = time_dependent ? t.t(k) : 1.0;
      for (std::size_t j = 0; j < space.size(); ++j) {
        const double x = space.x(j) - space.center();
        v(j, k) = std::cos(0.3 * x) * std::sin(1.3 * tk) + 0.4 * std::sin(0.2 * x) * tk;
        g(j, k) = 0.5 * std::cos(0.5 * x + tk);
      }
    }
    finals.push_back(propagate(psi0, Hamiltonian1D(unit, 5.0, v, g)));
  }
  auto dist = [&](const WaveField& a, const WaveField& b) {
    double s = 0;
    for (std::size_t j = 0; j < a.size(); ++j) s += std::norm(a[j] - b[j]);
    return std::sqrt(s * space.dx());
  };
  return dist(finals[0], finals[1]) / dist(finals[1], finals[2]);
}

Outcome propagator_invariants() {
  const SpatialGrid space(20.0, 300);
  const TimeGrid time(std::numbers::pi, 500);
  ControlField v(space, time, ControlKind::potential, oracle::smooth_random(300, 501, 1));
  ControlField g(space, time, ControlKind::nonlinearity, oracle::smooth_random(300, 501, 2));
  for (auto& x : v.values()) x *= 2.0;
  const WaveField psi0 = normalize(oracle::oscillator_field(0, space));
  const double drift = propagate_recorded(psi0, Hamiltonian1D(unit, 5.0, v, g)).max_norm_drift();

  const double ratio = self_convergence_ratio(space, psi0, true);
  const double static_ratio = self_convergence_ratio(space, psi0, false);

  ControlField vs(space, time, ControlKind::potential), gs(space, time, ControlKind::nonlinearity);
  for (std::size_t k = 0; k < time.nodes(); ++k) {
    for (std::size_t j = 0; j < space.size(); ++j) {
      const double x = space.x(j) - space.center();
      vs(j, k) = 2.0 * std::cos(0.4 * x) * std::sin(2.0 * time.t(k));
      gs(j, k) = 3.0 * std::exp(-0.1 * x * x) * std::cos(time.t(k));
    }
  }
  double parity = 0;
  for (unsigned n : {0u, 1u}) {
    const Trajectory traj = propagate_recorded(normalize(oracle::oscillator_field(n, space)),
                                               Hamiltonian1D(unit, 10.0, vs, gs));
    for (std::size_t k = 0; k < traj.nodes(); ++k) parity = std::max(parity, parity_defect(traj.field(k)));
  }
  const bool pass = drift < 1e-10 && ratio >= 3.2 && ratio <= 4.8 && parity < 1e-8;
  return {pass, "norm drift " + fmt("%.2e", drift) + ", self-convergence ratio " + fmt("%.3f", ratio) +
                    " with time-dependent controls (" + fmt("%.3f", static_ratio) +
                    " with static controls), max parity defect " + fmt("%.2e", parity)};
}

Outcome spectra_oracles() {
  double worst = 0;
  auto relative = [](std::span<const Complex> fast, std::span<const Complex> slow) {
    return oracle::max_abs_diff(fast, slow) / oracle::max_abs(slow);
  };
  for (std::size_t steps : {16u, 100u, 256u}) {
    const TimeGrid t(3.0, steps);
    const auto series = oracle::random_complex(steps, steps + 1);
    auto slow = oracle::naive_dft(series);
    for (auto& z : slow) z *= t.dt();
    worst = std::max(worst, relative(dft_time(series, t), slow));
  }
  std::mt19937_64 rng(77);
  std::normal_distribution<double> n;
  for (auto [rows, cols] : {std::pair<std::size_t, std::size_t>{8, 16}, {32, 64}, {128, 256}}) {
    const SpatialGrid s(20.0, rows);
    const TimeGrid t(10.0, cols);
    ControlField f(s, t, ControlKind::potential);
    for (auto& v : f.values()) v = n(rng);
    std::vector<Complex> grid(rows * cols);
    std::vector<Complex> series(cols);
    for (std::size_t j = 0; j < rows; ++j) {
      for (std::size_t k = 0; k < cols; ++k) {
        grid[j * cols + k] = f(j, k);
        series[k] += f(j, k) * s.dx();
      }
    }
    auto slow2 = oracle::naive_dft_2d(grid, rows, cols);
    for (auto& z : slow2) z *= s.dx() * t.dt();
    worst = std::max(worst, relative(transform_2d(f), slow2));
    auto slow1 = oracle::naive_dft(series);
    for (auto& z : slow1) z *= t.dt();
    worst = std::max(worst, relative(effective_transform(&f, nullptr, nullptr), slow1));
  }
  return {worst < 1e-10, "max relative deviation from naive transforms " + fmt("%.2e", worst) +
                             " (1-D up to 256, 2-D up to 128 x 256)"};
}

std::set<int> parse_list(const std::string& text) {
  std::set<int> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.insert(std::stoi(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only, expected;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--only") only = parse_list(argv[i + 1]);
    else if (flag == "--expect-fail") expected = parse_list(argv[i + 1]);
    else {
      std::fprintf(stderr, "unknown option %s\n", argv[i]);
      return 2;
    }
  }

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"mode energies of the reference family", mode_energies},
      {"stability distances of all modes", stability_distances},
      {"linear limit", linear_limit},
      {"adjoint gradient vs central differences", gradient_accuracy},
      {"desk-scale optimization 0->1 and 0->2", desk_optimization},
      {"symmetry trap", symmetry_trap},
      {"resonance signature of 0->5 at g0 = 10", resonance_signature},
      {"propagator invariants", propagator_invariants},
      {"spectra vs naive transforms", spectra_oracles},
  };

  int unexpected = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(number)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("error: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool known = expected.count(number) > 0;
    std::printf("%s criterion %d (%s): %s [%.1f s]%s\n", outcome.pass ? "PASS" : "FAIL", number,
                criteria[i].first.c_str(), outcome.detail.c_str(), seconds,
                !outcome.pass && known ? " (known failure)" : (outcome.pass && known ? " (listed as known failure)" : ""));
    std::fflush(stdout);
    if (!outcome.pass && !known) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}

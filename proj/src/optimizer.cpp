#include "gpec/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include "gpec/error.hpp"
#include "gpec/ode.hpp"

namespace gpec {

const char* to_string(ScenarioKind kind) noexcept {
  switch (kind) {
    case ScenarioKind::potential_only:
      return "potential_only";
    case ScenarioKind::dual:
      return "dual";
    case ScenarioKind::nonlinearity_only:
      return "nonlinearity_only";
  }
  return "unknown";
}

ScenarioKind parse_scenario(const std::string& text) {
  if (text == "potential_only") return ScenarioKind::potential_only;
  if (text == "dual") return ScenarioKind::dual;
  if (text == "nonlinearity_only") return ScenarioKind::nonlinearity_only;
  throw InvalidArgument("unknown scenario '" + text + "'");
}

const char* to_string(PhaseProfile profile) noexcept {
  return profile == PhaseProfile::symmetric ? "symmetric" : "spatially_dependent";
}

PhaseProfile parse_phase_profile(const std::string& text) {
  if (text == "symmetric") return PhaseProfile::symmetric;
  if (text == "spatially_dependent") return PhaseProfile::spatially_dependent;
  throw InvalidArgument("unknown phase profile '" + text + "'");
}

const char* to_string(TerminationReason reason) noexcept {
  switch (reason) {
    case TerminationReason::converged:
      return "converged";
    case TerminationReason::step_cap:
      return "step_cap";
    case TerminationReason::stalled:
      return "stalled";
  }
  return "unknown";
}

void InitialGuess::validate(double g0, ScenarioKind scenario) const {
  if (!std::isfinite(amplitude) || !std::isfinite(omega_v) || !std::isfinite(g_const) || !std::isfinite(g0)) {
    throw InvalidArgument("initial guess parameters must be finite");
  }
  if (scenario == ScenarioKind::potential_only) {
    if (g_const != 0.0) {
      throw InvalidArgument("potential_only does not vary g_cont; g_const must be 0");
    }
  } else {
    if (literal_g_trial) {
      throw InvalidArgument("literal_g_trial applies to potential_only only");
    }
    if (!(g0 + g_const > 0.0)) {
      throw InvalidArgument("trial nonlinearity g0 + g_const must be positive");
    }
  }
}

ControlPair initial_controls(const InitialGuess& guess, ScenarioKind scenario, double g0, const SpatialGrid& space,
                             const TimeGrid& time) {
  guess.validate(g0, scenario);
  ControlPair out{ControlField(space, time, ControlKind::potential),
                  ControlField(space, time, ControlKind::nonlinearity)};
  const double length = space.length();
  for (std::size_t k = 0; k < time.nodes(); ++k) {
    for (std::size_t j = 0; j < space.size(); ++j) {
      const double alpha = guess.phase == PhaseProfile::symmetric ? std::numbers::pi / length
                                                                  : std::numbers::pi * space.x(j) / length;
      out.v_cont(j, k) = guess.amplitude * std::sin(guess.omega_v * time.t(k) - alpha);
    }
  }
  const double g_trial = scenario == ScenarioKind::potential_only ? (guess.literal_g_trial ? g0 : 0.0) : guess.g_const;
  std::fill(out.g_cont.values().begin(), out.g_cont.values().end(), g_trial);
  return out;
}

double objective(const WaveField& psi_T, const WaveField& phi_f) { return std::norm(inner_product(phi_f, psi_T)); }

void TransitionProblem::validate() const {
  constants.validate();
  if (!(initial.grid() == target.grid())) {
    throw GridMismatch("initial and target fields live on different grids");
  }
  if (std::abs(norm_squared(initial) - 1.0) > 1e-8 || std::abs(norm_squared(target) - 1.0) > 1e-8) {
    throw InvalidArgument("initial and target fields must be normalized");
  }
}

FlowEvaluation flow_rhs(const TransitionProblem& problem, const ControlPair& controls, ScenarioKind scenario) {
  const Hamiltonian1D hamiltonian(problem.constants, problem.g0, controls.v_cont, controls.g_cont);
  const Trajectory trajectory = propagate_recorded(problem.initial, hamiltonian);
  FlowEvaluation out;
  out.objective = objective(trajectory.final_field(), problem.target);
  const AdjointSweep sweep = adjoint_sweep(trajectory, hamiltonian, problem.target, problem.scheme);
  if (scenario != ScenarioKind::nonlinearity_only) {
    out.potential_tangent = gradient(trajectory, sweep, ControlKind::potential);
  }
  if (scenario != ScenarioKind::potential_only) {
    out.nonlinearity_tangent = gradient(trajectory, sweep, ControlKind::nonlinearity);
  }
  const auto g = controls.g_cont.values();
  out.min_total_nonlinearity = problem.g0 + *std::min_element(g.begin(), g.end());
  return out;
}

double tangent_norm(const FlowEvaluation& evaluation) {
  double sum = 0.0;
  for (const auto* tangent : {&evaluation.potential_tangent, &evaluation.nonlinearity_tangent}) {
    if (*tangent) {
      const auto& field = **tangent;
      double s = 0.0;
      for (double v : field.values()) s += v * v;
      sum += s * field.space().dx() * field.time().dt();
    }
  }
  return std::sqrt(sum);
}

void OptimizerOptions::validate() const {
  if (!(rtol > 0.0) || !(atol > 0.0)) {
    throw InvalidArgument("optimizer tolerances must be positive");
  }
  if (max_steps == 0 || stall_window == 0) {
    throw InvalidArgument("optimizer step cap and stall window must be positive");
  }
  if (!(stop_p > 0.0 && stop_p <= 1.0)) {
    throw InvalidArgument("stop_p must lie in (0, 1]");
  }
  if (!(stall_tolerance >= 0.0) || !(noise_amplitude >= 0.0) || !(max_step > 0.0)) {
    throw InvalidArgument("optimizer stall tolerance, noise amplitude and max step must be non-negative");
  }
  if (fixed_step_rk4 && !(rk4_step > 0.0 && std::isfinite(rk4_step))) {
    throw InvalidArgument("RK4 step must be positive");
  }
}

namespace {

// Maps the flat ODE state onto the free controls and caches the most recent
// evaluation so the observer can reuse the last stage of an accepted step.
class ControlFlow {
 public:
  ControlFlow(const TransitionProblem& problem, ScenarioKind scenario, ControlPair base)
      : problem_(problem), scenario_(scenario), work_(std::move(base)) {}

  std::vector<double> pack(const ControlPair& controls) const {
    std::vector<double> y;
    if (scenario_ != ScenarioKind::nonlinearity_only) {
      y.insert(y.end(), controls.v_cont.values().begin(), controls.v_cont.values().end());
    }
    if (scenario_ != ScenarioKind::potential_only) {
      y.insert(y.end(), controls.g_cont.values().begin(), controls.g_cont.values().end());
    }
    return y;
  }

  const ControlPair& unpack(std::span<const double> y) {
    std::size_t offset = 0;
    if (scenario_ != ScenarioKind::nonlinearity_only) {
      auto dst = work_.v_cont.values();
      std::copy_n(y.begin(), dst.size(), dst.begin());
      offset = dst.size();
    }
    if (scenario_ != ScenarioKind::potential_only) {
      auto dst = work_.g_cont.values();
      std::copy_n(y.begin() + static_cast<std::ptrdiff_t>(offset), dst.size(), dst.begin());
    }
    return work_;
  }

  void rhs(std::span<const double> y, std::span<double> dydt) {
    const FlowEvaluation eval = flow_rhs(problem_, unpack(y), scenario_);
    std::size_t offset = 0;
    if (eval.potential_tangent) {
      const auto src = eval.potential_tangent->values();
      std::copy(src.begin(), src.end(), dydt.begin());
      offset = src.size();
    }
    if (eval.nonlinearity_tangent) {
      const auto src = eval.nonlinearity_tangent->values();
      std::copy(src.begin(), src.end(), dydt.begin() + static_cast<std::ptrdiff_t>(offset));
    }
    cached_y_.assign(y.begin(), y.end());
    cached_ = Cached{eval.objective, tangent_norm(eval), eval.min_total_nonlinearity};
  }

  struct Cached {
    double objective;
    double tangent_norm;
    double min_total_nonlinearity;
  };

  // Objective and tangent norm at y, reusing the last evaluation when it was at y.
  Cached at(std::span<const double> y) {
    if (!(cached_y_.size() == y.size() && std::equal(y.begin(), y.end(), cached_y_.begin()))) {
      std::vector<double> scratch(y.size());
      rhs(y, scratch);
    }
    return cached_;
  }

 private:
  const TransitionProblem& problem_;
  ScenarioKind scenario_;
  ControlPair work_;
  std::vector<double> cached_y_;
  Cached cached_{};
};

}  // namespace

OptimizationRun run_optimization(const TransitionProblem& problem, int target_index, ScenarioKind scenario,
                                 const InitialGuess& guess, const ControlPair& initial,
                                 const OptimizerOptions& options) {
  problem.validate();
  options.validate();
  if (!initial.v_cont.same_grids(initial.g_cont) || !(initial.v_cont.space() == problem.initial.grid())) {
    throw GridMismatch("initial controls do not match the problem grid");
  }

  OptimizationRun run{scenario, guess, problem.g0, target_index, initial.v_cont.time(), {}, initial, initial, {}};

  ControlFlow flow(problem, scenario, initial);
  std::vector<double> y0 = flow.pack(initial);
  if (options.noise_amplitude > 0.0) {
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> noise(-options.noise_amplitude, options.noise_amplitude);
    for (double& v : y0) v += noise(rng);
    run.start = flow.unpack(y0);
  }

  const OdeFunction f = [&flow](std::span<const double> y, std::span<double> dydt) { flow.rhs(y, dydt); };
  std::unique_ptr<OdeIntegrator> integrator;
  if (options.fixed_step_rk4) {
    integrator = std::make_unique<RungeKutta4>(f, y0, options.rk4_step);
  } else {
    AdaptiveOptions adaptive;
    adaptive.rtol = options.rtol;
    adaptive.atol = options.atol;
    adaptive.max_step = options.max_step;
    integrator = std::make_unique<DormandPrince45>(f, y0, adaptive);
  }

  auto record = [&](std::size_t step, double h) {
    const ControlFlow::Cached c = flow.at(integrator->y());
    run.history.push_back(HistoryEntry{step, integrator->s(), c.objective, h, c.tangent_norm});
    run.min_total_nonlinearity =
        step == 0 ? c.min_total_nonlinearity : std::min(run.min_total_nonlinearity, c.min_total_nonlinearity);
    if (options.snapshot_every > 0 && step % options.snapshot_every == 0) {
      run.snapshots.push_back(ControlSnapshot{step, flow.unpack(integrator->y())});
    }
    return c.objective;
  };

  double p = record(0, 0.0);
  run.termination = TerminationReason::step_cap;
  for (std::size_t step = 1; p <= options.stop_p && step <= options.max_steps; ++step) {
    const StepInfo info = integrator->advance();
    p = record(step, info.step);
    if (p > options.stop_p) break;
    if (options.detect_stall && step >= options.stall_window &&
        p - run.history[step - options.stall_window].objective < options.stall_tolerance) {
      run.termination = TerminationReason::stalled;
      break;
    }
  }
  if (p > options.stop_p) {
    run.termination = TerminationReason::converged;
  }
  run.end = flow.unpack(integrator->y());
  run.rhs_evaluations = integrator->evaluations();
  return run;
}

}  // namespace gpec

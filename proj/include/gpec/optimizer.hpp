#pragma once

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "gpec/adjoint.hpp"
#include "gpec/field.hpp"
#include "gpec/grid.hpp"
#include "gpec/propagator.hpp"

namespace gpec {

enum class ScenarioKind { potential_only, dual, nonlinearity_only };

const char* to_string(ScenarioKind kind) noexcept;
ScenarioKind parse_scenario(const std::string& text);

/// Which controls an optimization varies. For nonlinearity_only the potential
/// control, if present, is a frozen background that is never modified.
struct ControlScenario {
  ScenarioKind kind = ScenarioKind::potential_only;
  std::optional<ControlField> frozen_background;

  bool varies_potential() const noexcept { return kind != ScenarioKind::nonlinearity_only; }
  bool varies_nonlinearity() const noexcept { return kind != ScenarioKind::potential_only; }
};

enum class PhaseProfile {
  symmetric,            ///< alpha(x) = pi / L
  spatially_dependent,  ///< alpha(x) = pi x / L
};

const char* to_string(PhaseProfile profile) noexcept;
PhaseProfile parse_phase_profile(const std::string& text);

/// Trial controls V(x,t) = a sin(omega_v t - alpha(x)) and g(x,t) = g_const.
struct InitialGuess {
  double amplitude = 1.0 / (5.0 * std::numbers::pi);
  PhaseProfile phase = PhaseProfile::spatially_dependent;
  double omega_v = 0.1;
  double g_const = 0.0;
  /// potential_only: use g_cont = g0 instead of g_cont = 0 (doubles the
  /// total nonlinearity).
  bool literal_g_trial = false;

  /// Throws InvalidArgument for non-finite values, and for scenarios that
  /// vary g when g0 + g_const <= 0.
  void validate(double g0, ScenarioKind scenario) const;
};

struct ControlPair {
  ControlField v_cont;
  ControlField g_cont;
};

/// Samples the trial forms on the grids. For nonlinearity_only the sampled
/// potential is the frozen background.
ControlPair initial_controls(const InitialGuess& guess, ScenarioKind scenario, double g0, const SpatialGrid& space,
                             const TimeGrid& time);

/// P = |<phi_f | psi(T)>|^2.
double objective(const WaveField& psi_T, const WaveField& phi_f);

/// Fixed data of one 0 -> f transition problem.
struct TransitionProblem {
  PhysicalConstants constants;
  double g0 = 0.0;
  WaveField initial;  ///< psi(0), normalized
  WaveField target;   ///< phi_f, normalized
  AdjointScheme scheme = AdjointScheme::exact_discrete;

  void validate() const;
};

/// Result of one forward/adjoint pair: the objective at the evaluated
/// controls and the gradient for each control the scenario varies.
struct FlowEvaluation {
  double objective = 0.0;
  std::optional<GradientField> potential_tangent;
  std::optional<GradientField> nonlinearity_tangent;
  double min_total_nonlinearity = 0.0;
};

/// dc/ds = dP/dc for the free controls. Runs one recorded forward
/// propagation and one adjoint sweep shared by both tangents.
FlowEvaluation flow_rhs(const TransitionProblem& problem, const ControlPair& controls, ScenarioKind scenario);

/// sqrt(sum_{j,k} t(j,k)^2 dx dt) summed over the present tangents.
double tangent_norm(const FlowEvaluation& evaluation);

enum class TerminationReason { converged, step_cap, stalled };

const char* to_string(TerminationReason reason) noexcept;

struct OptimizerOptions {
  double rtol = 1e-3;
  double atol = 1e-6;
  std::size_t max_steps = 200;  ///< accepted integrator steps
  double stop_p = 0.99;         ///< converged once P > stop_p
  bool detect_stall = true;
  std::size_t stall_window = 10;
  double stall_tolerance = 1e-8;  ///< stalled when P gains less over stall_window steps
  /// Largest step in s. Bounds how far round-off components below atol can
  /// be carried along unstable directions of the flow in one step.
  double max_step = 2.0;
  bool fixed_step_rk4 = false;
  double rk4_step = 1.0;
  double noise_amplitude = 0.0;  ///< uniform noise added once to the free initial controls
  std::uint64_t seed = 0;
  std::size_t snapshot_every = 0;  ///< 0 keeps only start and end controls

  void validate() const;
};

struct HistoryEntry {
  std::size_t step = 0;  ///< accepted steps so far (0 = initial controls)
  double s = 0.0;        ///< trajectory variable
  double objective = 0.0;
  double step_size = 0.0;
  double tangent_norm = 0.0;
};

struct ControlSnapshot {
  std::size_t step = 0;
  ControlPair controls;
};

struct OptimizationRun {
  ScenarioKind scenario = ScenarioKind::potential_only;
  InitialGuess guess;
  double g0 = 0.0;
  int target_index = 0;
  TimeGrid time{1.0, 1};
  std::vector<HistoryEntry> history;
  ControlPair start;
  ControlPair end;
  std::vector<ControlSnapshot> snapshots;
  TerminationReason termination = TerminationReason::step_cap;
  /// min over (x, t) and accepted steps of g0 + g_cont.
  double min_total_nonlinearity = 0.0;
  std::size_t rhs_evaluations = 0;

  double final_objective() const { return history.empty() ? 0.0 : history.back().objective; }
  std::size_t accepted_steps() const { return history.empty() ? 0 : history.back().step; }
};

/// Integrates dc/ds = dP/dc from the initial controls until P > stop_p, the
/// step cap, or a stall. Only the scenario's free controls change; the
/// others are carried bitwise unchanged.
OptimizationRun run_optimization(const TransitionProblem& problem, int target_index, ScenarioKind scenario,
                                 const InitialGuess& guess, const ControlPair& initial,
                                 const OptimizerOptions& options = {});

}  // namespace gpec

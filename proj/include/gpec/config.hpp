#pragma once

#include <cstddef>
#include <filesystem>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "gpec/adjoint.hpp"
#include "gpec/grid.hpp"
#include "gpec/modes.hpp"
#include "gpec/optimizer.hpp"

namespace gpec {

/// Evaluates +, -, *, / and parentheses over decimal numbers and `pi`.
/// Throws ConfigError on malformed input.
double evaluate_expression(const std::string& text);

/// Everything one invocation needs. Parsed from flat `key = value` text;
/// `#` starts a comment, unknown keys are errors. Numeric values accept
/// expressions such as `1/(5*pi)`; lists are comma-separated.
struct RunConfig {
  PhysicalConstants constants;

  double length = 20.0;
  std::size_t points = 300;
  double duration = std::numbers::pi;
  std::size_t steps = 500;

  double g0 = 1.0;
  int target = 1;
  ScenarioKind scenario = ScenarioKind::potential_only;
  InitialGuess guess;
  /// Trial frequency; omega / 10 when unset.
  std::optional<double> omega_v;
  OptimizerOptions optimizer;
  AdjointScheme adjoint_scheme = AdjointScheme::exact_discrete;
  bool record = false;

  std::vector<double> g0_list{0.0, 1.0, 5.0, 10.0, 20.0};
  int j_max = 5;
  SaitpConfig saitp;
  double stability_duration = 10.0;
  std::size_t stability_steps = 500;

  std::filesystem::path mode_dir = "modes";
  std::filesystem::path output_dir = "run";

  std::vector<double> sweep_g0{0.0, 1.0, 5.0, 10.0, 20.0};
  std::vector<int> sweep_targets{1, 2, 3, 4, 5};
  std::vector<ScenarioKind> sweep_scenarios{ScenarioKind::potential_only, ScenarioKind::dual,
                                            ScenarioKind::nonlinearity_only};
  std::vector<double> sweep_amplitudes{1.0, 1.0 / (5.0 * std::numbers::pi)};
  std::vector<PhaseProfile> sweep_phases{PhaseProfile::symmetric, PhaseProfile::spatially_dependent};
  /// Allowed trial totals g0 + g_const for scenarios that vary g.
  std::vector<double> sweep_total_g{1.0, 5.0, 10.0, 20.0};

  SpatialGrid space() const { return SpatialGrid(length, points); }
  TimeGrid time() const { return TimeGrid(duration, steps); }
  /// guess with omega_v resolved.
  InitialGuess resolved_guess() const;

  /// Throws ConfigError naming the first violated rule.
  void validate() const;
  /// Canonical `key = value` text; parse_config(to_text()) reproduces this
  /// configuration.
  std::string to_text() const;
};

/// Relative paths are resolved against `base_dir`.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

}  // namespace gpec

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "gpec/config.hpp"
#include "gpec/modes.hpp"
#include "gpec/optimizer.hpp"

namespace gpec {

enum ExitCode : int {
  exit_ok = 0,
  exit_failure = 1,
  exit_partial = 2,
  exit_invalid_config = 3,
  exit_io_error = 4,
};

/// Maps an exception thrown by a command to its process exit code.
int exit_code_for(const std::exception& error) noexcept;

/// File name of a persisted mode, e.g. "mode_g10_j3.gpec".
std::string mode_file_name(double g0, int j);

/// Converged modes of one g0 family read from a mode directory (modes.csv
/// plus the field files it lists), ordered by index. Throws IoError when
/// the family or any listed file is missing or corrupt.
std::vector<CoherentMode> load_mode_family(const std::filesystem::path& mode_dir, double g0);

struct ModesOptions {
  bool check = false;  ///< recompute and compare with existing files instead of writing
  std::size_t jobs = 1;
};

/// S-AITP for every (g0, j) with j <= j_max. Writes one field file per mode
/// and modes.csv with g0, j, energy, stability_distance, residual,
/// iterations, converged, file. Returns exit_partial when some search did
/// not converge (or, with check, exit_failure when outputs differ).
int cmd_modes(const RunConfig& config, const ModesOptions& options, std::ostream& log);

/// Runs one optimization and persists it under config.output_dir:
/// config.txt, run.txt, history.csv, controls_{start,end}_{V,g}.gpec,
/// optional snapshots/ and trajectory.gpec, and modes/ holding the g0 family.
OptimizationRun execute_optimization(const RunConfig& config, std::ostream& log);

/// Every configuration of the sweep: guesses x scenarios x g0 x targets,
/// keeping only trial totals g0 + g_const in sweep_total_g for scenarios that
/// vary g. Member i writes to output_dir/sweep/<i>.
std::vector<RunConfig> generate_sweep(const RunConfig& base);

/// Single run, or (sweep) every generated member in `jobs` worker threads.
/// A sweep returns exit_partial when some member did not converge.
int cmd_optimize(const RunConfig& config, bool sweep, std::size_t jobs, std::ostream& log);

/// Writes each sweep member's config.txt under output_dir/sweep/<i>/ and an
/// index.csv listing them.
int cmd_sweep_gen(const RunConfig& config, std::ostream& log);

/// Spectra, 2-D spectra, population trace and overlap profile of a run
/// directory, written to run_dir/analysis/. Re-propagates from the stored
/// end controls when no trajectory was recorded.
int cmd_analyze(const std::filesystem::path& run_dir, std::ostream& log);

/// Forward run of `initial_field` with the end controls of `controls_run`
/// (or control-free). Writes trajectory.gpec and diagnostics.csv (norm drift,
/// parity defect, center of mass, overlap with the initial field).
int cmd_propagate(const RunConfig& config, const std::filesystem::path& initial_field,
                  const std::optional<std::filesystem::path>& controls_run, std::ostream& log);

/// `key = value` lines of a run.txt file.
std::map<std::string, std::string> read_metadata(const std::filesystem::path& path);

}  // namespace gpec

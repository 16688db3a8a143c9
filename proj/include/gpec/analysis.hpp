#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "gpec/field.hpp"
#include "gpec/grid.hpp"
#include "gpec/modes.hpp"
#include "gpec/propagator.hpp"

namespace gpec {

enum class SpectrumKind { potential, nonlinearity, combined };

const char* to_string(SpectrumKind kind) noexcept;

/// |F(w_n)|^2 of a spatially integrated effective control at w_n = 2 pi n / T,
/// n = 0..steps-1. Bin 0 is the DC term. For real input the upper half of the
/// bins mirrors the lower half.
struct PowerSpectrum {
  SpectrumKind kind = SpectrumKind::potential;
  std::vector<double> omega;
  std::vector<double> power;

  /// Bins n in [1, steps/2] whose power exceeds both neighbours.
  std::vector<std::size_t> local_maxima() const;
  /// Bin in [1, steps/2] of largest power.
  std::size_t peak_bin() const;
};

/// F(w_n) = sum_k exp(-i w_n t_k) [ sum_j e(x_j, t_k) dx ] dt for the
/// effective control e = V_cont + g_cont |psi|^2. Either control may be
/// absent; g_cont requires the trajectory of the same run.
std::vector<Complex> effective_transform(const ControlField* v_cont, const ControlField* g_cont,
                                         const Trajectory* trajectory);

PowerSpectrum spectrum_V(const ControlField& v_cont);
PowerSpectrum spectrum_g(const ControlField& g_cont, const Trajectory& trajectory);
PowerSpectrum spectrum_dual(const ControlField& v_cont, const ControlField& g_cont, const Trajectory& trajectory);

/// || |V+g|^2 - |V|^2 ||_1 / || |V+g|^2 ||_1; small when the potential
/// control dominates the combined spectrum.
double dual_dominance_ratio(const PowerSpectrum& combined, const PowerSpectrum& potential);

/// |F_{x,t}[f](k_m, w_n)|^2 with
///   F = sum_k sum_j exp(-i w_n t_k) exp(-2 pi i k_m x_j) f(x_j, t_k) dx dt,
/// k_m = m / L (m = 0..N-1) and w_n = 2 pi n / T (n = 0..steps-1), using the
/// first `steps` time samples. Stored with the wavenumber index outermost.
struct Spectrum2D {
  std::vector<double> wavenumber;  ///< k_m = m / L
  std::vector<double> omega;
  std::vector<double> power;  ///< power[m * omega.size() + n]

  std::size_t rows() const noexcept { return wavenumber.size(); }
  std::size_t cols() const noexcept { return omega.size(); }
  double operator()(std::size_t m, std::size_t n) const noexcept { return power[m * omega.size() + n]; }
  /// DC row or column, omitted when rendering.
  static bool is_dc(std::size_t m, std::size_t n) noexcept { return m == 0 || n == 0; }
};

/// Complex transform behind spectrum_2d for an arbitrary real field,
/// indexed [m * steps + n].
std::vector<Complex> transform_2d(const ControlField& field);

/// 2-D spectrum of V_cont, or of g_cont |psi|^2 for a nonlinearity control
/// (trajectory required).
Spectrum2D spectrum_2d(const ControlField& control, const Trajectory* trajectory = nullptr);

/// P_{0->j}(t_k) = |<phi_j | psi(t_k)>|^2 for each requested mode.
struct PopulationTrace {
  std::vector<int> mode_indices;
  std::vector<double> times;
  /// populations[i][k] for mode_indices[i] at times[k].
  std::vector<std::vector<double>> populations;
};

/// Modes must share one g0 and the trajectory grid.
PopulationTrace population_trace(const Trajectory& trajectory, const std::vector<CoherentMode>& modes);

/// |phi_f*(x) phi_0(x)| and the normalized spatial power spectrum
/// |F_x[phi_f* phi_0]|^2 / max, F_x = sum_j exp(-2 pi i k_m x_j) f(x_j) dx.
struct OverlapProfile {
  std::vector<double> x;
  std::vector<double> magnitude;
  std::vector<double> wavenumber;  ///< k_m = m / L
  std::vector<double> power;       ///< unit peak (all zero for a zero profile)
};

OverlapProfile target_overlap_profile(const CoherentMode& initial, const CoherentMode& target);

}  // namespace gpec

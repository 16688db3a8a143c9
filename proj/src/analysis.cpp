#include "gpec/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "gpec/error.hpp"
#include "gpec/fourier.hpp"

namespace gpec {

const char* to_string(SpectrumKind kind) noexcept {
  switch (kind) {
    case SpectrumKind::potential:
      return "V";
    case SpectrumKind::nonlinearity:
      return "g";
    case SpectrumKind::combined:
      return "V_plus_g";
  }
  return "unknown";
}

std::vector<std::size_t> PowerSpectrum::local_maxima() const {
  std::vector<std::size_t> out;
  const std::size_t half = power.size() / 2;
  for (std::size_t n = 1; n <= half && n + 1 < power.size(); ++n) {
    if (power[n] > power[n - 1] && power[n] > power[n + 1]) {
      out.push_back(n);
    }
  }
  return out;
}

std::size_t PowerSpectrum::peak_bin() const {
  if (power.size() < 2) {
    return 0;
  }
  const std::size_t half = std::max<std::size_t>(1, power.size() / 2);
  const auto first = power.begin() + 1;
  return static_cast<std::size_t>(std::max_element(first, power.begin() + static_cast<std::ptrdiff_t>(half) + 1) -
                                  power.begin());
}

namespace {

const SpatialGrid& check_inputs(const ControlField* v_cont, const ControlField* g_cont,
                                const Trajectory* trajectory) {
  if (!v_cont && !g_cont) {
    throw InvalidArgument("effective control needs at least one control field");
  }
  const ControlField& ref = v_cont ? *v_cont : *g_cont;
  if (v_cont && g_cont && !v_cont->same_grids(*g_cont)) {
    throw GridMismatch("potential and nonlinearity controls use different grids");
  }
  if (g_cont) {
    if (!trajectory) {
      throw InvalidArgument("a nonlinearity spectrum needs the trajectory of the same run");
    }
    if (!(trajectory->space() == ref.space()) || !(trajectory->time() == ref.time())) {
      throw GridMismatch("trajectory and control grids differ");
    }
  }
  return ref.space();
}

// e(x_j, t_k) = V + g |psi|^2, with absent terms contributing +0.0.
ControlField effective_control(const ControlField* v_cont, const ControlField* g_cont, const Trajectory* trajectory) {
  const SpatialGrid& space = check_inputs(v_cont, g_cont, trajectory);
  const ControlField& ref = v_cont ? *v_cont : *g_cont;
  ControlField out(space, ref.time(), ref.kind());
  for (std::size_t k = 0; k < ref.time().nodes(); ++k) {
    const auto psi = g_cont ? trajectory->snapshot(k) : std::span<const Complex>{};
    for (std::size_t j = 0; j < space.size(); ++j) {
      const double v = v_cont ? (*v_cont)(j, k) : 0.0;
      const double g = g_cont ? (*g_cont)(j, k) * std::norm(psi[j]) : 0.0;
      out(j, k) = v + g;
    }
  }
  return out;
}

std::vector<Complex> integrate_and_transform(const ControlField& effective) {
  const TimeGrid& time = effective.time();
  std::vector<double> series(time.nodes());
  const double dx = effective.space().dx();
  for (std::size_t k = 0; k < time.nodes(); ++k) {
    double sum = 0.0;
    for (double v : effective.slice(k)) sum += v;
    series[k] = sum * dx;
  }
  return dft_time(std::span<const double>(series), time);
}

PowerSpectrum power_of(const std::vector<Complex>& transform, const TimeGrid& time, SpectrumKind kind) {
  PowerSpectrum out;
  out.kind = kind;
  out.omega = angular_frequencies(time);
  out.power.resize(transform.size());
  std::transform(transform.begin(), transform.end(), out.power.begin(), [](Complex z) { return std::norm(z); });
  return out;
}

}  // namespace

std::vector<Complex> effective_transform(const ControlField* v_cont, const ControlField* g_cont,
                                         const Trajectory* trajectory) {
  return integrate_and_transform(effective_control(v_cont, g_cont, trajectory));
}

PowerSpectrum spectrum_V(const ControlField& v_cont) {
  return power_of(effective_transform(&v_cont, nullptr, nullptr), v_cont.time(), SpectrumKind::potential);
}

PowerSpectrum spectrum_g(const ControlField& g_cont, const Trajectory& trajectory) {
  return power_of(effective_transform(nullptr, &g_cont, &trajectory), g_cont.time(), SpectrumKind::nonlinearity);
}

PowerSpectrum spectrum_dual(const ControlField& v_cont, const ControlField& g_cont, const Trajectory& trajectory) {
  return power_of(effective_transform(&v_cont, &g_cont, &trajectory), v_cont.time(), SpectrumKind::combined);
}

double dual_dominance_ratio(const PowerSpectrum& combined, const PowerSpectrum& potential) {
  if (combined.power.size() != potential.power.size()) {
    throw GridMismatch("spectra have different lengths");
  }
  double diff = 0.0;
  double total = 0.0;
  for (std::size_t n = 0; n < combined.power.size(); ++n) {
    diff += std::abs(combined.power[n] - potential.power[n]);
    total += std::abs(combined.power[n]);
  }
  return total > 0.0 ? diff / total : 0.0;
}

std::vector<Complex> transform_2d(const ControlField& field) {
  const std::size_t n_x = field.space().size();
  const std::size_t steps = field.time().steps();
  std::vector<Complex> data(steps * n_x);
  for (std::size_t k = 0; k < steps; ++k) {
    const auto row = field.slice(k);
    std::copy(row.begin(), row.end(), data.begin() + static_cast<std::ptrdiff_t>(k * n_x));
  }
  fft2d_forward(data, steps, n_x);
  const double weight = field.space().dx() * field.time().dt();
  std::vector<Complex> out(n_x * steps);
  for (std::size_t n = 0; n < steps; ++n) {
    for (std::size_t m = 0; m < n_x; ++m) {
      out[m * steps + n] = data[n * n_x + m] * weight;
    }
  }
  return out;
}

Spectrum2D spectrum_2d(const ControlField& control, const Trajectory* trajectory) {
  const ControlField effective = control.kind() == ControlKind::nonlinearity
                                     ? effective_control(nullptr, &control, trajectory)
                                     : effective_control(&control, nullptr, nullptr);
  const std::vector<Complex> transform = transform_2d(effective);
  Spectrum2D out;
  out.wavenumber.resize(control.space().size());
  for (std::size_t m = 0; m < out.wavenumber.size(); ++m) {
    out.wavenumber[m] = static_cast<double>(m) / control.space().length();
  }
  out.omega = angular_frequencies(control.time());
  out.power.resize(transform.size());
  std::transform(transform.begin(), transform.end(), out.power.begin(), [](Complex z) { return std::norm(z); });
  return out;
}

PopulationTrace population_trace(const Trajectory& trajectory, const std::vector<CoherentMode>& modes) {
  PopulationTrace out;
  const TimeGrid& time = trajectory.time();
  for (std::size_t k = 0; k < time.nodes(); ++k) out.times.push_back(time.t(k));
  for (const CoherentMode& mode : modes) {
    if (!(mode.field.grid() == trajectory.space())) {
      throw GridMismatch("mode " + std::to_string(mode.index) + " is not on the trajectory grid");
    }
    if (mode.g0 != modes.front().g0) {
      throw InvalidArgument("population trace modes belong to different g0 families");
    }
    out.mode_indices.push_back(mode.index);
    std::vector<double> row(time.nodes());
    for (std::size_t k = 0; k < time.nodes(); ++k) {
      row[k] = std::norm(inner_product(mode.field, trajectory.field(k)));
    }
    out.populations.push_back(std::move(row));
  }
  return out;
}

OverlapProfile target_overlap_profile(const CoherentMode& initial, const CoherentMode& target) {
  const SpatialGrid& grid = initial.field.grid();
  if (!(target.field.grid() == grid)) {
    throw GridMismatch("overlap profile modes are on different grids");
  }
  if (initial.g0 != target.g0) {
    throw InvalidArgument("overlap profile modes belong to different g0 families");
  }
  const std::size_t n = grid.size();
  OverlapProfile out;
  std::vector<Complex> product(n);
  for (std::size_t j = 0; j < n; ++j) {
    product[j] = std::conj(target.field[j]) * initial.field[j];
    out.x.push_back(grid.x(j));
    out.magnitude.push_back(std::abs(product[j]));
    out.wavenumber.push_back(static_cast<double>(j) / grid.length());
  }
  Fft1D(n).forward(product);
  double peak = 0.0;
  for (const Complex& z : product) {
    out.power.push_back(std::norm(z * grid.dx()));
    peak = std::max(peak, out.power.back());
  }
  if (peak > 0.0) {
    for (double& p : out.power) p /= peak;
  }
  return out;
}

}  // namespace gpec

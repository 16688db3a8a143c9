#include "gpec/propagator.hpp"

#include <algorithm>
#include <cmath>

#include "gpec/error.hpp"

namespace gpec {

namespace {

constexpr double kNormTolerance = 1e-8;

void require_normalized(const WaveField& psi) {
  const double drift = std::abs(norm_squared(psi) - 1.0);
  if (!(drift < kNormTolerance)) {
    throw InvalidArgument("initial wave field is not normalized (| ||psi||^2 - 1 | = " +
                          std::to_string(drift) + ")");
  }
}

bool finite(std::span<const Complex> psi) {
  double sum = 0.0;
  for (const Complex& z : psi) {
    sum += std::norm(z);
  }
  return std::isfinite(sum);
}

}  // namespace

Hamiltonian1D::Hamiltonian1D(PhysicalConstants constants, SpatialGrid space, TimeGrid time, double g0)
    : Hamiltonian1D(constants, g0, ControlField(space, time, ControlKind::potential),
                    ControlField(space, time, ControlKind::nonlinearity)) {}

Hamiltonian1D::Hamiltonian1D(PhysicalConstants constants, double g0, ControlField v_cont, ControlField g_cont)
    : constants_(constants), g0_(g0), v_cont_(std::move(v_cont)), g_cont_(std::move(g_cont)) {
  constants_.validate();
  if (!std::isfinite(g0_)) {
    throw InvalidArgument("g0 must be finite");
  }
  if (!v_cont_.same_grids(g_cont_)) {
    throw GridMismatch("potential and nonlinearity controls live on different grids");
  }
  if (v_cont_.kind() != ControlKind::potential || g_cont_.kind() != ControlKind::nonlinearity) {
    throw InvalidArgument("Hamiltonian1D expects a potential control and a nonlinearity control");
  }
  if (!v_cont_.all_finite() || !g_cont_.all_finite()) {
    throw InvalidArgument("control fields must be finite");
  }
  const SpatialGrid& grid = v_cont_.space();
  trap_.resize(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    trap_[j] = trap_potential(constants_, grid, j);
  }
}

Trajectory::Trajectory(SpatialGrid space, TimeGrid time)
    : space_(space), time_(time), data_(space.size() * time.nodes()) {}

WaveField Trajectory::field(std::size_t k) const {
  const auto s = snapshot(k);
  return WaveField(space_, std::vector<Complex>(s.begin(), s.end()));
}

double Trajectory::max_norm_drift() const {
  double worst = 0.0;
  for (std::size_t k = 0; k < nodes(); ++k) {
    double sum = 0.0;
    for (const Complex& z : snapshot(k)) {
      sum += std::norm(z);
    }
    worst = std::max(worst, std::abs(sum * space_.dx() - 1.0));
  }
  return worst;
}

SplitStepPropagator::SplitStepPropagator(const Hamiltonian1D& hamiltonian)
    : hamiltonian_(&hamiltonian), fft_(hamiltonian.space().size()) {
  const PhysicalConstants& c = hamiltonian.constants();
  const double dt = hamiltonian.time().dt();
  const std::vector<double> k = angular_wavenumbers(hamiltonian.space());
  kinetic_phase_.resize(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) {
    kinetic_phase_[i] = std::polar(1.0, -c.hbar * k[i] * k[i] * dt / (2.0 * c.mass));
  }
}

void SplitStepPropagator::kinetic(std::span<Complex> psi) const {
  fft_.forward(psi);
  for (std::size_t i = 0; i < psi.size(); ++i) {
    psi[i] *= kinetic_phase_[i];
  }
  fft_.inverse(psi);
}

void SplitStepPropagator::step(std::span<Complex> psi, std::size_t k) const {
  const Hamiltonian1D& h = *hamiltonian_;
  const std::size_t next = k + 1;
  const double half = 0.5 * h.time().dt() / h.constants().hbar;
  for (std::size_t j = 0; j < psi.size(); ++j) {
    const double theta = (h.potential(j, next) + h.nonlinearity(j, next) * std::norm(psi[j])) * half;
    psi[j] *= std::polar(1.0, -theta);
  }
  kinetic(psi);
  for (std::size_t j = 0; j < psi.size(); ++j) {
    const double theta = (h.potential(j, next) + h.nonlinearity(j, next) * std::norm(psi[j])) * half;
    psi[j] *= std::polar(1.0, -theta);
  }
}

WaveField apply_kinetic(const WaveField& psi, const PhysicalConstants& constants, double dt) {
  constants.validate();
  const std::vector<double> k = angular_wavenumbers(psi.grid());
  WaveField out = psi;
  Fft1D fft(psi.size());
  fft.forward(out.values());
  for (std::size_t i = 0; i < k.size(); ++i) {
    out[i] *= std::polar(1.0, -constants.hbar * k[i] * k[i] * dt / (2.0 * constants.mass));
  }
  fft.inverse(out.values());
  return out;
}

WaveField step_forward(const WaveField& psi_k, const Hamiltonian1D& hamiltonian, std::size_t k) {
  if (!(psi_k.grid() == hamiltonian.space())) {
    throw GridMismatch("step_forward: wave field and Hamiltonian grids differ");
  }
  if (k >= hamiltonian.time().steps()) {
    throw InvalidArgument("step_forward: step index beyond the time grid");
  }
  SplitStepPropagator stepper(hamiltonian);
  WaveField out = psi_k;
  stepper.step(out.values(), k);
  if (!finite(out.values())) {
    throw NumericalInstability("split-step produced non-finite values; dt too large for the nonlinearity", k);
  }
  return out;
}

WaveField propagate(const WaveField& psi_0, const Hamiltonian1D& hamiltonian) {
  if (!(psi_0.grid() == hamiltonian.space())) {
    throw GridMismatch("propagate: wave field and Hamiltonian grids differ");
  }
  require_normalized(psi_0);
  SplitStepPropagator stepper(hamiltonian);
  WaveField psi = psi_0;
  for (std::size_t k = 0; k < hamiltonian.time().steps(); ++k) {
    stepper.step(psi.values(), k);
    if (!finite(psi.values())) {
      throw NumericalInstability("split-step produced non-finite values; dt too large for the nonlinearity", k);
    }
  }
  return psi;
}

Trajectory propagate_recorded(const WaveField& psi_0, const Hamiltonian1D& hamiltonian) {
  if (!(psi_0.grid() == hamiltonian.space())) {
    throw GridMismatch("propagate: wave field and Hamiltonian grids differ");
  }
  require_normalized(psi_0);
  SplitStepPropagator stepper(hamiltonian);
  Trajectory trajectory(hamiltonian.space(), hamiltonian.time());
  std::ranges::copy(psi_0.values(), trajectory.snapshot(0).begin());
  for (std::size_t k = 0; k < hamiltonian.time().steps(); ++k) {
    auto next = trajectory.snapshot(k + 1);
    std::ranges::copy(trajectory.snapshot(k), next.begin());
    stepper.step(next, k);
    if (!finite(next)) {
      throw NumericalInstability("split-step produced non-finite values; dt too large for the nonlinearity", k);
    }
  }
  return trajectory;
}

}  // namespace gpec

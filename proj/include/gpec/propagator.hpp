#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gpec/field.hpp"
#include "gpec/fourier.hpp"
#include "gpec/grid.hpp"

namespace gpec {

/// Controlled 1-D GP Hamiltonian
///   H = p^2/2m + V_trap(x) + V_cont(x,t) + [g0 + g_cont(x,t)] |psi|^2
/// with the harmonic trap centered at L/2.
class Hamiltonian1D {
 public:
  /// Control-free Hamiltonian (both controls identically zero).
  Hamiltonian1D(PhysicalConstants constants, SpatialGrid space, TimeGrid time, double g0);
  Hamiltonian1D(PhysicalConstants constants, double g0, ControlField v_cont, ControlField g_cont);

  const PhysicalConstants& constants() const noexcept { return constants_; }
  const SpatialGrid& space() const noexcept { return v_cont_.space(); }
  const TimeGrid& time() const noexcept { return v_cont_.time(); }
  double g0() const noexcept { return g0_; }
  std::span<const double> trap() const noexcept { return trap_; }
  const ControlField& v_cont() const noexcept { return v_cont_; }
  const ControlField& g_cont() const noexcept { return g_cont_; }

  /// Total potential V_trap + V_cont at (x_j, t_k).
  double potential(std::size_t j, std::size_t k) const noexcept { return trap_[j] + v_cont_(j, k); }
  /// Total nonlinearity g0 + g_cont at (x_j, t_k).
  double nonlinearity(std::size_t j, std::size_t k) const noexcept { return g0_ + g_cont_(j, k); }

 private:
  PhysicalConstants constants_;
  double g0_;
  std::vector<double> trap_;
  ControlField v_cont_;
  ControlField g_cont_;
};

/// psi(t_k) for k = 0..steps, stored densely (steps + 1) x N.
class Trajectory {
 public:
  Trajectory(SpatialGrid space, TimeGrid time);

  const SpatialGrid& space() const noexcept { return space_; }
  const TimeGrid& time() const noexcept { return time_; }
  std::size_t nodes() const noexcept { return time_.nodes(); }
  std::span<const Complex> snapshot(std::size_t k) const noexcept {
    return std::span<const Complex>(data_).subspan(k * space_.size(), space_.size());
  }
  std::span<Complex> snapshot(std::size_t k) noexcept {
    return std::span<Complex>(data_).subspan(k * space_.size(), space_.size());
  }
  WaveField field(std::size_t k) const;
  WaveField final_field() const { return field(time_.steps()); }
  std::span<const Complex> data() const noexcept { return data_; }

  /// max_k | ||psi(t_k)||^2 - 1 |.
  double max_norm_drift() const;

 private:
  SpatialGrid space_;
  TimeGrid time_;
  std::vector<Complex> data_;
};

/// Second-order symmetric split-step integrator for one Hamiltonian.
///
/// One step t_k -> t_{k+1}:
///   psi' = exp(-i [V + g |psi_k|^2] dt / 2hbar) psi_k
///   psi''= exp(-i H0 dt / hbar) psi'          (momentum space)
///   psi_{k+1} = exp(-i [V + g |psi''|^2] dt / 2hbar) psi''
/// with V and g taken at t_{k+1} in both potential factors. Since the last
/// factor is a pure phase, |psi''| = |psi_{k+1}|.
///
/// Holds a reference to the Hamiltonian, which must outlive it.
class SplitStepPropagator {
 public:
  explicit SplitStepPropagator(const Hamiltonian1D& hamiltonian);

  const Hamiltonian1D& hamiltonian() const noexcept { return *hamiltonian_; }
  /// Advances psi from t_k to t_{k+1} in place.
  void step(std::span<Complex> psi, std::size_t k) const;
  /// Applies exp(-i H0 dt / hbar) in momentum space, in place.
  void kinetic(std::span<Complex> psi) const;

 private:
  const Hamiltonian1D* hamiltonian_;
  Fft1D fft_;
  std::vector<Complex> kinetic_phase_;
};

/// exp(-i H0 dt / hbar) psi with H0 = hbar^2 k^2 / 2m applied on the FFT grid.
WaveField apply_kinetic(const WaveField& psi, const PhysicalConstants& constants, double dt);

/// One split step from node k to node k + 1. Throws NumericalInstability on
/// non-finite output.
WaveField step_forward(const WaveField& psi_k, const Hamiltonian1D& hamiltonian, std::size_t k);

/// psi(T) from psi(0). psi_0 must be normalized.
WaveField propagate(const WaveField& psi_0, const Hamiltonian1D& hamiltonian);

/// All snapshots psi(t_0)..psi(t_steps). psi_0 must be normalized.
Trajectory propagate_recorded(const WaveField& psi_0, const Hamiltonian1D& hamiltonian);

}  // namespace gpec

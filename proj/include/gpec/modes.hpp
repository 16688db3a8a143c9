#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <numbers>
#include <vector>

#include "gpec/field.hpp"
#include "gpec/grid.hpp"

namespace gpec {

/// Stationary solution phi_j of H_nl[phi] phi = E phi.
struct CoherentMode {
  int index = 0;
  double g0 = 0.0;
  WaveField field;
  double energy = 0.0;
  /// ||H_nl[phi] phi - E phi|| at convergence.
  double residual = 0.0;
  std::size_t iterations = 0;
};

/// Spectrum of a real symmetric matrix: ascending eigenvalues and the
/// matching eigenvectors as columns with M^T M = I (Euclidean).
struct EigenDecomposition {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
};

struct SaitpConfig {
  double dt_imag = std::numbers::pi / 50.0;
  /// Stop once ||psi_new - psi_old||^2 < epsilon ...
  double epsilon = 1e-10;
  /// ... and the mode residual ||H_nl[psi] psi - E psi|| < residual_tol.
  double residual_tol = 1e-6;
  std::size_t max_iters = 50000;

  void validate() const;
};

/// Outcome of one S-AITP search, converged or not.
struct SaitpReport {
  CoherentMode mode;  ///< the converged mode, or the last iterate
  bool converged = false;
  /// ||psi_new - psi_old||^2 after every iteration.
  std::vector<double> defect_history;
};

/// Dense N x N matrix of H0 + V_trap + g0 |psi|^2.
///
/// The kinetic part is -(hbar^2 / 2m) times the fourth-order central
/// difference Laplacian (-1, 16, -30, 16, -1) / 12 dx^2 with periodic wrap.
Eigen::MatrixXd build_hamiltonian_matrix(const WaveField& psi, double g0, const PhysicalConstants& constants);

/// Symmetric eigendecomposition (LAPACK dsyevd).
EigenDecomposition diagonalize(const Eigen::MatrixXd& symmetric);

/// H_nl[phi] phi using the same stencil as build_hamiltonian_matrix, in O(N).
WaveField apply_nonlinear_hamiltonian(const WaveField& phi, double g0, const PhysicalConstants& constants);

/// E = <phi | H_nl[phi] | phi> with the fourth-order stencil.
double mode_energy(const WaveField& phi, double g0, const PhysicalConstants& constants);

/// ||H_nl[phi] phi - E phi|| with E = mode_energy(phi).
double mode_residual(const WaveField& phi, double g0, const PhysicalConstants& constants);

/// Normalized Hermite-Gaussian oscillator eigenstate j (j <= 10) centered at L/2.
WaveField harmonic_trial(int j, const SpatialGrid& grid, const PhysicalConstants& constants);

/// Spectrum-adapted imaginary time propagation for mode j.
///
/// Every iteration diagonalizes H_nl[psi] = M diag(lambda) M^T, replaces the j
/// smallest eigenvalues with the largest one so that eigenvector j is the
/// least damped, and sets psi <- normalize(M exp(-Lambda~ dt) M^T psi). Does
/// not throw on non-convergence; see SaitpReport::converged.
SaitpReport saitp_search(int j, double g0, const WaveField& trial, const PhysicalConstants& constants,
                         const SaitpConfig& config = {});

/// saitp_search that throws NonConvergence (with the last defect) when the
/// iteration cap is hit.
CoherentMode saitp_find_mode(int j, double g0, const WaveField& trial, const PhysicalConstants& constants,
                             const SaitpConfig& config = {});

/// d(phi) = 1 - |<phi | psi(T)>|^2 where psi is the control-free real-time
/// evolution of phi over `steps` split steps.
double stability_distance(const CoherentMode& mode, const PhysicalConstants& constants, double duration = 10.0,
                          std::size_t steps = 500);

/// a_{j,k} = <phi_j | phi_k>. Both modes must belong to the same g0 family.
Complex overlap_coefficient(const CoherentMode& a, const CoherentMode& b);

}  // namespace gpec

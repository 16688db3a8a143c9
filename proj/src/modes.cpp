#include "gpec/modes.hpp"

#include <lapacke.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>

#include "gpec/error.hpp"
#include "gpec/propagator.hpp"

namespace gpec {

void SaitpConfig::validate() const {
  if (!(dt_imag > 0.0 && std::isfinite(dt_imag))) {
    throw InvalidArgument("S-AITP imaginary time step must be positive");
  }
  if (!(epsilon > 0.0) || !(residual_tol > 0.0)) {
    throw InvalidArgument("S-AITP convergence thresholds must be positive");
  }
  if (max_iters == 0) {
    throw InvalidArgument("S-AITP iteration cap must be positive");
  }
}

namespace {

double kinetic_coefficient(const SpatialGrid& grid, const PhysicalConstants& c) {
  return c.hbar * c.hbar / (24.0 * c.mass * grid.dx() * grid.dx());
}

// Rotates the global phase so the leftmost entry of (numerically) largest
// magnitude is real and positive.
void fix_phase(WaveField& psi) {
  double largest = 0.0;
  for (const Complex& z : psi.values()) {
    largest = std::max(largest, std::abs(z));
  }
  for (std::size_t j = 0; j < psi.size(); ++j) {
    if (std::abs(psi[j]) >= largest * (1.0 - 1e-8)) {
      const Complex rotation = std::conj(psi[j]) / std::abs(psi[j]);
      for (Complex& z : psi.values()) {
        z *= rotation;
      }
      psi[j] = std::abs(psi[j]);
      return;
    }
  }
}

}  // namespace

Eigen::MatrixXd build_hamiltonian_matrix(const WaveField& psi, double g0, const PhysicalConstants& constants) {
  const SpatialGrid& grid = psi.grid();
  const auto n = static_cast<Eigen::Index>(grid.size());
  const double kappa = kinetic_coefficient(grid, constants);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto uj = static_cast<std::size_t>(j);
    h(j, j) = 30.0 * kappa + trap_potential(constants, grid, uj) + g0 * std::norm(psi[uj]);
    const Eigen::Index p1 = (j + 1) % n;
    const Eigen::Index p2 = (j + 2) % n;
    h(j, p1) = h(p1, j) = -16.0 * kappa;
    h(j, p2) = h(p2, j) = kappa;
  }
  return h;
}

namespace {

std::atomic<bool> lapack_trusted{true};

// Spot check of A v = lambda v on a few columns. Some optimized BLAS kernels
// return wrong eigenvectors on hosts they misdetect; the result is then off by
// orders of magnitude, far above this threshold.
bool plausible(const Eigen::MatrixXd& a, const EigenDecomposition& eig) {
  const Eigen::Index n = a.rows();
  const double scale = std::max(1.0, eig.eigenvalues.cwiseAbs().maxCoeff());
  for (const Eigen::Index col : {Eigen::Index{0}, n / 2, n - 1}) {
    const Eigen::VectorXd v = eig.eigenvectors.col(col);
    const double residual = (a * v - eig.eigenvalues(col) * v).norm();
    if (!(residual < 1e-8 * scale * static_cast<double>(n)) || !(std::abs(v.norm() - 1.0) < 1e-8)) {
      return false;
    }
  }
  return true;
}

EigenDecomposition diagonalize_eigen(const Eigen::MatrixXd& symmetric) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric);
  if (solver.info() != Eigen::Success) {
    throw Error("symmetric eigensolver failed");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

}  // namespace

EigenDecomposition diagonalize(const Eigen::MatrixXd& symmetric) {
  if (symmetric.rows() != symmetric.cols() || symmetric.rows() == 0) {
    throw InvalidArgument("diagonalize: matrix must be square and non-empty");
  }
  if (!lapack_trusted.load(std::memory_order_relaxed)) {
    return diagonalize_eigen(symmetric);
  }
  const auto n = static_cast<lapack_int>(symmetric.rows());
  EigenDecomposition out{Eigen::VectorXd(n), symmetric};
  const lapack_int info =
      LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, out.eigenvectors.data(), n, out.eigenvalues.data());
  if (info != 0 || !plausible(symmetric, out)) {
    if (lapack_trusted.exchange(false)) {
      std::fprintf(stderr,
                   "gpec: LAPACK dsyevd returned an inaccurate decomposition; using the built-in solver "
                   "(check OPENBLAS_CORETYPE)\n");
    }
    return diagonalize_eigen(symmetric);
  }
  return out;
}

WaveField apply_nonlinear_hamiltonian(const WaveField& phi, double g0, const PhysicalConstants& constants) {
  const SpatialGrid& grid = phi.grid();
  const std::size_t n = grid.size();
  const double kappa = kinetic_coefficient(grid, constants);
  WaveField out(grid);
  for (std::size_t j = 0; j < n; ++j) {
    const Complex stencil = 30.0 * phi[j] - 16.0 * (phi[(j + 1) % n] + phi[(j + n - 1) % n]) +
                            (phi[(j + 2) % n] + phi[(j + n - 2) % n]);
    out[j] = kappa * stencil + (trap_potential(constants, grid, j) + g0 * std::norm(phi[j])) * phi[j];
  }
  return out;
}

double mode_energy(const WaveField& phi, double g0, const PhysicalConstants& constants) {
  return inner_product(phi, apply_nonlinear_hamiltonian(phi, g0, constants)).real();
}

double mode_residual(const WaveField& phi, double g0, const PhysicalConstants& constants) {
  WaveField r = apply_nonlinear_hamiltonian(phi, g0, constants);
  const double energy = inner_product(phi, r).real();
  for (std::size_t j = 0; j < r.size(); ++j) {
    r[j] -= energy * phi[j];
  }
  return norm(r);
}

WaveField harmonic_trial(int j, const SpatialGrid& grid, const PhysicalConstants& constants) {
  constants.validate();
  if (j < 0 || j > 10) {
    throw InvalidArgument("harmonic_trial: index must be in 0..10");
  }
  const double scale = std::sqrt(constants.mass * constants.omega / constants.hbar);
  WaveField out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double xi = (grid.x(i) - grid.center()) * scale;
    // Normalized Hermite functions by the stable three-term recurrence.
    double previous = 0.0;
    double current = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * xi * xi);
    for (int n = 0; n < j; ++n) {
      const double next = std::sqrt(2.0 / (n + 1)) * xi * current - std::sqrt(static_cast<double>(n) / (n + 1)) * previous;
      previous = current;
      current = next;
    }
    out[i] = current;
  }
  return normalize(out);
}

SaitpReport saitp_search(int j, double g0, const WaveField& trial, const PhysicalConstants& constants,
                         const SaitpConfig& config) {
  constants.validate();
  config.validate();
  const SpatialGrid& grid = trial.grid();
  const auto n = static_cast<Eigen::Index>(grid.size());
  if (j < 0 || j >= n) {
    throw InvalidArgument("saitp: mode index out of range for the grid");
  }

  WaveField psi = normalize(trial);
  Eigen::VectorXd re(n);
  Eigen::VectorXd im(n);
  SaitpReport report{CoherentMode{j, g0, psi, 0.0, 0.0, 0}, false, {}};

  for (std::size_t iter = 1; iter <= config.max_iters; ++iter) {
    const EigenDecomposition eig = diagonalize(build_hamiltonian_matrix(psi, g0, constants));
    const double largest = eig.eigenvalues(n - 1);
    const double reference = eig.eigenvalues(j);
    Eigen::VectorXd damping(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double adapted = i < j ? largest : eig.eigenvalues(i);
      damping(i) = std::exp(-(adapted - reference) * config.dt_imag);
    }

    for (Eigen::Index i = 0; i < n; ++i) {
      re(i) = psi[static_cast<std::size_t>(i)].real();
      im(i) = psi[static_cast<std::size_t>(i)].imag();
    }
    const Eigen::VectorXd new_re = eig.eigenvectors * damping.cwiseProduct(eig.eigenvectors.transpose() * re);
    const Eigen::VectorXd new_im = eig.eigenvectors * damping.cwiseProduct(eig.eigenvectors.transpose() * im);
    WaveField next(grid);
    for (Eigen::Index i = 0; i < n; ++i) {
      next[static_cast<std::size_t>(i)] = Complex(new_re(i), new_im(i));
    }
    next = normalize(next);

    double defect = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i) {
      defect += std::norm(next[i] - psi[i]);
    }
    defect *= grid.dx();
    report.defect_history.push_back(defect);
    psi = std::move(next);
    report.mode.iterations = iter;

    if (defect < config.epsilon && mode_residual(psi, g0, constants) < config.residual_tol) {
      report.converged = true;
      break;
    }
  }

  fix_phase(psi);
  report.mode.energy = mode_energy(psi, g0, constants);
  report.mode.residual = mode_residual(psi, g0, constants);
  report.mode.field = std::move(psi);
  return report;
}

CoherentMode saitp_find_mode(int j, double g0, const WaveField& trial, const PhysicalConstants& constants,
                             const SaitpConfig& config) {
  SaitpReport report = saitp_search(j, g0, trial, constants, config);
  if (!report.converged) {
    const double last = report.defect_history.empty() ? 0.0 : report.defect_history.back();
    throw NonConvergence("S-AITP did not converge for mode " + std::to_string(j) + " at g0 = " +
                             std::to_string(g0) + " within " + std::to_string(config.max_iters) +
                             " iterations (last defect " + std::to_string(last) + ", residual " +
                             std::to_string(report.mode.residual) + ")",
                         last);
  }
  return std::move(report.mode);
}

double stability_distance(const CoherentMode& mode, const PhysicalConstants& constants, double duration,
                          std::size_t steps) {
  const Hamiltonian1D h(constants, mode.field.grid(), TimeGrid(duration, steps), mode.g0);
  const WaveField evolved = propagate(mode.field, h);
  return 1.0 - std::norm(inner_product(mode.field, evolved));
}

Complex overlap_coefficient(const CoherentMode& a, const CoherentMode& b) {
  if (a.g0 != b.g0) {
    throw InvalidArgument("overlap_coefficient: modes belong to different g0 families");
  }
  return inner_product(a.field, b.field);
}

}  // namespace gpec

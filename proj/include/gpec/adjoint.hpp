#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gpec/field.hpp"
#include "gpec/fourier.hpp"
#include "gpec/propagator.hpp"

namespace gpec {

/// Row-major complex 2x2 matrix [[a, b], [c, d]].
struct Mat2 {
  Complex a, b, c, d;

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  /// (p, q) -> (a p + b q, c p + d q).
  void apply(Complex& p, Complex& q) const noexcept {
    const Complex np = a * p + b * q;
    const Complex nq = c * p + d * q;
    p = np;
    q = nq;
  }
};

Mat2 operator*(const Mat2& x, const Mat2& y) noexcept;

/// Adjoint supervector [p, p*] at one time node. The second component is
/// carried separately and only tracks conj(p) up to round-off.
struct AdjointPair {
  SpatialGrid grid;
  std::vector<Complex> p;
  std::vector<Complex> p_conj;

  /// ||p_conj - conj(p)|| / ||p||; zero for a zero pair.
  double consistency_defect() const;
  /// sqrt(||p||^2 + ||p_conj||^2) under the Riemann inner product.
  double supervector_norm() const;
};

/// How the backward sweep treats the potential/nonlinear half-steps.
enum class AdjointScheme {
  /// Transpose of the linearized forward split step. The gradient is then the
  /// exact derivative of the discrete objective.
  exact_discrete,
  /// exp(i L1 dt / 2hbar) with L1 frozen at the later time node t_{k+1}
  /// (coefficients and psi(t_{k+1})). Agrees with the exact scheme to
  /// second order per half-step.
  frozen_exponential,
};

const char* to_string(AdjointScheme scheme) noexcept;

/// Coupling block of the non-normal adjoint operator at one point:
///   [[ V + 2 g |psi|^2,      g psi^2        ],
///    [ -g conj(psi)^2,   -(V + 2 g |psi|^2) ]]
Mat2 build_L1(double v_total, double g_total, Complex psi) noexcept;
std::vector<Mat2> build_L1(std::span<const double> v_total, std::span<const double> g_total,
                           std::span<const Complex> psi);

/// exp(i L1 dt / (2 hbar)) for a traceless L1 (d = -a).
///
/// Since L1^2 = lambda^2 I with lambda^2 = a^2 + b c, the exponential is
/// cos(z) I + i (sin(z)/z) (dt/2hbar) L1 with z = lambda dt / 2hbar. lambda may
/// be imaginary (|g psi^2| > |V + 2g|psi|^2|), in which case the
/// trigonometric functions become hyperbolic. For |z| < 1e-6 sin(z)/z and
/// cos(z) use their two-term Taylor expansions.
Mat2 exp_L1_half(const Mat2& l1, double dt, double hbar = 1.0) noexcept;
std::vector<Mat2> exp_L1_half(std::span<const Mat2> l1, double dt, double hbar = 1.0);

/// p(x, T) = (i / hbar) phi_f(x) <phi_f | psi(T)>, p_conj = conj(p).
///
/// The sign makes 2 Re[p* psi] the derivative of |<phi_f|psi(T)>|^2 with
/// respect to V_cont for the backward equation i hbar dp/dt = (H + g|psi|^2) p
/// + g psi^2 p*.
AdjointPair terminal_condition(const WaveField& phi_f, const WaveField& psi_T, const PhysicalConstants& constants);

/// Backward split-step integrator for the adjoint supervector of one forward run.
/// Holds references to the Hamiltonian and trajectory, which must outlive it.
class AdjointPropagator {
 public:
  AdjointPropagator(const Hamiltonian1D& hamiltonian, const Trajectory& trajectory,
                    AdjointScheme scheme = AdjointScheme::exact_discrete);

  /// Maps (p, p_conj) at t_{k+1} to t_k in place.
  void step(std::span<Complex> p, std::span<Complex> p_conj, std::size_t k) const;
  AdjointScheme scheme() const noexcept { return scheme_; }

 private:
  Mat2 half_step_matrix(std::size_t j, std::size_t k, bool late) const;

  const Hamiltonian1D* hamiltonian_;
  const Trajectory* trajectory_;
  AdjointScheme scheme_;
  Fft1D fft_;
  std::vector<Complex> kinetic_phase_;  // exp(+i hbar k^2 dt / 2m)
};

/// p(t_k) from p(t_{k+1}). `trajectory` must be the recorded forward run of
/// `hamiltonian`.
AdjointPair step_backward(const AdjointPair& pair_next, const Hamiltonian1D& hamiltonian,
                          const Trajectory& trajectory, std::size_t k,
                          AdjointScheme scheme = AdjointScheme::exact_discrete);

/// Adjoint supervector at every time node of one forward run.
class AdjointSweep {
 public:
  AdjointSweep(SpatialGrid space, TimeGrid time, std::uint64_t trajectory_tag);

  const SpatialGrid& space() const noexcept { return space_; }
  const TimeGrid& time() const noexcept { return time_; }
  std::uint64_t trajectory_tag() const noexcept { return tag_; }
  std::span<const Complex> p(std::size_t k) const noexcept {
    return std::span<const Complex>(p_).subspan(k * space_.size(), space_.size());
  }
  std::span<Complex> p(std::size_t k) noexcept {
    return std::span<Complex>(p_).subspan(k * space_.size(), space_.size());
  }
  std::span<const Complex> p_conj(std::size_t k) const noexcept {
    return std::span<const Complex>(p_conj_).subspan(k * space_.size(), space_.size());
  }
  std::span<Complex> p_conj(std::size_t k) noexcept {
    return std::span<Complex>(p_conj_).subspan(k * space_.size(), space_.size());
  }
  AdjointPair pair(std::size_t k) const;
  /// Largest consistency defect over all nodes.
  double max_consistency_defect() const;

 private:
  SpatialGrid space_;
  TimeGrid time_;
  std::uint64_t tag_;
  std::vector<Complex> p_;
  std::vector<Complex> p_conj_;
};

/// Identifies a trajectory so that gradients are only assembled from an
/// adjoint sweep of the same forward run.
std::uint64_t trajectory_tag(const Trajectory& trajectory);

/// Terminal condition at T followed by steps backward to t = 0.
AdjointSweep adjoint_sweep(const Trajectory& trajectory, const Hamiltonian1D& hamiltonian, const WaveField& phi_f,
                           AdjointScheme scheme = AdjointScheme::exact_discrete);

/// Functional gradients are real fields on the control grid; `kind()` names
/// the control they differentiate.
using GradientField = ControlField;

/// Pointwise sensitivity at each node: 2 Re[p* psi] (potential) or
/// 2 Re[p* |psi|^2 psi] (nonlinearity).
GradientField pointwise_sensitivity(const Trajectory& trajectory, const AdjointSweep& sweep, ControlKind target);

/// dP/dc at every node of the control grid, without quadrature weights.
///
/// The control at node k enters the forward step (t_{k-1}, t_k] only, through
/// both half-steps, so its sensitivity is the average of the pointwise
/// sensitivity at the ends of that interval. The control at node 0 does not
/// enter the dynamics and gets zero. With this convention
///   dP = sum_{j,k} gradient(j,k) dc(j,k) dx dt
/// holds exactly for the discrete forward scheme.
GradientField gradient(const Trajectory& trajectory, const AdjointSweep& sweep, ControlKind target);

}  // namespace gpec

#include "gpec/adjoint.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "gpec/error.hpp"

namespace gpec {

Mat2 operator*(const Mat2& x, const Mat2& y) noexcept {
  return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
}

double AdjointPair::consistency_defect() const {
  double diff = 0.0;
  double ref = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    diff += std::norm(p_conj[j] - std::conj(p[j]));
    ref += std::norm(p[j]);
  }
  return ref > 0.0 ? std::sqrt(diff / ref) : std::sqrt(diff);
}

double AdjointPair::supervector_norm() const {
  double sum = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    sum += std::norm(p[j]) + std::norm(p_conj[j]);
  }
  return std::sqrt(sum * grid.dx());
}

const char* to_string(AdjointScheme scheme) noexcept {
  return scheme == AdjointScheme::exact_discrete ? "exact" : "frozen";
}

Mat2 build_L1(double v_total, double g_total, Complex psi) noexcept {
  const double diagonal = v_total + 2.0 * g_total * std::norm(psi);
  const Complex psi2 = psi * psi;
  return {diagonal, g_total * psi2, -g_total * std::conj(psi2), -diagonal};
}

std::vector<Mat2> build_L1(std::span<const double> v_total, std::span<const double> g_total,
                           std::span<const Complex> psi) {
  if (v_total.size() != psi.size() || g_total.size() != psi.size()) {
    throw GridMismatch("build_L1: potential, nonlinearity and wave field lengths differ");
  }
  std::vector<Mat2> out(psi.size());
  for (std::size_t j = 0; j < psi.size(); ++j) {
    out[j] = build_L1(v_total[j], g_total[j], psi[j]);
  }
  return out;
}

Mat2 exp_L1_half(const Mat2& l1, double dt, double hbar) noexcept {
  const double tau = 0.5 * dt / hbar;
  const Complex z2 = (l1.a * l1.a + l1.b * l1.c) * (tau * tau);
  Complex cos_z;
  Complex sinc_z;
  if (std::abs(z2) < 1e-12) {
    cos_z = 1.0 - 0.5 * z2;
    sinc_z = 1.0 - z2 / 6.0;
  } else {
    const Complex z = std::sqrt(z2);
    cos_z = std::cos(z);
    sinc_z = std::sin(z) / z;
  }
  const Complex s = Complex(0.0, 1.0) * sinc_z * tau;
  return {cos_z + s * l1.a, s * l1.b, s * l1.c, cos_z + s * l1.d};
}

std::vector<Mat2> exp_L1_half(std::span<const Mat2> l1, double dt, double hbar) {
  std::vector<Mat2> out(l1.size());
  std::ranges::transform(l1, out.begin(), [&](const Mat2& m) { return exp_L1_half(m, dt, hbar); });
  return out;
}

AdjointPair terminal_condition(const WaveField& phi_f, const WaveField& psi_T, const PhysicalConstants& constants) {
  const Complex overlap = inner_product(phi_f, psi_T);
  const Complex scale = Complex(0.0, 1.0 / constants.hbar) * overlap;
  AdjointPair pair{phi_f.grid(), std::vector<Complex>(phi_f.size()), std::vector<Complex>(phi_f.size())};
  for (std::size_t j = 0; j < phi_f.size(); ++j) {
    pair.p[j] = scale * phi_f[j];
    pair.p_conj[j] = std::conj(pair.p[j]);
  }
  return pair;
}

AdjointPropagator::AdjointPropagator(const Hamiltonian1D& hamiltonian, const Trajectory& trajectory,
                                     AdjointScheme scheme)
    : hamiltonian_(&hamiltonian), trajectory_(&trajectory), scheme_(scheme), fft_(hamiltonian.space().size()) {
  if (!(trajectory.space() == hamiltonian.space()) || !(trajectory.time() == hamiltonian.time())) {
    throw GridMismatch("adjoint: trajectory and Hamiltonian grids differ");
  }
  const PhysicalConstants& c = hamiltonian.constants();
  const double dt = hamiltonian.time().dt();
  const std::vector<double> k = angular_wavenumbers(hamiltonian.space());
  kinetic_phase_.resize(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) {
    kinetic_phase_[i] = std::polar(1.0, c.hbar * k[i] * k[i] * dt / (2.0 * c.mass));
  }
}

// Backward map of one potential half-step of the forward step t_k -> t_{k+1}.
// `late` selects the second forward half-step (the one ending at t_{k+1}).
Mat2 AdjointPropagator::half_step_matrix(std::size_t j, std::size_t k, bool late) const {
  const Hamiltonian1D& h = *hamiltonian_;
  const std::size_t next = k + 1;
  const double v = h.potential(j, next);
  const double g = h.nonlinearity(j, next);
  const double dt = h.time().dt();
  const double hbar = h.constants().hbar;

  if (scheme_ == AdjointScheme::frozen_exponential) {
    return exp_L1_half(build_L1(v, g, trajectory_->snapshot(next)[j]), dt, hbar);
  }

  // Forward: psi_out = exp(-i theta) psi_in, theta = tau (v + g |psi_in|^2) / hbar.
  // Its linearization is d_out = a d_in + b conj(d_in) with
  //   a = e^{-i theta} (1 - i beta |psi_in|^2),  b = -i beta e^{-i theta} psi_in^2,
  // beta = g tau / hbar, and the adjoint maps p_out to p_in = conj(a) p_out - b conj(p_out).
  const double tau = 0.5 * dt;
  const double beta = g * tau / hbar;
  const Complex psi_node = late ? trajectory_->snapshot(next)[j] : trajectory_->snapshot(k)[j];
  const double density = std::norm(psi_node);
  const double theta = tau * (v + g * density) / hbar;
  const Complex phase = std::polar(1.0, theta);
  // psi_in = psi_k for the early half; for the late half psi_in = e^{i theta} psi_{k+1}.
  const Complex psi_in = late ? phase * psi_node : psi_node;
  const Complex alpha = phase * Complex(1.0, beta * density);
  const Complex gamma = Complex(0.0, beta) * std::conj(phase) * psi_in * psi_in;
  return {alpha, gamma, std::conj(gamma), std::conj(alpha)};
}

void AdjointPropagator::step(std::span<Complex> p, std::span<Complex> p_conj, std::size_t k) const {
  const std::size_t n = p.size();
  for (std::size_t j = 0; j < n; ++j) {
    half_step_matrix(j, k, true).apply(p[j], p_conj[j]);
  }
  fft_.forward(p);
  fft_.forward(p_conj);
  for (std::size_t i = 0; i < n; ++i) {
    p[i] *= kinetic_phase_[i];
    p_conj[i] *= std::conj(kinetic_phase_[i]);
  }
  fft_.inverse(p);
  fft_.inverse(p_conj);
  for (std::size_t j = 0; j < n; ++j) {
    half_step_matrix(j, k, false).apply(p[j], p_conj[j]);
  }
}

namespace {

bool finite(std::span<const Complex> v) {
  double sum = 0.0;
  for (const Complex& z : v) {
    sum += std::norm(z);
  }
  return std::isfinite(sum);
}

}  // namespace

AdjointPair step_backward(const AdjointPair& pair_next, const Hamiltonian1D& hamiltonian,
                          const Trajectory& trajectory, std::size_t k, AdjointScheme scheme) {
  if (!(pair_next.grid == hamiltonian.space())) {
    throw GridMismatch("step_backward: adjoint pair and Hamiltonian grids differ");
  }
  if (k >= hamiltonian.time().steps()) {
    throw InvalidArgument("step_backward: step index beyond the time grid");
  }
  AdjointPropagator stepper(hamiltonian, trajectory, scheme);
  AdjointPair out = pair_next;
  stepper.step(out.p, out.p_conj, k);
  if (!finite(out.p) || !finite(out.p_conj)) {
    throw NumericalInstability("adjoint step produced non-finite values", k);
  }
  return out;
}

AdjointSweep::AdjointSweep(SpatialGrid space, TimeGrid time, std::uint64_t trajectory_tag)
    : space_(space),
      time_(time),
      tag_(trajectory_tag),
      p_(space.size() * time.nodes()),
      p_conj_(space.size() * time.nodes()) {}

AdjointPair AdjointSweep::pair(std::size_t k) const {
  const auto a = p(k);
  const auto b = p_conj(k);
  return {space_, std::vector<Complex>(a.begin(), a.end()), std::vector<Complex>(b.begin(), b.end())};
}

double AdjointSweep::max_consistency_defect() const {
  double worst = 0.0;
  for (std::size_t k = 0; k < time_.nodes(); ++k) {
    worst = std::max(worst, pair(k).consistency_defect());
  }
  return worst;
}

std::uint64_t trajectory_tag(const Trajectory& trajectory) {
  // FNV-1a over grid sizes and the bytes of the first and last snapshots.
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t bytes) {
    const auto* b = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  const std::size_t n = trajectory.space().size();
  const std::size_t steps = trajectory.time().steps();
  mix(&n, sizeof n);
  mix(&steps, sizeof steps);
  for (std::size_t k : {std::size_t{0}, steps}) {
    const auto s = trajectory.snapshot(k);
    mix(s.data(), s.size_bytes());
  }
  return h;
}

AdjointSweep adjoint_sweep(const Trajectory& trajectory, const Hamiltonian1D& hamiltonian, const WaveField& phi_f,
                           AdjointScheme scheme) {
  if (!(phi_f.grid() == trajectory.space())) {
    throw GridMismatch("adjoint_sweep: target mode and trajectory grids differ");
  }
  AdjointPropagator stepper(hamiltonian, trajectory, scheme);
  const TimeGrid& time = trajectory.time();
  AdjointSweep sweep(trajectory.space(), time, trajectory_tag(trajectory));

  const AdjointPair terminal = terminal_condition(phi_f, trajectory.final_field(), hamiltonian.constants());
  std::ranges::copy(terminal.p, sweep.p(time.steps()).begin());
  std::ranges::copy(terminal.p_conj, sweep.p_conj(time.steps()).begin());

  for (std::size_t k = time.steps(); k-- > 0;) {
    auto p = sweep.p(k);
    auto q = sweep.p_conj(k);
    std::ranges::copy(sweep.p(k + 1), p.begin());
    std::ranges::copy(sweep.p_conj(k + 1), q.begin());
    stepper.step(p, q, k);
    if (!finite(p) || !finite(q)) {
      throw NumericalInstability("adjoint sweep produced non-finite values", k);
    }
  }
  return sweep;
}

namespace {

void check_same_run(const Trajectory& trajectory, const AdjointSweep& sweep) {
  if (!(trajectory.space() == sweep.space()) || !(trajectory.time() == sweep.time()) ||
      trajectory_tag(trajectory) != sweep.trajectory_tag()) {
    throw GridMismatch("gradient: adjoint sweep was not computed from this trajectory");
  }
}

}  // namespace

GradientField pointwise_sensitivity(const Trajectory& trajectory, const AdjointSweep& sweep, ControlKind target) {
  check_same_run(trajectory, sweep);
  GradientField out(trajectory.space(), trajectory.time(), target);
  const std::size_t n = trajectory.space().size();
  for (std::size_t k = 0; k < trajectory.nodes(); ++k) {
    const auto psi = trajectory.snapshot(k);
    const auto p = sweep.p(k);
    for (std::size_t j = 0; j < n; ++j) {
      const double base = 2.0 * std::real(std::conj(p[j]) * psi[j]);
      out(j, k) = target == ControlKind::potential ? base : base * std::norm(psi[j]);
    }
  }
  return out;
}

GradientField gradient(const Trajectory& trajectory, const AdjointSweep& sweep, ControlKind target) {
  const GradientField pointwise = pointwise_sensitivity(trajectory, sweep, target);
  GradientField out(trajectory.space(), trajectory.time(), target);
  const std::size_t n = trajectory.space().size();
  for (std::size_t k = 1; k < trajectory.nodes(); ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      out(j, k) = 0.5 * (pointwise(j, k - 1) + pointwise(j, k));
    }
  }
  return out;
}

}  // namespace gpec

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gpec/error.hpp"
#include "gpec/modes.hpp"
#include "gpec/optimizer.hpp"
#include "gpec/propagator.hpp"
#include "oracles.hpp"

using namespace gpec;

namespace {

const PhysicalConstants unit{};

ControlField smooth_control(const SpatialGrid& space, const TimeGrid& time, ControlKind kind, double scale,
                            bool symmetric) {
  ControlField c(space, time, kind);
  for (std::size_t k = 0; k < time.nodes(); ++k) {
    for (std::size_t j = 0; j < space.size(); ++j) {
      const double x = space.x(j) - space.center();
      const double t = time.t(k);
      c(j, k) = scale * (std::cos(0.3 * x) * std::sin(1.3 * t) + (symmetric ? 0.0 : 0.4 * std::sin(0.2 * x) * t));
    }
  }
  return c;
}

// Linear split step written independently with the naive DFT.
WaveField linear_reference(const WaveField& psi0, const ControlField& v, const PhysicalConstants& c) {
  const SpatialGrid& grid = psi0.grid();
  const std::size_t n = grid.size();
  std::vector<Complex> psi(psi0.values().begin(), psi0.values().end());
  const double dt = v.time().dt();
  for (std::size_t k = 0; k < v.time().steps(); ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      const double x = grid.x(j) - grid.center();
      psi[j] *= std::polar(1.0, -(0.5 * c.mass * c.omega * c.omega * x * x + v(j, k + 1)) * dt / 2);
    }
    auto spectrum = oracle::naive_dft(psi, -1);
    for (std::size_t m = 0; m < n; ++m) {
      const double idx = m < n / 2 ? double(m) : double(m) - double(n);
      const double kw = 2 * std::numbers::pi * idx / grid.length();
      spectrum[m] *= std::polar(1.0, -c.hbar * kw * kw * dt / (2 * c.mass)) / double(n);
    }
    psi = oracle::naive_dft(spectrum, +1);
    for (std::size_t j = 0; j < n; ++j) {
      const double x = grid.x(j) - grid.center();
      psi[j] *= std::polar(1.0, -(0.5 * c.mass * c.omega * c.omega * x * x + v(j, k + 1)) * dt / 2);
    }
  }
  return WaveField(grid, psi);
}

}  // namespace

TEST_SUITE("propagator") {
  TEST_CASE("kinetic factor on a plane wave") {
    const SpatialGrid grid(20.0, 64);
    WaveField wave(grid);
    const double k = 2 * std::numbers::pi * 3 / 20.0;
    for (std::size_t j = 0; j < 64; ++j) wave[j] = std::polar(1.0 / std::sqrt(20.0), k * grid.x(j));
    const double dt = 0.01;
    const WaveField out = apply_kinetic(wave, unit, dt);
    const Complex phase = std::polar(1.0, -k * k * dt / 2);
    for (std::size_t j = 0; j < 64; ++j) CHECK(std::abs(out[j] - phase * wave[j]) < 1e-14);
    const WaveField random = normalize(WaveField(grid, oracle::random_complex(64, 4)));
    CHECK(std::abs(norm_squared(apply_kinetic(random, unit, 0.3)) - 1.0) < 1e-14);
  }

  TEST_CASE("free Gaussian packet matches analytic dispersion") {
    const SpatialGrid grid(40.0, 512);
    const double sigma0 = 1.0, t = 1.5;
    WaveField psi(grid);
    for (std::size_t j = 0; j < grid.size(); ++j) psi[j] = oracle::free_gaussian(grid.x(j), 20.0, sigma0, 0.0);
    const WaveField out = apply_kinetic(psi, unit, t);
    double worst = 0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
      worst = std::max(worst, std::abs(out[j] - oracle::free_gaussian(grid.x(j), 20.0, sigma0, t)));
    }
    CHECK(worst < 1e-6);
  }

  TEST_CASE("oscillator ground state is stationary") {
    const SpatialGrid space(20.0, 300);
    const TimeGrid time(std::numbers::pi, 500);
    const Hamiltonian1D h(unit, space, time, 0.0);
    const WaveField ground = normalize(oracle::oscillator_field(0, space));
    const Trajectory traj = propagate_recorded(ground, h);
    CHECK(std::norm(inner_product(ground, traj.final_field())) > 1 - 1e-7);
    CHECK(traj.max_norm_drift() < 1e-10);
    CHECK(traj.nodes() == 501);
    const WaveField direct = propagate(ground, h);
    CHECK(oracle::max_abs_diff(direct.values(), traj.final_field().values()) == 0.0);
  }

  TEST_CASE("coherent mode at g0 = 5 stays stationary") {
    const SpatialGrid space(20.0, 300);
    const CoherentMode mode = saitp_find_mode(0, 5.0, harmonic_trial(0, space, unit), unit);
    const Hamiltonian1D h(unit, space, TimeGrid(10.0, 500), 5.0);
    const WaveField end = propagate(mode.field, h);
    CHECK(1.0 - std::norm(inner_product(mode.field, end)) < 1e-3);
  }

  TEST_CASE("norm conservation under arbitrary real controls") {
    const SpatialGrid space(20.0, 128);
    const TimeGrid time(std::numbers::pi, 500);
    ControlField v(space, time, ControlKind::potential, oracle::smooth_random(128, 501, 21));
    ControlField g(space, time, ControlKind::nonlinearity, oracle::smooth_random(128, 501, 22));
    for (auto& x : v.values()) x *= 3.0;
    const Hamiltonian1D h(unit, 5.0, v, g);
    const Trajectory traj = propagate_recorded(normalize(oracle::oscillator_field(1, space)), h);
    CHECK(traj.max_norm_drift() < 1e-10);
  }

  TEST_CASE("zero-duration grid returns the initial field") {
    const SpatialGrid space(20.0, 64);
    const WaveField psi = normalize(WaveField(space, oracle::random_complex(64, 8)));
    const Hamiltonian1D h(unit, space, TimeGrid(0.0, 1), 3.0);
    const WaveField out = propagate(psi, h);
    CHECK(oracle::max_abs_diff(out.values(), psi.values()) < 1e-15);
  }

  // Ratio of successive differences between final states when dt halves.
  double self_convergence_ratio(bool time_dependent) {
    const SpatialGrid space(20.0, 128);
    const WaveField psi0 = normalize(oracle::oscillator_field(0, space));
    std::vector<WaveField> finals;
    for (std::size_t steps : {100u, 200u, 400u}) {
      const TimeGrid time(2.0, steps);
      ControlField v(space, time, ControlKind::potential), g(space, time, ControlKind::nonlinearity);
      for (std::size_t k = 0; k < time.nodes(); ++k) {
        const double t = time_dependent ? time.t(k) : 1.0;
        for (std::size_t j = 0; j < space.size(); ++j) {
          const double x = space.x(j) - space.center();
          v(j, k) = std::cos(0.3 * x) * std::sin(1.3 * t) + 0.4 * std::sin(0.2 * x) * t;
          g(j, k) = 0.5 * std::cos(0.5 * x + t);
        }
      }
      finals.push_back(propagate(psi0, Hamiltonian1D(unit, 5.0, v, g)));
    }
    auto dist = [](const WaveField& a, const WaveField& b) {
      double s = 0;
      for (std::size_t j = 0; j < a.size(); ++j) s += std::norm(a[j] - b[j]);
      return std::sqrt(s * a.grid().dx());
    };
    return dist(finals[0], finals[1]) / dist(finals[1], finals[2]);
  }

  TEST_CASE("second-order self-convergence with static controls") {
    const double ratio = self_convergence_ratio(false);
    CHECK(ratio >= 3.5);
    CHECK(ratio <= 4.8);
  }

  // Both potential half-steps sample the controls at t + dt, so the explicit
  // time dependence of the controls enters at first order.
  TEST_CASE("first-order convergence in the control time dependence") {
    const double ratio = self_convergence_ratio(true);
    CHECK(ratio > 1.8);
    CHECK(ratio < 2.3);
  }

  TEST_CASE("linear propagation matches an independent split-step reference") {
    const SpatialGrid space(20.0, 64);
    const TimeGrid time(1.0, 50);
    const ControlField v = smooth_control(space, time, ControlKind::potential, 2.0, false);
    const Hamiltonian1D h(unit, 0.0, v, ControlField(space, time, ControlKind::nonlinearity));
    const WaveField psi0 = normalize(WaveField(space, oracle::random_complex(64, 13)));
    const WaveField fast = propagate(psi0, h);
    const WaveField slow = linear_reference(psi0, v, unit);
    CHECK(oracle::max_abs_diff(fast.values(), slow.values()) < 1e-10);
  }

  TEST_CASE("parity is preserved under symmetric controls") {
    const SpatialGrid space(20.0, 128);
    const TimeGrid time(std::numbers::pi, 300);
    const Hamiltonian1D h(unit, 10.0, smooth_control(space, time, ControlKind::potential, 2.0, true),
                          smooth_control(space, time, ControlKind::nonlinearity, 3.0, true));
    for (unsigned n : {0u, 1u}) {
      const Trajectory traj = propagate_recorded(normalize(oracle::oscillator_field(n, space)), h);
      double worst = 0;
      for (std::size_t k = 0; k < traj.nodes(); ++k) worst = std::max(worst, parity_defect(traj.field(k)));
      CHECK(worst < 1e-8);
    }
  }

  TEST_CASE("trial potential populates the first excited mode") {
    const SpatialGrid space(20.0, 150);
    const TimeGrid time(std::numbers::pi, 500);
    const ControlPair c = initial_controls(InitialGuess{}, ScenarioKind::potential_only, 0.0, space, time);
    const Hamiltonian1D h(unit, 0.0, c.v_cont, c.g_cont);
    const WaveField end = propagate(normalize(oracle::oscillator_field(0, space)), h);
    CHECK(std::norm(inner_product(normalize(oracle::oscillator_field(1, space)), end)) > 1e-6);
  }

  TEST_CASE("overflowing phases abort with the step index") {
    const SpatialGrid space(20.0, 64);
    const TimeGrid time(1.0, 10);
    ControlField v(space, time, ControlKind::potential);
    for (std::size_t j = 0; j < 64; ++j) v(j, 4) = 1.5e308;
    const Hamiltonian1D h(unit, 1.5e308, v, ControlField(space, time, ControlKind::nonlinearity));
    const WaveField psi0 = normalize(oracle::oscillator_field(0, space));
    try {
      propagate(psi0, h);
      FAIL("expected NumericalInstability");
    } catch (const NumericalInstability& e) {
      CHECK(e.step() == 3);
    }
  }

  TEST_CASE("precondition errors") {
    const SpatialGrid space(20.0, 64);
    const Hamiltonian1D h(unit, space, TimeGrid(1.0, 10), 0.0);
    CHECK_THROWS_AS(propagate(WaveField(space, oracle::random_complex(64, 1)), h), InvalidArgument);
    CHECK_THROWS_AS(propagate(normalize(oracle::oscillator_field(0, SpatialGrid(20.0, 32))), h), GridMismatch);
  }
}

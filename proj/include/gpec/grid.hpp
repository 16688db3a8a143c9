#pragma once

#include <cstddef>

namespace gpec {

/// Physical constants of the trapped condensate. All must be strictly positive.
struct PhysicalConstants {
  double hbar = 1.0;
  double mass = 1.0;
  double omega = 1.0;  ///< trap angular frequency

  void validate() const;
  bool operator==(const PhysicalConstants&) const = default;
};

/// Uniform periodic grid on [0, L): x_j = j * dx, j = 0..N-1, dx = L / N.
///
/// N must be even and at least 8, so that the trap center L/2 falls on the
/// grid point N/2 and the reflection x -> L - x maps grid points onto grid
/// points (index j -> (N - j) mod N).
class SpatialGrid {
 public:
  explicit SpatialGrid(double length = 20.0, std::size_t points = 300);

  double length() const noexcept { return length_; }
  std::size_t size() const noexcept { return points_; }
  double dx() const noexcept { return dx_; }
  double x(std::size_t j) const noexcept { return static_cast<double>(j) * dx_; }
  double center() const noexcept { return 0.5 * length_; }
  /// Index of the mirror image of x_j about L/2.
  std::size_t mirror(std::size_t j) const noexcept { return (points_ - j) % points_; }

  bool operator==(const SpatialGrid& other) const noexcept {
    return length_ == other.length_ && points_ == other.points_;
  }

 private:
  double length_;
  std::size_t points_;
  double dx_;
};

/// Uniform time grid t_k = k * dt, k = 0..steps, dt = T / steps.
class TimeGrid {
 public:
  TimeGrid(double duration, std::size_t steps);

  double duration() const noexcept { return duration_; }
  std::size_t steps() const noexcept { return steps_; }
  /// Number of time nodes, steps + 1.
  std::size_t nodes() const noexcept { return steps_ + 1; }
  double dt() const noexcept { return dt_; }
  double t(std::size_t k) const noexcept { return static_cast<double>(k) * dt_; }

  bool operator==(const TimeGrid& other) const noexcept {
    return duration_ == other.duration_ && steps_ == other.steps_;
  }

 private:
  double duration_;
  std::size_t steps_;
  double dt_;
};

/// Harmonic trap (m w^2 / 2)(x - L/2)^2 at grid point j.
double trap_potential(const PhysicalConstants& constants, const SpatialGrid& grid, std::size_t j);

}  // namespace gpec

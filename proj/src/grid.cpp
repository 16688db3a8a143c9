#include "gpec/grid.hpp"

#include <cmath>
#include <string>

#include "gpec/error.hpp"

namespace gpec {

void PhysicalConstants::validate() const {
  auto check = [](double v, const char* name) {
    if (!(std::isfinite(v) && v > 0.0)) {
      throw InvalidArgument(std::string(name) + " must be finite and strictly positive");
    }
  };
  check(hbar, "hbar");
  check(mass, "mass");
  check(omega, "omega");
}

SpatialGrid::SpatialGrid(double length, std::size_t points)
    : length_(length), points_(points), dx_(length / static_cast<double>(points)) {
  if (!(std::isfinite(length) && length > 0.0)) {
    throw InvalidArgument("spatial grid length must be finite and positive");
  }
  if (points < 8 || points % 2 != 0) {
    throw InvalidArgument("spatial grid point count must be even and >= 8, got " +
                          std::to_string(points));
  }
}

TimeGrid::TimeGrid(double duration, std::size_t steps)
    : duration_(duration), steps_(steps), dt_(steps ? duration / static_cast<double>(steps) : 0.0) {
  if (!(std::isfinite(duration) && duration >= 0.0)) {
    throw InvalidArgument("time grid duration must be finite and non-negative");
  }
  if (steps < 1) {
    throw InvalidArgument("time grid needs at least one step");
  }
}

double trap_potential(const PhysicalConstants& constants, const SpatialGrid& grid, std::size_t j) {
  const double offset = grid.x(j) - grid.center();
  return 0.5 * constants.mass * constants.omega * constants.omega * offset * offset;
}

}  // namespace gpec

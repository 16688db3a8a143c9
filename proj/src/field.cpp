#include "gpec/field.hpp"

#include <algorithm>
#include <cmath>

#include "gpec/error.hpp"

namespace gpec {

WaveField::WaveField(SpatialGrid grid) : grid_(grid), values_(grid.size()) {}

WaveField::WaveField(SpatialGrid grid, std::vector<Complex> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw GridMismatch("wave field has " + std::to_string(values_.size()) +
                       " values for a grid of " + std::to_string(grid_.size()) + " points");
  }
}

bool WaveField::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(),
                     [](const Complex& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

const char* to_string(ControlKind kind) noexcept {
  return kind == ControlKind::potential ? "potential" : "nonlinearity";
}

ControlField::ControlField(SpatialGrid space, TimeGrid time, ControlKind kind)
    : space_(space), time_(time), kind_(kind), values_(space.size() * time.nodes(), 0.0) {}

ControlField::ControlField(SpatialGrid space, TimeGrid time, ControlKind kind, std::vector<double> values)
    : space_(space), time_(time), kind_(kind), values_(std::move(values)) {
  if (values_.size() != space_.size() * time_.nodes()) {
    throw GridMismatch("control field has " + std::to_string(values_.size()) + " values, expected " +
                       std::to_string(space_.size() * time_.nodes()));
  }
}

bool ControlField::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Complex inner_product(const WaveField& a, const WaveField& b) {
  if (!(a.grid() == b.grid())) {
    throw GridMismatch("inner_product: fields live on different grids");
  }
  Complex sum{0.0, 0.0};
  for (std::size_t j = 0; j < a.size(); ++j) {
    sum += std::conj(a[j]) * b[j];
  }
  return sum * a.grid().dx();
}

double norm_squared(const WaveField& psi) {
  double sum = 0.0;
  for (const Complex& z : psi.values()) {
    sum += std::norm(z);
  }
  return sum * psi.grid().dx();
}

double norm(const WaveField& psi) { return std::sqrt(norm_squared(psi)); }

WaveField normalize(const WaveField& psi) {
  const double n = norm(psi);
  if (!(std::isfinite(n) && n > 0.0)) {
    throw InvalidArgument("normalize: field has zero or non-finite norm");
  }
  WaveField out = psi;
  const double scale = 1.0 / n;
  for (Complex& z : out.values()) {
    z *= scale;
  }
  return out;
}

namespace {

// ||psi(x) - s psi(L - x)||^2 without the dx factor, for s = +1 and s = -1.
std::pair<double, double> mirror_distances(const WaveField& psi) {
  const SpatialGrid& grid = psi.grid();
  double even = 0.0;
  double odd = 0.0;
  for (std::size_t j = 0; j < psi.size(); ++j) {
    const Complex mirrored = psi[grid.mirror(j)];
    even += std::norm(psi[j] - mirrored);
    odd += std::norm(psi[j] + mirrored);
  }
  return {even, odd};
}

}  // namespace

double parity_defect(const WaveField& psi) {
  double total = 0.0;
  for (const Complex& z : psi.values()) {
    total += std::norm(z);
  }
  if (total == 0.0) {
    return 0.0;
  }
  const auto [even, odd] = mirror_distances(psi);
  return std::sqrt(std::min(even, odd) / total);
}

int parity_sign(const WaveField& psi) {
  const auto [even, odd] = mirror_distances(psi);
  return even <= odd ? +1 : -1;
}

}  // namespace gpec

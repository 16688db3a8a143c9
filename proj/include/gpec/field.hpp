#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "gpec/grid.hpp"

namespace gpec {

using Complex = std::complex<double>;

/// Complex amplitude psi(x_j) on a SpatialGrid.
class WaveField {
 public:
  /// Zero field.
  explicit WaveField(SpatialGrid grid);
  WaveField(SpatialGrid grid, std::vector<Complex> values);

  const SpatialGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const Complex> values() const noexcept { return values_; }
  std::span<Complex> values() noexcept { return values_; }
  const Complex& operator[](std::size_t j) const noexcept { return values_[j]; }
  Complex& operator[](std::size_t j) noexcept { return values_[j]; }

  bool all_finite() const noexcept;

 private:
  SpatialGrid grid_;
  std::vector<Complex> values_;
};

enum class ControlKind { potential, nonlinearity };

const char* to_string(ControlKind kind) noexcept;

/// Real control c(x_j, t_k) on SpatialGrid x TimeGrid, stored time-major:
/// the N values of time node k are contiguous.
class ControlField {
 public:
  /// Zero control.
  ControlField(SpatialGrid space, TimeGrid time, ControlKind kind);
  ControlField(SpatialGrid space, TimeGrid time, ControlKind kind, std::vector<double> values);

  const SpatialGrid& space() const noexcept { return space_; }
  const TimeGrid& time() const noexcept { return time_; }
  ControlKind kind() const noexcept { return kind_; }

  double operator()(std::size_t j, std::size_t k) const noexcept {
    return values_[k * space_.size() + j];
  }
  double& operator()(std::size_t j, std::size_t k) noexcept { return values_[k * space_.size() + j]; }
  std::span<const double> slice(std::size_t k) const noexcept {
    return std::span<const double>(values_).subspan(k * space_.size(), space_.size());
  }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  bool all_finite() const noexcept;
  bool same_grids(const ControlField& other) const noexcept {
    return space_ == other.space_ && time_ == other.time_;
  }

 private:
  SpatialGrid space_;
  TimeGrid time_;
  ControlKind kind_;
  std::vector<double> values_;
};

/// <a|b> = sum_j conj(a_j) b_j dx.
Complex inner_product(const WaveField& a, const WaveField& b);
double norm_squared(const WaveField& psi);
double norm(const WaveField& psi);

/// psi / ||psi||. Throws InvalidArgument for a zero (or non-finite) field.
WaveField normalize(const WaveField& psi);

/// Distance from definite parity about L/2:
/// min over s in {+1,-1} of ||psi(x) - s psi(L - x)|| / ||psi||. Zero for an exact
/// even or odd field.
double parity_defect(const WaveField& psi);

/// The sign s in {+1, -1} attaining the minimum in parity_defect.
int parity_sign(const WaveField& psi);

}  // namespace gpec

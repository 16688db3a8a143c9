#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gpec/field.hpp"

namespace gpec {

/// In-place complex FFT of a fixed length, backed by an FFTW plan.
///
/// forward: X_n = sum_j x_j exp(-2 pi i n j / N)      (unnormalized)
/// inverse: x_j = (1/N) sum_n X_n exp(+2 pi i n j / N)
///
/// Plans are created with FFTW_UNALIGNED, so any contiguous buffer of the
/// planned length may be transformed. Execution is safe from several threads
/// at once; plan construction is serialized internally.
class Fft1D {
 public:
  explicit Fft1D(std::size_t n);
  ~Fft1D();
  Fft1D(const Fft1D&) = delete;
  Fft1D& operator=(const Fft1D&) = delete;
  Fft1D(Fft1D&& other) noexcept;
  Fft1D& operator=(Fft1D&& other) noexcept;

  std::size_t size() const noexcept { return n_; }
  void forward(std::span<Complex> data) const;
  void inverse(std::span<Complex> data) const;

 private:
  void release() noexcept;

  std::size_t n_ = 0;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

/// Unnormalized 2-D forward FFT of a row-major rows x cols array.
void fft2d_forward(std::span<Complex> data, std::size_t rows, std::size_t cols);

/// Signed FFT angular wavenumbers 2 pi n / L, n = 0..N/2-1, -N/2..-1.
std::vector<double> angular_wavenumbers(const SpatialGrid& grid);

/// Time Fourier transform F(w_n) = sum_k exp(-i w_n t_k) f(t_k) dt at
/// w_n = 2 pi n / T, n = 0..steps-1.
///
/// Uses the first `steps` samples t_0..t_{steps-1}; a series of length
/// steps + 1 (one value per time node) is accepted and its last sample, at
/// t = T, is dropped as the periodic image of t = 0.
std::vector<Complex> dft_time(std::span<const Complex> series, const TimeGrid& time);
std::vector<Complex> dft_time(std::span<const double> series, const TimeGrid& time);

/// Angular frequencies w_n = 2 pi n / T, n = 0..steps-1.
std::vector<double> angular_frequencies(const TimeGrid& time);

}  // namespace gpec

#include "gpec/fourier.hpp"

#include <fftw3.h>

#include <mutex>
#include <numbers>
#include <utility>

#include "gpec/error.hpp"

namespace gpec {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

Fft1D::Fft1D(std::size_t n) : n_(n) {
  if (n == 0) {
    throw InvalidArgument("Fft1D: length must be positive");
  }
  std::vector<Complex> scratch(n);
  std::lock_guard lock(planner_mutex());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  const int len = static_cast<int>(n);
  forward_plan_ = fftw_plan_dft_1d(len, as_fftw(scratch.data()), as_fftw(scratch.data()), FFTW_FORWARD, flags);
  inverse_plan_ = fftw_plan_dft_1d(len, as_fftw(scratch.data()), as_fftw(scratch.data()), FFTW_BACKWARD, flags);
  if (!forward_plan_ || !inverse_plan_) {
    release();
    throw Error("FFTW failed to create a plan of length " + std::to_string(n));
  }
}

Fft1D::~Fft1D() { release(); }

Fft1D::Fft1D(Fft1D&& other) noexcept
    : n_(std::exchange(other.n_, 0)),
      forward_plan_(std::exchange(other.forward_plan_, nullptr)),
      inverse_plan_(std::exchange(other.inverse_plan_, nullptr)) {}

Fft1D& Fft1D::operator=(Fft1D&& other) noexcept {
  if (this != &other) {
    release();
    n_ = std::exchange(other.n_, 0);
    forward_plan_ = std::exchange(other.forward_plan_, nullptr);
    inverse_plan_ = std::exchange(other.inverse_plan_, nullptr);
  }
  return *this;
}

void Fft1D::release() noexcept {
  if (!forward_plan_ && !inverse_plan_) {
    return;
  }
  std::lock_guard lock(planner_mutex());
  if (forward_plan_) {
    fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
    forward_plan_ = nullptr;
  }
  if (inverse_plan_) {
    fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
    inverse_plan_ = nullptr;
  }
}

void Fft1D::forward(std::span<Complex> data) const {
  if (data.size() != n_) {
    throw InvalidArgument("Fft1D::forward: buffer length does not match plan");
  }
  fftw_execute_dft(static_cast<fftw_plan>(forward_plan_), as_fftw(data.data()), as_fftw(data.data()));
}

void Fft1D::inverse(std::span<Complex> data) const {
  if (data.size() != n_) {
    throw InvalidArgument("Fft1D::inverse: buffer length does not match plan");
  }
  fftw_execute_dft(static_cast<fftw_plan>(inverse_plan_), as_fftw(data.data()), as_fftw(data.data()));
  const double scale = 1.0 / static_cast<double>(n_);
  for (Complex& z : data) {
    z *= scale;
  }
}

void fft2d_forward(std::span<Complex> data, std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0 || data.size() != rows * cols) {
    throw InvalidArgument("fft2d_forward: buffer does not match rows x cols");
  }
  fftw_plan plan = nullptr;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols), as_fftw(data.data()),
                            as_fftw(data.data()), FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  if (!plan) {
    throw Error("FFTW failed to create a 2-D plan");
  }
  fftw_execute(plan);
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(plan);
}

std::vector<double> angular_wavenumbers(const SpatialGrid& grid) {
  const std::size_t n = grid.size();
  std::vector<double> k(n);
  const double base = 2.0 * std::numbers::pi / grid.length();
  for (std::size_t i = 0; i < n; ++i) {
    const auto signed_index = i < n / 2 ? static_cast<double>(i) : static_cast<double>(i) - static_cast<double>(n);
    k[i] = base * signed_index;
  }
  return k;
}

std::vector<double> angular_frequencies(const TimeGrid& time) {
  std::vector<double> w(time.steps());
  for (std::size_t n = 0; n < w.size(); ++n) {
    w[n] = 2.0 * std::numbers::pi * static_cast<double>(n) / time.duration();
  }
  return w;
}

std::vector<Complex> dft_time(std::span<const Complex> series, const TimeGrid& time) {
  const std::size_t steps = time.steps();
  if (series.size() != steps && series.size() != steps + 1) {
    throw GridMismatch("dft_time: series length must be steps or steps + 1");
  }
  std::vector<Complex> out(series.begin(), series.begin() + static_cast<std::ptrdiff_t>(steps));
  Fft1D(steps).forward(out);
  for (Complex& z : out) {
    z *= time.dt();
  }
  return out;
}

std::vector<Complex> dft_time(std::span<const double> series, const TimeGrid& time) {
  std::vector<Complex> promoted(series.begin(), series.end());
  return dft_time(std::span<const Complex>(promoted), time);
}

}  // namespace gpec

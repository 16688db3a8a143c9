#include "gpec/ode.hpp"

#include <algorithm>
#include <cmath>

#include "gpec/error.hpp"

namespace gpec {

void AdaptiveOptions::validate() const {
  if (!(rtol > 0.0) || !(atol > 0.0)) {
    throw InvalidArgument("ODE tolerances must be positive");
  }
  if (!(max_step > 0.0) || !(min_step > 0.0) || min_step > max_step) {
    throw InvalidArgument("ODE step bounds must satisfy 0 < min_step <= max_step");
  }
  if (!(safety > 0.0 && safety < 1.0) || !(facmin > 0.0 && facmin < 1.0) || !(facmax > 1.0)) {
    throw InvalidArgument("ODE step controller factors out of range");
  }
  if (max_rejections == 0) {
    throw InvalidArgument("ODE rejection cap must be positive");
  }
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
// Fifth-order weights equal row 7; e_i = b5_i - b4_i.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;

// PI controller exponents (beta = 0.04 on a fifth-order error estimate).
constexpr double pi_beta = 0.04;
constexpr double pi_alpha = 0.2 - 0.75 * pi_beta;

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double rms(std::span<const double> v, std::span<const double> scale) {
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double r = v[i] / scale[i];
    sum += r * r;
  }
  return v.empty() ? 0.0 : std::sqrt(sum / static_cast<double>(v.size()));
}

}  // namespace

DormandPrince45::DormandPrince45(OdeFunction f, std::vector<double> y0, AdaptiveOptions options)
    : f_(std::move(f)), options_(options), y_(std::move(y0)) {
  options_.validate();
  if (y_.empty()) {
    throw InvalidArgument("ODE state must be non-empty");
  }
  if (!all_finite(y_)) {
    throw InvalidArgument("ODE initial state is not finite");
  }
  const std::size_t n = y_.size();
  k1_.assign(n, 0.0);
  k_.assign(6, std::vector<double>(n, 0.0));
  trial_.assign(n, 0.0);
  y_new_.assign(n, 0.0);
  eval(y_, k1_);
  h_ = options_.initial_step > 0.0 ? std::min(options_.initial_step, options_.max_step) : initial_step();
}

void DormandPrince45::eval(std::span<const double> y, std::span<double> dydt) {
  f_(y, dydt);
  ++evaluations_;
}

double DormandPrince45::initial_step() {
  const std::size_t n = y_.size();
  std::vector<double> scale(n);
  for (std::size_t i = 0; i < n; ++i) {
    scale[i] = options_.atol + options_.rtol * std::abs(y_[i]);
  }
  const double d0 = rms(y_, scale);
  const double d1 = rms(k1_, scale);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, options_.max_step);

  for (std::size_t i = 0; i < n; ++i) {
    trial_[i] = y_[i] + h0 * k1_[i];
  }
  std::vector<double>& f1 = k_[0];
  eval(trial_, f1);
  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) {
    diff[i] = f1[i] - k1_[i];
  }
  const double d2 = rms(diff, scale) / h0;
  const double largest = std::max(d1, d2);
  const double h1 = largest <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / largest, 0.2);
  return std::clamp(std::min(100.0 * h0, h1), options_.min_step, options_.max_step);
}

StepInfo DormandPrince45::advance() {
  const std::size_t n = y_.size();
  std::vector<double>& k2 = k_[0];
  std::vector<double>& k3 = k_[1];
  std::vector<double>& k4 = k_[2];
  std::vector<double>& k5 = k_[3];
  std::vector<double>& k6 = k_[4];
  std::vector<double>& k7 = k_[5];
  std::vector<double> scale(n);
  std::vector<double> err(n);

  StepInfo info;
  bool last_rejected = false;
  for (;;) {
    const double h = h_;
    for (std::size_t i = 0; i < n; ++i) trial_[i] = y_[i] + h * a21 * k1_[i];
    eval(trial_, k2);
    for (std::size_t i = 0; i < n; ++i) trial_[i] = y_[i] + h * (a31 * k1_[i] + a32 * k2[i]);
    eval(trial_, k3);
    for (std::size_t i = 0; i < n; ++i) trial_[i] = y_[i] + h * (a41 * k1_[i] + a42 * k2[i] + a43 * k3[i]);
    eval(trial_, k4);
    for (std::size_t i = 0; i < n; ++i)
      trial_[i] = y_[i] + h * (a51 * k1_[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    eval(trial_, k5);
    for (std::size_t i = 0; i < n; ++i)
      trial_[i] = y_[i] + h * (a61 * k1_[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    eval(trial_, k6);
    for (std::size_t i = 0; i < n; ++i)
      y_new_[i] = y_[i] + h * (a71 * k1_[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    eval(y_new_, k7);

    for (std::size_t i = 0; i < n; ++i) {
      err[i] = h * (e1 * k1_[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      scale[i] = options_.atol + options_.rtol * std::max(std::abs(y_[i]), std::abs(y_new_[i]));
    }
    const double error = all_finite(y_new_) && all_finite(k7) ? rms(err, scale)
                                                              : std::numeric_limits<double>::infinity();

    if (error <= 1.0) {
      // PI controller on accepted steps.
      const double e = std::max(error, 1e-10);
      double factor = options_.safety * std::pow(e, -pi_alpha) * std::pow(previous_error_, pi_beta);
      factor = std::clamp(factor, options_.facmin, last_rejected ? 1.0 : options_.facmax);
      previous_error_ = std::max(error, 1e-4);
      std::swap(y_, y_new_);
      std::swap(k1_, k7);
      s_ += h;
      h_ = std::clamp(h * factor, options_.min_step, options_.max_step);
      info.step = h;
      info.error_norm = error;
      return info;
    }

    ++info.rejections;
    last_rejected = true;
    if (info.rejections >= options_.max_rejections || h <= options_.min_step) {
      throw NumericalInstability("adaptive integrator could not meet the tolerance at s = " + std::to_string(s_),
                                 info.rejections);
    }
    const double factor = std::isfinite(error)
                              ? std::max(options_.facmin, options_.safety * std::pow(error, -pi_alpha))
                              : options_.facmin;
    h_ = std::max(h * factor, options_.min_step);
  }
}

RungeKutta4::RungeKutta4(OdeFunction f, std::vector<double> y0, double step)
    : f_(std::move(f)), h_(step), y_(std::move(y0)) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw InvalidArgument("RK4 step must be positive and finite");
  }
  if (y_.empty()) {
    throw InvalidArgument("ODE state must be non-empty");
  }
  const std::size_t n = y_.size();
  k1_.assign(n, 0.0);
  k2_.assign(n, 0.0);
  k3_.assign(n, 0.0);
  k4_.assign(n, 0.0);
  trial_.assign(n, 0.0);
}

StepInfo RungeKutta4::advance() {
  const std::size_t n = y_.size();
  const double h = h_;
  f_(y_, k1_);
  for (std::size_t i = 0; i < n; ++i) trial_[i] = y_[i] + 0.5 * h * k1_[i];
  f_(trial_, k2_);
  for (std::size_t i = 0; i < n; ++i) trial_[i] = y_[i] + 0.5 * h * k2_[i];
  f_(trial_, k3_);
  for (std::size_t i = 0; i < n; ++i) trial_[i] = y_[i] + h * k3_[i];
  f_(trial_, k4_);
  evaluations_ += 4;
  for (std::size_t i = 0; i < n; ++i) {
    trial_[i] = y_[i] + h / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
  }
  if (!all_finite(trial_)) {
    throw NumericalInstability("RK4 state became non-finite at s = " + std::to_string(s_), 0);
  }
  std::swap(y_, trial_);
  s_ += h;
  return StepInfo{h, 0.0, 0};
}

}  // namespace gpec

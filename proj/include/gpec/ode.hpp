#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <vector>

namespace gpec {

/// Autonomous system dy/ds = f(y). Writes f(y) into dydt (same length as y).
using OdeFunction = std::function<void(std::span<const double> y, std::span<double> dydt)>;

struct AdaptiveOptions {
  double rtol = 1e-3;
  double atol = 1e-6;
  /// First trial step; <= 0 selects one automatically from f(y0).
  double initial_step = 0.0;
  double max_step = std::numeric_limits<double>::infinity();
  double min_step = 1e-14;
  double safety = 0.9;
  double facmin = 0.2;  ///< smallest step ratio h_new / h
  double facmax = 5.0;  ///< largest step ratio h_new / h
  std::size_t max_rejections = 60;  ///< per accepted step

  void validate() const;
};

/// Outcome of one accepted step.
struct StepInfo {
  double step = 0.0;        ///< h used by the accepted step
  double error_norm = 0.0;  ///< scaled error estimate (<= 1 when accepted); 0 for fixed-step methods
  std::size_t rejections = 0;
};

/// One-step integrator advancing a state along the trajectory variable s.
class OdeIntegrator {
 public:
  virtual ~OdeIntegrator() = default;
  /// Takes one accepted step. Throws NumericalInstability when no acceptable
  /// step exists or the state becomes non-finite.
  virtual StepInfo advance() = 0;
  virtual double s() const noexcept = 0;
  virtual std::span<const double> y() const noexcept = 0;
  virtual std::size_t evaluations() const noexcept = 0;
};

/// Dormand-Prince 5(4) embedded pair with FSAL and PI step-size control.
///
/// The error of a trial step is the RMS over components of
/// (y5 - y4)_i / (atol + rtol max(|y_i|, |y_new_i|)); a step is accepted when
/// this is at most one. The solution is advanced with the fifth-order result.
class DormandPrince45 final : public OdeIntegrator {
 public:
  DormandPrince45(OdeFunction f, std::vector<double> y0, AdaptiveOptions options = {});

  StepInfo advance() override;
  double s() const noexcept override { return s_; }
  std::span<const double> y() const noexcept override { return y_; }
  std::size_t evaluations() const noexcept override { return evaluations_; }
  /// Step size proposed for the next advance().
  double next_step() const noexcept { return h_; }

 private:
  void eval(std::span<const double> y, std::span<double> dydt);
  double initial_step();

  OdeFunction f_;
  AdaptiveOptions options_;
  double s_ = 0.0;
  double h_ = 0.0;
  double previous_error_ = 1e-4;
  std::size_t evaluations_ = 0;
  std::vector<double> y_;
  std::vector<double> k1_;  // f(y_) (first stage, reused via FSAL)
  std::vector<std::vector<double>> k_;
  std::vector<double> trial_;
  std::vector<double> y_new_;
};

/// Classical fourth-order Runge-Kutta with a fixed step.
class RungeKutta4 final : public OdeIntegrator {
 public:
  RungeKutta4(OdeFunction f, std::vector<double> y0, double step);

  StepInfo advance() override;
  double s() const noexcept override { return s_; }
  std::span<const double> y() const noexcept override { return y_; }
  std::size_t evaluations() const noexcept override { return evaluations_; }

 private:
  OdeFunction f_;
  double h_;
  double s_ = 0.0;
  std::size_t evaluations_ = 0;
  std::vector<double> y_;
  std::vector<double> k1_, k2_, k3_, k4_, trial_;
};

}  // namespace gpec

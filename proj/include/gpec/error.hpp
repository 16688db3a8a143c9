#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gpec {

/// Base for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on grids, fields or parameters was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Two inputs that must share a grid (or a run) do not.
class GridMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// A propagation produced NaN/Inf. `step()` is the time-step index that failed.
class NumericalInstability : public Error {
 public:
  NumericalInstability(const std::string& what, std::size_t step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// An iterative search hit its iteration cap.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, double last_defect)
      : Error(what), last_defect_(last_defect) {}
  double last_defect() const noexcept { return last_defect_; }

 private:
  double last_defect_;
};

/// Invalid run configuration. The message names the violated rule.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File could not be read or written, or failed its integrity checks.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace gpec

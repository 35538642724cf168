#pragma once

#include <stdexcept>
#include <string>

namespace chemo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on arguments was violated (bad p, unsupported order, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Non-finite values, negative densities, or a linear solve that did not converge.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A time-stepping failure; carries the simulation time at which it happened.
class SimulationError : public Error {
 public:
  SimulationError(const std::string& what, double time)
      : Error(what + " (t=" + std::to_string(time) + ")"), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// Too few usable points to fit a convergence rate.
class FitRejected : public Error {
 public:
  using Error::Error;
};

}  // namespace chemo

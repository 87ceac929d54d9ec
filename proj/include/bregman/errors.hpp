#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace bregman {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector length does not match an operator or kernel dimension.
class DimensionError : public Error {
 public:
  DimensionError(std::string context, std::size_t expected, std::size_t actual)
      : Error(context + ": expected length " + std::to_string(expected) + ", got " +
              std::to_string(actual)),
        context_(std::move(context)),
        expected_(expected),
        actual_(actual) {}

  const std::string& context() const noexcept { return context_; }
  std::size_t expected() const noexcept { return expected_; }
  std::size_t actual() const noexcept { return actual_; }

 private:
  std::string context_;
  std::size_t expected_;
  std::size_t actual_;
};

/// A point lies outside the domain (or interior of the domain) a kernel requires.
class DomainError : public Error {
 public:
  DomainError(std::string argument, std::size_t index, double value, const std::string& why)
      : Error("argument '" + argument + "' coordinate " + std::to_string(index) + " = " +
              std::to_string(value) + ": " + why),
        argument_(std::move(argument)),
        index_(index),
        value_(value) {}

  const std::string& argument() const noexcept { return argument_; }
  std::size_t index() const noexcept { return index_; }
  double value() const noexcept { return value_; }

 private:
  std::string argument_;
  std::size_t index_;
  double value_;
};

/// Invalid configuration (stepsizes, line-search parameters, problem wiring).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Iterative estimate did not converge; carries the best value reached.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best_estimate)
      : Error(what + " (best estimate " + std::to_string(best_estimate) + ")"),
        best_estimate_(best_estimate) {}

  double best_estimate() const noexcept { return best_estimate_; }

 private:
  double best_estimate_;
};

/// Backtracking exhausted its budget without satisfying the acceptance test.
class BacktrackError : public Error {
 public:
  BacktrackError(double last_theta, double lhs, double rhs)
      : Error("line search: backtracking limit reached (theta = " + std::to_string(last_theta) +
              ", lhs = " + std::to_string(lhs) + ", rhs = " + std::to_string(rhs) + ")"),
        last_theta_(last_theta),
        lhs_(lhs),
        rhs_(rhs) {}

  double last_theta() const noexcept { return last_theta_; }
  double lhs() const noexcept { return lhs_; }
  double rhs() const noexcept { return rhs_; }

 private:
  double last_theta_;
  double lhs_;
  double rhs_;
};

/// An error raised inside a solver step, tagged with the iteration it occurred in.
class StepError : public Error {
 public:
  StepError(std::int64_t iteration, const std::string& what)
      : Error("iteration " + std::to_string(iteration) + ": " + what), iteration_(iteration) {}

  std::int64_t iteration() const noexcept { return iteration_; }

 private:
  std::int64_t iteration_;
};

/// A reference solution failed its optimality gate.
class ReferenceError : public Error {
 public:
  ReferenceError(const std::string& what, double kkt_residual)
      : Error(what), kkt_residual_(kkt_residual) {}

  double kkt_residual() const noexcept { return kkt_residual_; }

 private:
  double kkt_residual_;
};

}  // namespace bregman

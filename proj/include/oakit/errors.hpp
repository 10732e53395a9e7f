#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace oakit {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Expression evaluated outside its domain (log of a non-positive value, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent problem data.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// LP pivot limit exceeded or numerically singular tableau.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Node limit, enumeration cap or similar resource bound exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// Kelley iteration cap exceeded; carries the best iterate found.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> best_x) : Error(what), best_x_(std::move(best_x)) {}
  const std::vector<double>& best_x() const noexcept { return best_x_; }

 private:
  std::vector<double> best_x_;
};

/// No multipliers reach the stationarity tolerance at the given point.
class KktError : public Error {
 public:
  KktError(const std::string& what, double residual) : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// JSON / CSV input that does not follow the documented schema.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace oakit

// Error taxonomy shared by all ofbf components.
//
// ValidationError covers bad inputs and violated model conditions (CLI exit
// code 1). NumericalError covers quadrature/factorization failures at
// runtime (CLI exit code 2). DomainError is a ValidationError raised when an
// argument lies outside the mathematical domain of an operation.

#pragma once

#include <stdexcept>
#include <string>

namespace ofbf {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& msg) : Error(msg) {}
};

struct DomainError : ValidationError {
  explicit DomainError(const std::string& msg) : ValidationError(msg) {}
};

struct NumericalError : Error {
  explicit NumericalError(const std::string& msg) : Error(msg) {}
  NumericalError(const std::string& msg, double prev, double last)
      : Error(msg), last_estimates{prev, last}, has_estimates(true) {}
  // Last two refinement estimates when a quadrature fails to converge.
  double last_estimates[2] = {0.0, 0.0};
  bool has_estimates = false;
};

}  // namespace ofbf

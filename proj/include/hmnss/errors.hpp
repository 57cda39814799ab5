#pragma once

#include <stdexcept>
#include <string>

namespace hmnss {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : Error {
  using Error::Error;
};

struct NumericalError : Error {
  using Error::Error;
};

struct SingularMatrixError : NumericalError {
  using NumericalError::NumericalError;
};

struct GraphError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct PreconditionError : Error {
  using Error::Error;
};

}  // namespace hmnss

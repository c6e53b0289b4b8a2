#pragma once

#include <stdexcept>
#include <string>

namespace wsnloc {

/// Base class of every error thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid construction parameters (world dimensions, scenario values, ...).
class ConfigError : public Error {
  using Error::Error;
};

/// Lookup of an id that does not exist (node, tower, ...).
class NotFoundError : public Error {
  using Error::Error;
};

/// Caller violated an operation precondition (sizes, dimensions, counts).
class ContractError : public Error {
  using Error::Error;
};

/// Argument outside the mathematical domain of the operation.
class DomainError : public Error {
  using Error::Error;
};

/// No estimate can be produced from the given inputs: underdetermined
/// systems, collinear/coplanar geometry, empty measurement sets, degenerate
/// weight updates.
class EstimateError : public Error {
  using Error::Error;
};

/// Numerical failure (singular innovation covariance, non-convergence).
class NumericalError : public Error {
  using Error::Error;
};

/// Malformed scenario, survey, or store files.
class ParseError : public Error {
  using Error::Error;
};

/// Filesystem failures.
class IoError : public Error {
  using Error::Error;
};

}  // namespace wsnloc

#pragma once

#include <stdexcept>
#include <string>

namespace splitfun {

/// Input outside the mathematical domain of an operation (non-finite
/// coordinates, parameter outside an open image, zero matrix, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Caller violated a precondition: mismatched spaces, empty slices, bad sizes.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A derivative order above what a functional supports analytically.
class UnsupportedOrderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested capability is not available for the given model or family.
class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative solver failed to converge.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid experiment configuration; the message names the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace splitfun

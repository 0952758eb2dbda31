#pragma once

#include <stdexcept>
#include <string>

namespace cbn {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Graph invariant violated: cycle, self-loop, endpoint out of range.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. Messages are prefixed with "<source>:<line>: ".
class InputFormatError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// The intervention is not identifiable: a child of X shares X's c-component.
class IdentifiabilityError : public ContractError {
 public:
  using ContractError::ContractError;
};

/// An exact computation would enumerate more states than allowed.
class GuardError : public ContractError {
 public:
  using ContractError::ContractError;
};

/// A conditional probability was requested on a zero-mass event.
class PositivityError : public ContractError {
 public:
  using ContractError::ContractError;
};

}  // namespace cbn

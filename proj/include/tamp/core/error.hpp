#pragma once

#include <stdexcept>
#include <string>

namespace tamp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

class MalformedSubstitution : public Error {
 public:
  using Error::Error;
};

class InapplicableOperator : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace tamp

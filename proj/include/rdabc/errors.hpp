#ifndef RDABC_ERRORS_HPP_
#define RDABC_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace rdabc {

// Caller violated a documented precondition (bad dimension, non-finite input, ...).
class ContractError : public std::invalid_argument {
 public:
  explicit ContractError(const std::string& what) : std::invalid_argument(what) {}
};

// A model fit was rejected: degenerate data, EM breakdown, or a numerical
// guard tripped.  The message names the offending column or condition.
class FitRejectedError : public std::runtime_error {
 public:
  explicit FitRejectedError(const std::string& what) : std::runtime_error(what) {}
};

// Not enough rows to satisfy a fit precondition.
class InsufficientDataError : public std::runtime_error {
 public:
  explicit InsufficientDataError(const std::string& what) : std::runtime_error(what) {}
};

// Iterative numerics (quadrature, optimizer) failed to converge.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

// Config document failed schema validation.
class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

// Serialized document has the wrong version tag or inconsistent dimensions.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rdabc

#endif  // RDABC_ERRORS_HPP_

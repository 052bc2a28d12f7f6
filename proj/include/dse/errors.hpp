#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dse {

/// Root of every error raised by the exploration engine.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error
{
public:
  using Error::Error;
};

class ResolutionTooSmall : public Error
{
public:
  explicit ResolutionTooSmall(int resolution);
  int resolution;
};

/// Accuracy, parameter count or runtime reached scoring while <= 0.
class NonPositiveInput : public Error
{
public:
  NonPositiveInput(std::string field, double value);
  std::string field;
  double      value;
};

/// Malformed row in a results CSV. Rows are numbered from 1, header excluded.
class ParseError : public Error
{
public:
  ParseError(std::size_t row, const std::string &what);
  std::size_t row;
};

/// Well-formed row whose values violate record invariants.
class ValidationError : public Error
{
public:
  ValidationError(std::size_t row, const std::string &what);
  std::size_t row;
};

// External evaluator failures. Each maps to a distinct FailureKind so the
// search loop can skip-and-log.
class EvaluatorError : public Error
{
public:
  using Error::Error;
};

class Timeout : public EvaluatorError
{
public:
  using EvaluatorError::EvaluatorError;
};

class ProtocolError : public EvaluatorError
{
public:
  using EvaluatorError::EvaluatorError;
};

class ProcessError : public EvaluatorError
{
public:
  ProcessError(const std::string &what, int exit_status);
  int exit_status;
};

/// The evaluator answered with {"error": ...}.
class EvaluatorReported : public EvaluatorError
{
public:
  using EvaluatorError::EvaluatorError;
};

/// Theta requested from a results file that has no row for it.
class MissingResult : public EvaluatorError
{
public:
  using EvaluatorError::EvaluatorError;
};

class EmptyLedger : public Error
{
public:
  EmptyLedger() : Error("ledger contains no successful entries") {}
};

class LedgerError : public Error
{
public:
  using Error::Error;
};

}  // namespace dse

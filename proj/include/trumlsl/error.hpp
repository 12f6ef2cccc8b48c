#pragma once

#include <stdexcept>
#include <string>

namespace trumlsl {

enum class ErrorCode {
  DuplicateSegment,
  DanglingEdge,
  NonPositiveLength,
  UnknownSegment,
  IllegalStep,
  EmptyPath,
  PathExhausted,
  NonPositiveDuration,
  NoCrossingAhead,
  NothingToPromote,
  NotNeighbouring,
  PositionOutOfRange,
  UnknownCar,
  UnknownObjectKind,
  SplitOutOfRange,
  IndexOutOfRange,
  SyntaxError,
  UnboundVariable,
  SortMismatch,
  InvariantViolation,
  UnboundProposition,
  ParseError,
  ValidationError,
  Overflow,
  InvalidState,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateSegment: return "DuplicateSegment";
    case ErrorCode::DanglingEdge: return "DanglingEdge";
    case ErrorCode::NonPositiveLength: return "NonPositiveLength";
    case ErrorCode::UnknownSegment: return "UnknownSegment";
    case ErrorCode::IllegalStep: return "IllegalStep";
    case ErrorCode::EmptyPath: return "EmptyPath";
    case ErrorCode::PathExhausted: return "PathExhausted";
    case ErrorCode::NonPositiveDuration: return "NonPositiveDuration";
    case ErrorCode::NoCrossingAhead: return "NoCrossingAhead";
    case ErrorCode::NothingToPromote: return "NothingToPromote";
    case ErrorCode::NotNeighbouring: return "NotNeighbouring";
    case ErrorCode::PositionOutOfRange: return "PositionOutOfRange";
    case ErrorCode::UnknownCar: return "UnknownCar";
    case ErrorCode::UnknownObjectKind: return "UnknownObjectKind";
    case ErrorCode::SplitOutOfRange: return "SplitOutOfRange";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnboundVariable: return "UnboundVariable";
    case ErrorCode::SortMismatch: return "SortMismatch";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::UnboundProposition: return "UnboundProposition";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::InvalidState: return "InvalidState";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and tests) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Positioned syntax error for the formula and LTL parsers.
class SyntaxError : public Error {
 public:
  SyntaxError(int line, int column, const std::string& expected)
      : Error(ErrorCode::SyntaxError, std::to_string(line) + ":" + std::to_string(column) +
                                          ": expected " + expected),
        line_(line), column_(column), expected_(expected) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  int line_;
  int column_;
  std::string expected_;
};

}  // namespace trumlsl

#pragma once

#include <stdexcept>
#include <string>

namespace esback {

// Invalid argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
  explicit DomainError(const std::string& msg) : std::domain_error(msg) {}
};

// Two series that must be aligned have different lengths.
struct LengthMismatch : std::invalid_argument {
  explicit LengthMismatch(const std::string& msg) : std::invalid_argument(msg) {}
};

// A value falls outside its permitted integer range.
struct RangeError : std::out_of_range {
  explicit RangeError(const std::string& msg) : std::out_of_range(msg) {}
};

// The requested statistic is undefined for this data configuration.
struct DegenerateError : std::runtime_error {
  explicit DegenerateError(const std::string& msg) : std::runtime_error(msg) {}
};

// An iterative fit failed to converge within its iteration budget.
struct ConvergenceError : std::runtime_error {
  explicit ConvergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

// A requested quantity is not finite for the given parameters.
struct NonfiniteError : std::runtime_error {
  explicit NonfiniteError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input file; carries a 1-based line number when known.
struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, long line = -1)
      : std::runtime_error(line >= 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
        line_number(line) {}
  long line_number;
};

}  // namespace esback

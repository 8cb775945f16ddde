#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace consroute {

enum class ErrorKind {
  parse,
  dimension_mismatch,
  duplicate_id,
  out_of_range,
  missing_score,
  missing_tier,
  invalid_config,
  empty_input,
  training_diverged,
  numerical,
  integrity,
  io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Malformed input line; `line()` is 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error(ErrorKind::parse, "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace consroute

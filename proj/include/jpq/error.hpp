#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace jpq {

enum class ErrorKind {
  invalid_argument,  // precondition on caller-supplied values
  domain,            // model evaluated outside its validity domain
  threshold,         // parametric-oscillation threshold reached
  not_converged,     // optimizer gave up
  unphysical,        // fit landed on a physically meaningless value
  parse,             // malformed file contents
  io,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::domain: return "domain";
    case ErrorKind::threshold: return "threshold";
    case ErrorKind::not_converged: return "not_converged";
    case ErrorKind::unphysical: return "unphysical";
    case ErrorKind::parse: return "parse";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

/// Base exception for the library. `stage` is filled in by multi-stage
/// pipelines (e.g. the reflection fit) when an error passes through them.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& stage() const noexcept { return stage_; }
  void set_stage(std::string stage) { stage_ = std::move(stage); }

 private:
  ErrorKind kind_;
  std::string stage_;
};

/// Model evaluated outside its domain; carries the offending input value.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, double value, ErrorKind kind = ErrorKind::domain)
      : Error(kind, what), value_(value) {}
  double value() const noexcept { return value_; }

 private:
  double value_;
};

/// Parse failure with 1-based row/column (0 when not applicable).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t column)
      : Error(ErrorKind::parse, what), row_(row), column_(column) {}
  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw Error(ErrorKind::invalid_argument, what);
}

}  // namespace jpq

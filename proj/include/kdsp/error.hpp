#pragma once

#include <stdexcept>
#include <string>

namespace kdsp {

/// Failure category. Each maps to a distinct CLI exit code.
enum class ErrorKind {
  config,    ///< parameter out of range, inconsistent arguments
  parse,     ///< malformed input file
  cap,       ///< dimension / qubit cap exceeded
  numerical  ///< not a basis, search failure, empty target set, ...
};

inline const char *to_string(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::config:
    return "config";
  case ErrorKind::parse:
    return "parse";
  case ErrorKind::cap:
    return "cap";
  case ErrorKind::numerical:
    return "numerical";
  }
  return "unknown";
}

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string &what) {
  throw Error(kind, what);
}

inline void require(bool cond, ErrorKind kind, const std::string &what) {
  if (!cond)
    fail(kind, what);
}

} // namespace kdsp

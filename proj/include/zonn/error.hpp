#pragma once

#include <stdexcept>
#include <string>

namespace zonn {

enum class ErrorKind {
  shape,       // dimension mismatch between model and input
  domain,      // input outside [0,1]^d
  parameter,   // invalid argument (negative radius, k = 0, ...)
  data,        // invalid dataset or labels
  parse,       // malformed file
  validation,  // well-formed file with invalid content
  io,
  numeric,     // non-finite intermediate value
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::shape: return "shape error";
    case ErrorKind::domain: return "input-domain error";
    case ErrorKind::parameter: return "parameter error";
    case ErrorKind::data: return "data error";
    case ErrorKind::parse: return "parse error";
    case ErrorKind::validation: return "validation error";
    case ErrorKind::io: return "I/O error";
    case ErrorKind::numeric: return "numeric error";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// Message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

  /// Process exit code used by the command-line tool.
  int exit_code() const noexcept {
    switch (kind_) {
      case ErrorKind::io: return 3;
      case ErrorKind::numeric: return 4;
      default: return 2;
    }
  }

 private:
  ErrorKind kind_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace zonn

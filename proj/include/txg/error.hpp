#pragma once

#include <stdexcept>
#include <string>

namespace txg {

/// Broad error classes. Each maps to a distinct process exit code in the CLI.
enum class ErrorKind {
  kMalformedRecord,
  kMissingField,
  kUnknownAccount,
  kClusterOverlap,
  kPartialColoring,
  kConfig,
  kIo,
  kConsistency,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised by the record parser. `line` is 1-based; 0 when unknown.
class RecordError : public Error {
 public:
  RecordError(ErrorKind kind, std::size_t line, const std::string& reason)
      : Error(kind, "line " + std::to_string(line) + ": " + reason),
        line_(line),
        reason_(reason) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

int exit_code(ErrorKind kind) noexcept;
const char* to_string(ErrorKind kind) noexcept;

}  // namespace txg

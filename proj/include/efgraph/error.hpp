#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace efg {

/// Failure categories shared by the C++ core and the C API status codes.
enum class ErrorKind : std::uint8_t {
  kParse = 1,
  kValue,
  kDuplicate,
  kRange,
  kOrder,
  kBound,
  kIo,
  kConfig,
  kDistribution,
  kInfeasible,
  kDivergence,
  kDegenerate,
  kContract,
  kShape,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Error raised while reading an input file; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(ErrorKind kind, std::uint64_t line, const std::string& message)
      : Error(kind, "line " + std::to_string(line) + ": " + message), line_(line) {}

  std::uint64_t line() const noexcept { return line_; }

 private:
  std::uint64_t line_;
};

/// Error raised by a pipeline stage; `stage()` names the failing step.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.kind(), stage + ": " + cause.what()), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace efg

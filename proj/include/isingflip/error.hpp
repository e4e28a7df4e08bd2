#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace isingflip {

enum class ErrorKind {
  kInvalidArgument,
  kOutOfRange,
  kParse,
  kInsufficientSamples,
  kTooLarge,
  kInfeasible,
  kIo,
};

const char* to_string(ErrorKind kind) noexcept;

/// Base error for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Malformed serialized input. `line` is 1-based for text formats and 0 for
/// binary; `offset` is a byte offset (within the line for text formats).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t offset);

  std::size_t line() const noexcept { return line_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t line_;
  std::size_t offset_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

}  // namespace isingflip

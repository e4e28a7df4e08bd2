#include "isingflip/error.hpp"

namespace isingflip {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kInvalidArgument:
      return "invalid argument";
    case ErrorKind::kOutOfRange:
      return "out of range";
    case ErrorKind::kParse:
      return "parse error";
    case ErrorKind::kInsufficientSamples:
      return "insufficient samples";
    case ErrorKind::kTooLarge:
      return "too large";
    case ErrorKind::kInfeasible:
      return "infeasible";
    case ErrorKind::kIo:
      return "i/o error";
  }
  return "unknown";
}

ParseError::ParseError(const std::string& what, std::size_t line, std::size_t offset)
    : Error(ErrorKind::kParse, what + " (line " + std::to_string(line) + ", offset " +
                                   std::to_string(offset) + ")"),
      line_(line),
      offset_(offset) {}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace isingflip

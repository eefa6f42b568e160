#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vqseg {

// Raised when a caller breaks an operation's precondition (bad dimensions,
// out-of-range indices, unresolved ids). The CLI maps this to exit code 1.
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// File-system level failure (missing file, unwritable output). Exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed file content. Carries the byte offset at which parsing failed.
class ParseError : public IoError {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : IoError(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace vqseg

#pragma once

#include <stdexcept>
#include <string>

namespace ideal {

enum class ErrorKind {
  usage,       // bad flags or arguments
  validation,  // malformed input data
  io,          // file could not be opened, read or written
};

// Single exception type for the library. The kind maps onto CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail_usage(const std::string& what) {
  throw Error(ErrorKind::usage, what);
}
[[noreturn]] inline void fail_validation(const std::string& what) {
  throw Error(ErrorKind::validation, what);
}
[[noreturn]] inline void fail_io(const std::string& what) {
  throw Error(ErrorKind::io, what);
}

}  // namespace ideal

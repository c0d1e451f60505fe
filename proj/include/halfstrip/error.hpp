#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace halfstrip {

enum class ErrorCode {
  InvalidArgument,
  Validation,
  NonConvergent,
  NotIrreducible,
  SingularSystem,
  NoReturn,
  HypothesisFailed,
  Parse,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Base exception for everything the library throws on purpose.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace halfstrip

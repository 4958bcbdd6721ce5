#pragma once

#include <stdexcept>
#include <string>

namespace nrfse {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  EmptySupport,
  Io,
  Config,
  Usage,
};

inline const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "E_ARGUMENT";
    case ErrorCode::DimensionMismatch: return "E_DIMENSION";
    case ErrorCode::EmptySupport: return "E_SUPPORT";
    case ErrorCode::Io: return "E_IO";
    case ErrorCode::Config: return "E_CONFIG";
    case ErrorCode::Usage: return "E_USAGE";
  }
  return "E_UNKNOWN";
}

// Every failure raised by the library carries a stable, machine-parsable code.
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

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace nrfse

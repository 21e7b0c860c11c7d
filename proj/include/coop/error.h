#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace coop {

enum class ErrorCode {
  ParseError,
  ValidationError,
  NotFound,
  FrozenMarketplace,
  OutsideWindow,
  DuplicateId,
  AlreadyFrozen,
  SelfIntegration,
  ModuleRemoved,
  UnknownScope,
  Unauthorized,
  CatalogMismatch,
  EmptyAttempts,
  SelfRoyalty,
  AttemptLimitExceeded,
  EventNotStarted,
  SessionClosed,
  DeadlineExpired,
  MutualExclusionViolation,
  InvalidPin,
  InvalidTask,
  DegenerateDomain,
  UnsupportedFormat,
  ConfigError,
  BindError,
};

std::string_view to_string(ErrorCode code);

// Every domain failure surfaces as a coop::Error carrying a stable code.
// The HTTP layer maps codes onto status classes; the CLI prints them.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace coop

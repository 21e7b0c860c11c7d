#include "coop/error.h"

namespace coop {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::FrozenMarketplace: return "FrozenMarketplace";
    case ErrorCode::OutsideWindow: return "OutsideWindow";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::AlreadyFrozen: return "AlreadyFrozen";
    case ErrorCode::SelfIntegration: return "SelfIntegration";
    case ErrorCode::ModuleRemoved: return "ModuleRemoved";
    case ErrorCode::UnknownScope: return "UnknownScope";
    case ErrorCode::Unauthorized: return "Unauthorized";
    case ErrorCode::CatalogMismatch: return "CatalogMismatch";
    case ErrorCode::EmptyAttempts: return "EmptyAttempts";
    case ErrorCode::SelfRoyalty: return "SelfRoyalty";
    case ErrorCode::AttemptLimitExceeded: return "AttemptLimitExceeded";
    case ErrorCode::EventNotStarted: return "EventNotStarted";
    case ErrorCode::SessionClosed: return "SessionClosed";
    case ErrorCode::DeadlineExpired: return "DeadlineExpired";
    case ErrorCode::MutualExclusionViolation: return "MutualExclusionViolation";
    case ErrorCode::InvalidPin: return "InvalidPin";
    case ErrorCode::InvalidTask: return "InvalidTask";
    case ErrorCode::DegenerateDomain: return "DegenerateDomain";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::BindError: return "BindError";
  }
  return "Unknown";
}

}  // namespace coop

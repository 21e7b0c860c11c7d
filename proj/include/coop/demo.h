#pragma once

#include "coop/runtime.h"

#include <string>
#include <vector>

namespace coop::demo {

// Tokens provisioned for the demo principals.
inline constexpr const char* kCommitteeToken = "tc-token";
inline constexpr const char* kRefereeToken = "ref-token";
inline constexpr const char* kEvaluatorToken = "eval-token";

inline constexpr const char* kFreezeAt = "2024-11-25T08:00:00Z";

// Team token is "<team id>-token".
std::string team_token(const std::string& team_id);

// Fifteen teams across the three leagues, three upload windows receiving 24,
// 32 and 34 modules, integrations declared before and after the freeze, and
// a set of scored attempts.
Event build_event();
std::vector<LedgerEntry> ledger();

}  // namespace coop::demo

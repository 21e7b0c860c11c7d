#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace coop {

enum class Role { Team, Referee, TechnicalCommittee, ExternalEvaluator };

std::string_view to_string(Role role);
std::optional<Role> parse_role(std::string_view text);

// The principal performing an operation. For team principals the id is the
// team id.
struct Actor {
  std::string id;
  std::set<Role> roles;

  bool has(Role role) const { return roles.contains(role); }
};

}  // namespace coop

#include "coop/roles.h"

namespace coop {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::Team: return "team";
    case Role::Referee: return "referee";
    case Role::TechnicalCommittee: return "technical_committee";
    case Role::ExternalEvaluator: return "external_evaluator";
  }
  return "team";
}

std::optional<Role> parse_role(std::string_view text) {
  if (text == "team") return Role::Team;
  if (text == "referee") return Role::Referee;
  if (text == "technical_committee" || text == "committee") return Role::TechnicalCommittee;
  if (text == "external_evaluator" || text == "evaluator") return Role::ExternalEvaluator;
  return std::nullopt;
}

}  // namespace coop

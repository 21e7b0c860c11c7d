#pragma once

#include "coop/exact.h"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace coop {

enum class MilestoneType { Navigation, CommandUnderstanding, Manipulation, Perception, Other };

std::string_view to_string(MilestoneType type);
std::optional<MilestoneType> parse_milestone_type(std::string_view text);

// Milestone conditional level: how the milestone was solved (l in [0,1]).
struct ConditionalLevel {
  std::string id;
  std::string description;
  Exact factor;

  bool operator==(const ConditionalLevel&) const = default;
};

struct Penalty {
  std::string id;
  std::string description;
  std::int64_t points = 0;

  bool operator==(const Penalty&) const = default;
};

// Task conditional level (T in [0,1]). `pinned_variables` ties the level to
// the number of command variables a team fixed in advance, where the league
// uses generated commands.
struct TaskLevel {
  std::string id;
  std::string description;
  Exact factor;
  std::optional<int> pinned_variables;

  bool operator==(const TaskLevel&) const = default;
};

struct MilestoneSpec {
  std::string id;
  int number = 0;
  std::string description;
  MilestoneType type = MilestoneType::Other;
  std::int64_t base_score = 0;
  std::vector<ConditionalLevel> levels;
  std::vector<Penalty> penalties;
  // Sibling milestones sharing a non-empty group are alternatives: at most
  // one of them may succeed within an attempt.
  std::string exclusive_group;

  const ConditionalLevel* find_level(std::string_view level_id) const;
  const Penalty* find_penalty(std::string_view penalty_id) const;

  bool operator==(const MilestoneSpec&) const = default;
};

struct TaskSpec {
  std::string id;
  std::string name;
  std::vector<MilestoneSpec> milestones;

  const MilestoneSpec* find_milestone(std::string_view milestone_id) const;
  std::int64_t total_base_score() const;

  bool operator==(const TaskSpec&) const = default;
};

struct LeagueSpec {
  std::string id;
  std::string name;
  std::vector<TaskSpec> tasks;
  std::vector<TaskLevel> task_levels;
  Exact default_royalty{1, 4};
  int attempt_limit = 3;
  std::chrono::seconds attempt_duration{600};

  const TaskSpec* find_task(std::string_view task_id) const;
  // Matches by id, then exact description, then a unique description prefix.
  const TaskLevel* find_task_level(std::string_view key) const;
  const TaskLevel* task_level_for_pins(int pinned) const;

  bool operator==(const LeagueSpec&) const = default;
};

struct Rulebook {
  std::string version;
  std::vector<LeagueSpec> leagues;

  const LeagueSpec* find_league(std::string_view league_id) const;

  bool operator==(const Rulebook&) const = default;
};

struct Diagnostic {
  std::string path;
  std::string message;
};

// Parses and validates a rulebook document. Type-level catalogs
// ("type_catalogs") are expanded into each milestone of that type, ahead of
// levels and penalties declared on the milestone itself.
// Throws Error{ParseError} for shape problems and Error{ValidationError} for
// range/identity violations; the message starts with the offending path.
Rulebook load_rulebook(const nlohmann::json& document);
Rulebook load_rulebook_text(std::string_view text);
Rulebook load_rulebook_file(const std::string& path);

// The bundled league documents ("irl", "srl", "orl").
Rulebook bundled_rulebook(std::string_view league_id);
// All bundled leagues merged into one rulebook.
Rulebook bundled_rulebooks();

// Combines single-league documents; league ids must stay unique.
Rulebook merge_rulebooks(std::span<const Rulebook> parts);

// Expanded form: every milestone carries its own levels and penalties.
nlohmann::json to_json(const Rulebook& rulebook);

// Non-fatal findings, e.g. milestones that cannot be scored at full autonomy
// because no conditional level reaches 1.0.
std::vector<Diagnostic> rulebook_warnings(const Rulebook& rulebook);

const MilestoneSpec& lookup_milestone(const Rulebook& rulebook, std::string_view league_id,
                                      std::string_view task_id, std::string_view milestone_id);

Exact task_conditional_factor(const Rulebook& rulebook, std::string_view league_id,
                              std::string_view level_description);

}  // namespace coop

#pragma once

#include "coop/exact.h"
#include "coop/rulebook.h"
#include "coop/timestamp.h"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace coop {

// Referee-entered outcome for one milestone of an attempt.
struct MilestoneResult {
  std::string milestone_id;
  bool success = false;
  // Conditional level id from the milestone's catalog (gives l).
  std::string level_id;
  // Subjective score q in [0,10], one decimal place.
  Exact subjective_score{0};
  // One entry per penalty occurrence; repeated ids accumulate.
  std::vector<std::string> penalty_ids;
  // Verified external modules used for this milestone (gives M_n).
  std::set<std::string> external_module_ids;

  bool operator==(const MilestoneResult&) const = default;
};

struct AttemptRecord {
  std::string id;
  std::string team_id;
  std::string league_id;
  std::string task_id;
  int attempt_number = 1;
  std::string task_level_id;
  std::vector<MilestoneResult> results;
  Timestamp started_at{};
  Timestamp closed_at{};

  const MilestoneResult* find_result(std::string_view milestone_id) const;
  bool operator==(const AttemptRecord&) const = default;
};

// Marketplace facts the formulas need about a module in use.
struct ModuleTerms {
  Exact royalty_rate;
  std::set<std::string> developer_team_ids;
};

using ModuleCatalog = std::map<std::string, ModuleTerms, std::less<>>;

struct MilestoneBreakdown {
  std::string milestone_id;
  bool success = false;
  Exact level_factor;
  Exact subjective_score;
  std::int64_t penalty_points = 0;
  std::vector<std::string> external_modules;
  Exact score;         // MS_n, may be negative
  Exact retention;     // 1 - I_transfer * sum(r) / M_n
  Exact contribution;  // T * retention * max(0, MS_n)
};

struct TaskScore {
  Exact task_factor;
  std::vector<MilestoneBreakdown> milestones;
  Exact total;
};

struct RoyaltySource {
  std::string user_team_id;
  std::string league_id;
  std::string task_id;
  std::string milestone_id;
  std::string module_id;
  std::string attempt_id;

  auto operator<=>(const RoyaltySource&) const = default;
};

struct RoyaltyEntry {
  std::string developer_team_id;
  RoyaltySource source;
  Exact amount;
};

// Everything persisted about a closed attempt.
struct ScoreBreakdown {
  AttemptRecord attempt;
  TaskScore task;
  std::int64_t penalty_points = 0;
  // Payouts this attempt would generate; they only accrue while the attempt
  // is the counted (best) one for its team and task.
  std::vector<RoyaltyEntry> royalties;
};

// 1 + q/50, in [1, 1.2] for valid q.
Exact subjective_factor(const Exact& q);

// Throws Error{ValidationError} unless 0 <= q <= 10 with one decimal place.
void validate_subjective_score(const Exact& q);

// Sum of penalty points over every occurrence in the result.
std::int64_t penalty_points(const MilestoneSpec& spec, const MilestoneResult& result);

// MS_n for one milestone. `external_modules` is M_n.
Exact milestone_score(const MilestoneSpec& spec, const MilestoneResult& result, std::size_t external_modules);

// Modules counted toward M_n for a result: those listed, minus anything the
// user team co-developed. Throws Error{CatalogMismatch} for unknown ids.
std::vector<std::string> counted_modules(const MilestoneResult& result, const std::string& user_team_id,
                                         const ModuleCatalog& catalog);

TaskScore task_score(const LeagueSpec& league, const TaskSpec& task, const AttemptRecord& attempt,
                     const ModuleCatalog& catalog);

std::vector<RoyaltyEntry> royalty_for_developer(const std::string& developer_team_id, const AttemptRecord& attempt,
                                                const TaskScore& score, const ModuleCatalog& catalog);

// Entries for every developer team credited by the attempt, ordered by
// developer id, then milestone, then module.
std::vector<RoyaltyEntry> royalties_for_attempt(const AttemptRecord& attempt, const TaskScore& score,
                                                const ModuleCatalog& catalog);

ScoreBreakdown score_attempt(const LeagueSpec& league, const TaskSpec& task, const AttemptRecord& attempt,
                             const ModuleCatalog& catalog);

// Index of the counted attempt: highest score, then fewer penalty points,
// then earlier close. Throws Error{EmptyAttempts}.
std::size_t best_attempt(const TaskSpec& task, std::span<const AttemptRecord> attempts,
                         std::span<const Exact> scores);

Exact challenge_score(std::span<const Exact> task_scores);
Exact royalties_total(std::span<const RoyaltyEntry> entries);
Exact coopetition_score(const Exact& challenge, const Exact& royalties);

nlohmann::json to_json(const MilestoneResult& r);
MilestoneResult milestone_result_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AttemptRecord& a);
nlohmann::json to_json(const RoyaltyEntry& e);
nlohmann::json to_json(const ScoreBreakdown& b);

}  // namespace coop

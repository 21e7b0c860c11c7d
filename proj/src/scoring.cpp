#include "coop/scoring.h"

#include "coop/error.h"
#include "json_util.h"

#include <algorithm>
#include <map>

namespace coop {

using nlohmann::json;

const MilestoneResult* AttemptRecord::find_result(std::string_view milestone_id) const {
  for (const auto& r : results) {
    if (r.milestone_id == milestone_id) return &r;
  }
  return nullptr;
}

Exact subjective_factor(const Exact& q) {
  return Exact(1) + q / 50;
}

void validate_subjective_score(const Exact& q) {
  if (q < 0 || q > 10) fail(ErrorCode::ValidationError, "subjective score " + to_fixed(q, 2) + " outside [0,10]");
  if (boost::multiprecision::denominator(Exact(q * 10)) != 1) {
    fail(ErrorCode::ValidationError, "subjective score has more than one decimal place");
  }
}

std::int64_t penalty_points(const MilestoneSpec& spec, const MilestoneResult& result) {
  std::int64_t total = 0;
  for (const auto& id : result.penalty_ids) {
    const auto* p = spec.find_penalty(id);
    if (!p) fail(ErrorCode::CatalogMismatch, "penalty '" + id + "' is not in the catalog of " + spec.id);
    total += p->points;
  }
  return total;
}

Exact milestone_score(const MilestoneSpec& spec, const MilestoneResult& result, std::size_t external_modules) {
  if (result.milestone_id != spec.id) {
    fail(ErrorCode::CatalogMismatch, "result for '" + result.milestone_id + "' scored against " + spec.id);
  }
  const ConditionalLevel* level = nullptr;
  if (!result.level_id.empty()) {
    level = spec.find_level(result.level_id);
    if (!level) fail(ErrorCode::CatalogMismatch, "level '" + result.level_id + "' is not in the catalog of " + spec.id);
  }
  validate_subjective_score(result.subjective_score);
  const auto p = penalty_points(spec, result);
  if (!result.success) return Exact(0);
  if (!level) fail(ErrorCode::CatalogMismatch, "successful result for " + spec.id + " has no conditional level");

  Exact ms = level->factor * (Exact(spec.base_score) * subjective_factor(result.subjective_score) - Exact(p));
  if (external_modules > 0) ms *= 10;
  return ms;
}

std::vector<std::string> counted_modules(const MilestoneResult& result, const std::string& user_team_id,
                                         const ModuleCatalog& catalog) {
  std::vector<std::string> out;
  for (const auto& id : result.external_module_ids) {
    auto it = catalog.find(id);
    if (it == catalog.end()) fail(ErrorCode::CatalogMismatch, "module '" + id + "' unknown to the marketplace view");
    if (it->second.developer_team_ids.contains(user_team_id)) continue;
    out.push_back(id);
  }
  return out;
}

namespace {

void check_results(const TaskSpec& task, const AttemptRecord& attempt) {
  std::set<std::string> seen;
  std::map<std::string, int> group_successes;
  for (const auto& r : attempt.results) {
    const auto* spec = task.find_milestone(r.milestone_id);
    if (!spec) fail(ErrorCode::CatalogMismatch, "milestone '" + r.milestone_id + "' is not part of task " + task.id);
    if (!seen.insert(r.milestone_id).second) {
      fail(ErrorCode::ValidationError, "duplicate result for milestone '" + r.milestone_id + "'");
    }
    if (r.success && !spec->exclusive_group.empty() && ++group_successes[spec->exclusive_group] > 1) {
      fail(ErrorCode::MutualExclusionViolation,
           "more than one milestone of group '" + spec->exclusive_group + "' marked successful");
    }
  }
}

}  // namespace

TaskScore task_score(const LeagueSpec& league, const TaskSpec& task, const AttemptRecord& attempt,
                     const ModuleCatalog& catalog) {
  const auto* level = league.find_task_level(attempt.task_level_id);
  if (!level) {
    fail(ErrorCode::CatalogMismatch, "task conditional level '" + attempt.task_level_id + "' unknown in " + league.id);
  }
  check_results(task, attempt);

  TaskScore out;
  out.task_factor = level->factor;
  out.total = 0;
  for (const auto& spec : task.milestones) {
    MilestoneBreakdown mb;
    mb.milestone_id = spec.id;
    mb.level_factor = 0;
    mb.subjective_score = 0;
    mb.score = 0;
    mb.retention = 1;
    mb.contribution = 0;
    if (const auto* result = attempt.find_result(spec.id)) {
      mb.external_modules = counted_modules(*result, attempt.team_id, catalog);
      const auto m_n = mb.external_modules.size();
      mb.success = result->success;
      mb.subjective_score = result->subjective_score;
      mb.penalty_points = penalty_points(spec, *result);
      if (const auto* l = spec.find_level(result->level_id)) mb.level_factor = l->factor;
      mb.score = milestone_score(spec, *result, m_n);
      if (m_n > 0) {
        Exact rate_sum = 0;
        for (const auto& id : mb.external_modules) rate_sum += catalog.find(id)->second.royalty_rate;
        mb.retention = Exact(1) - rate_sum / Exact(m_n);
      }
      const Exact clamped = mb.score > 0 ? mb.score : Exact(0);
      mb.contribution = out.task_factor * mb.retention * clamped;
    }
    out.total += mb.contribution;
    out.milestones.push_back(std::move(mb));
  }
  return out;
}

std::vector<RoyaltyEntry> royalty_for_developer(const std::string& developer_team_id, const AttemptRecord& attempt,
                                                const TaskScore& score, const ModuleCatalog& catalog) {
  if (developer_team_id == attempt.team_id) {
    fail(ErrorCode::SelfRoyalty, "team '" + developer_team_id + "' cannot earn royalties from its own attempt");
  }
  std::vector<RoyaltyEntry> out;
  for (const auto& mb : score.milestones) {
    const auto m_n = mb.external_modules.size();
    if (m_n == 0 || mb.score <= 0) continue;
    for (const auto& module_id : mb.external_modules) {
      const auto& terms = catalog.find(module_id)->second;
      if (!terms.developer_team_ids.contains(developer_team_id)) continue;
      const Exact t_k(static_cast<long long>(terms.developer_team_ids.size()));
      Exact amount = terms.royalty_rate / t_k / Exact(m_n) * mb.score;
      if (amount == 0) continue;
      out.push_back({developer_team_id,
                     {attempt.team_id, attempt.league_id, attempt.task_id, mb.milestone_id, module_id, attempt.id},
                     std::move(amount)});
    }
  }
  return out;
}

std::vector<RoyaltyEntry> royalties_for_attempt(const AttemptRecord& attempt, const TaskScore& score,
                                                const ModuleCatalog& catalog) {
  std::set<std::string> developers;
  for (const auto& mb : score.milestones) {
    for (const auto& id : mb.external_modules) {
      for (const auto& d : catalog.find(id)->second.developer_team_ids) developers.insert(d);
    }
  }
  developers.erase(attempt.team_id);
  std::vector<RoyaltyEntry> out;
  for (const auto& d : developers) {
    auto entries = royalty_for_developer(d, attempt, score, catalog);
    std::move(entries.begin(), entries.end(), std::back_inserter(out));
  }
  return out;
}

ScoreBreakdown score_attempt(const LeagueSpec& league, const TaskSpec& task, const AttemptRecord& attempt,
                             const ModuleCatalog& catalog) {
  ScoreBreakdown b;
  b.attempt = attempt;
  b.task = task_score(league, task, attempt, catalog);
  for (const auto& mb : b.task.milestones) b.penalty_points += mb.penalty_points;
  b.royalties = royalties_for_attempt(attempt, b.task, catalog);
  return b;
}

std::size_t best_attempt(const TaskSpec& task, std::span<const AttemptRecord> attempts,
                         std::span<const Exact> scores) {
  if (attempts.empty()) fail(ErrorCode::EmptyAttempts, "no attempts to choose from");
  if (attempts.size() != scores.size()) fail(ErrorCode::ValidationError, "one score per attempt required");

  auto total_penalties = [&](const AttemptRecord& a) {
    std::int64_t sum = 0;
    for (const auto& r : a.results) {
      if (const auto* spec = task.find_milestone(r.milestone_id)) sum += penalty_points(*spec, r);
    }
    return sum;
  };

  std::size_t best = 0;
  std::int64_t best_penalty = total_penalties(attempts[0]);
  for (std::size_t i = 1; i < attempts.size(); ++i) {
    const auto pen = total_penalties(attempts[i]);
    bool better = false;
    if (scores[i] != scores[best]) {
      better = scores[i] > scores[best];
    } else if (pen != best_penalty) {
      better = pen < best_penalty;
    } else {
      better = attempts[i].closed_at < attempts[best].closed_at;
    }
    if (better) {
      best = i;
      best_penalty = pen;
    }
  }
  return best;
}

Exact challenge_score(std::span<const Exact> task_scores) {
  Exact sum = 0;
  for (const auto& s : task_scores) sum += s;
  return sum;
}

Exact royalties_total(std::span<const RoyaltyEntry> entries) {
  Exact sum = 0;
  for (const auto& e : entries) sum += e.amount;
  return sum;
}

Exact coopetition_score(const Exact& challenge, const Exact& royalties) {
  return challenge + royalties;
}

json to_json(const MilestoneResult& r) {
  return {{"milestone_id", r.milestone_id},
          {"success", r.success},
          {"level_id", r.level_id},
          {"subjective_score", to_decimal_json(r.subjective_score)},
          {"penalty_ids", r.penalty_ids},
          {"external_module_ids", r.external_module_ids}};
}

MilestoneResult milestone_result_from_json(const json& j) {
  using namespace detail;
  MilestoneResult r;
  r.milestone_id = get_string(j, "milestone_id");
  r.success = has(j, "success") ? get_bool(j, "success") : false;
  r.level_id = get_string_or(j, "level_id", "");
  r.subjective_score = has(j, "subjective_score") ? get_exact(j, "subjective_score") : Exact(0);
  try {
    if (has(j, "penalty_ids")) r.penalty_ids = j.at("penalty_ids").get<std::vector<std::string>>();
    if (has(j, "external_module_ids")) {
      r.external_module_ids = j.at("external_module_ids").get<std::set<std::string>>();
    }
  } catch (const json::exception&) {
    fail(ErrorCode::ParseError, "penalty_ids / external_module_ids must be string arrays");
  }
  return r;
}

json to_json(const AttemptRecord& a) {
  json results = json::array();
  for (const auto& r : a.results) results.push_back(to_json(r));
  return {{"id", a.id},
          {"team_id", a.team_id},
          {"league_id", a.league_id},
          {"task_id", a.task_id},
          {"attempt_number", a.attempt_number},
          {"task_level_id", a.task_level_id},
          {"results", std::move(results)},
          {"started_at", format_timestamp(a.started_at)},
          {"closed_at", format_timestamp(a.closed_at)}};
}

json to_json(const RoyaltyEntry& e) {
  return {{"developer_team_id", e.developer_team_id},
          {"source",
           {{"user_team_id", e.source.user_team_id},
            {"league_id", e.source.league_id},
            {"task_id", e.source.task_id},
            {"milestone_id", e.source.milestone_id},
            {"module_id", e.source.module_id},
            {"attempt_id", e.source.attempt_id}}},
          {"amount", to_audit_json(e.amount)}};
}

json to_json(const ScoreBreakdown& b) {
  json milestones = json::array();
  for (const auto& m : b.task.milestones) {
    milestones.push_back({{"milestone_id", m.milestone_id},
                          {"success", m.success},
                          {"level_factor", to_decimal_json(m.level_factor)},
                          {"subjective_score", to_decimal_json(m.subjective_score)},
                          {"penalty_points", m.penalty_points},
                          {"external_modules", m.external_modules},
                          {"score", to_audit_json(m.score)},
                          {"retention", to_audit_json(m.retention)},
                          {"contribution", to_audit_json(m.contribution)}});
  }
  json royalties = json::array();
  for (const auto& e : b.royalties) royalties.push_back(to_json(e));
  return {{"attempt_id", b.attempt.id},
          {"team_id", b.attempt.team_id},
          {"league_id", b.attempt.league_id},
          {"task_id", b.attempt.task_id},
          {"attempt_number", b.attempt.attempt_number},
          {"task_level_id", b.attempt.task_level_id},
          {"task_factor", to_decimal_json(b.task.task_factor)},
          {"closed_at", format_timestamp(b.attempt.closed_at)},
          {"penalty_points", b.penalty_points},
          {"milestones", std::move(milestones)},
          {"s_task", to_audit_json(b.task.total)},
          {"royalties", std::move(royalties)}};
}

}  // namespace coop

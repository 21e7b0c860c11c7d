#include "coop/runtime.h"

#include "coop/error.h"
#include "json_util.h"

#include <algorithm>

namespace coop {

using nlohmann::json;

std::string_view to_string(SessionState s) {
  switch (s) {
    case SessionState::Setup: return "setup";
    case SessionState::Running: return "running";
    case SessionState::Closed: return "closed";
  }
  return "setup";
}

OutcomeUpdate outcome_update_from_json(const json& j) {
  using namespace detail;
  OutcomeUpdate u;
  u.milestone_id = get_string(j, "milestone_id");
  if (has(j, "success")) u.success = get_bool(j, "success");
  if (has(j, "level_id")) u.level_id = get_string(j, "level_id");
  if (has(j, "subjective_score")) u.subjective_score = get_exact(j, "subjective_score");
  if (has(j, "penalty_ids")) {
    const auto& p = j.at("penalty_ids");
    if (!p.is_array()) fail(ErrorCode::ParseError, "penalty_ids must be an array");
    std::vector<std::string> ids;
    for (const auto& v : p) {
      if (!v.is_string()) fail(ErrorCode::ParseError, "penalty_ids must hold strings");
      ids.push_back(v.get<std::string>());
    }
    u.penalty_ids = std::move(ids);
  }
  return u;
}

json to_json(const OutcomeUpdate& u) {
  json j{{"milestone_id", u.milestone_id}};
  if (u.success) j["success"] = *u.success;
  if (u.level_id) j["level_id"] = *u.level_id;
  if (u.subjective_score) j["subjective_score"] = to_decimal_json(*u.subjective_score);
  if (u.penalty_ids) j["penalty_ids"] = *u.penalty_ids;
  return j;
}

json to_json(const Team& t) {
  return {{"id", t.id},
          {"name", t.name},
          {"institution", t.institution},
          {"league_id", t.league_id},
          {"robot_description", t.robot_description}};
}

Team team_from_json(const json& j) {
  using namespace detail;
  Team t;
  t.id = get_string(j, "id");
  t.name = get_string_or(j, "name", t.id);
  t.institution = get_string_or(j, "institution", "");
  t.league_id = get_string(j, "league_id");
  t.robot_description = get_string_or(j, "robot_description", "");
  return t;
}

json to_json(const AttemptSession& s) {
  json j = to_json(s.attempt);
  j["state"] = to_string(s.state);
  j["deadline"] = format_timestamp(s.deadline);
  if (s.state != SessionState::Closed) j.erase("closed_at");
  return j;
}

json to_json(const LeaderboardRow& row) {
  return {{"team_id", row.team_id},
          {"s_challenge", to_audit_json(row.challenge)},
          {"s_royalties", to_audit_json(row.royalties)},
          {"s_coopetition", to_audit_json(row.coopetition)}};
}

json to_json(const EventConfig& c) {
  json windows = json::array();
  for (const auto& w : c.windows) windows.push_back(to_json(w));
  return {{"windows", std::move(windows)},
          {"default_royalty", to_decimal_json(c.default_royalty)},
          {"trust_based", c.trust_based}};
}

EventConfig event_config_from_json(const json& j) {
  using namespace detail;
  EventConfig c;
  if (has(j, "windows")) {
    const auto& w = j.at("windows");
    if (!w.is_array()) fail(ErrorCode::ParseError, "windows must be an array");
    for (const auto& item : w) c.windows.push_back(window_from_json(item));
  }
  if (has(j, "default_royalty")) c.default_royalty = get_exact(j, "default_royalty");
  if (has(j, "trust_based")) c.trust_based = get_bool(j, "trust_based");
  return c;
}

Event::Event(std::shared_ptr<const Rulebook> rulebook, EventConfig config)
    : rulebook_(std::move(rulebook)),
      config_(std::move(config)),
      marketplace_(rulebook_, config_.windows, MarketplaceOptions{config_.default_royalty, config_.trust_based}) {}

Event::Event(std::shared_ptr<const Rulebook> rulebook, EventConfig config, Timestamp now)
    : Event(std::move(rulebook), std::move(config)) {
  json data = to_json(config_);
  data["rulebook_version"] = rulebook_->version;
  commit(make_entry(kSystemActor, "configure", std::move(data), now));
}

Event Event::replay(std::shared_ptr<const Rulebook> rulebook, std::span<const LedgerEntry> entries) {
  if (entries.empty() || entries.front().kind != "configure") {
    fail(ErrorCode::ParseError, "ledger must start with a configure entry");
  }
  const auto& first = entries.front();
  if (detail::has(first.data, "rulebook_version") &&
      detail::get_string(first.data, "rulebook_version") != rulebook->version) {
    fail(ErrorCode::ConfigError, "ledger was recorded against rulebook version '" +
                                     detail::get_string(first.data, "rulebook_version") + "', loaded '" +
                                     rulebook->version + "'");
  }
  Event event(std::move(rulebook), event_config_from_json(first.data));
  for (const auto& e : entries) {
    try {
      event.apply(e);
    } catch (const Error& err) {
      fail(err.code(), "replay failed at seq " + std::to_string(e.seq) + " (" + e.kind + "): " + err.what());
    }
  }
  return event;
}

LedgerEntry Event::make_entry(const std::string& actor, std::string kind, json data, Timestamp now) const {
  LedgerEntry e;
  e.seq = ledger_.empty() ? 1 : ledger_.back().seq + 1;
  e.at = now;
  e.actor = actor;
  e.kind = std::move(kind);
  e.data = std::move(data);
  return e;
}

void Event::commit(LedgerEntry entry) {
  apply(entry);
}

void Event::apply(const LedgerEntry& e) {
  if (!ledger_.empty() && e.seq <= ledger_.back().seq) {
    fail(ErrorCode::ValidationError, "ledger sequence must increase");
  }
  if (e.kind == "configure") {
    if (!ledger_.empty()) fail(ErrorCode::ValidationError, "configure must be the first entry");
  } else if (ledger_.empty()) {
    fail(ErrorCode::ValidationError, "ledger must start with a configure entry");
  } else if (e.kind == "register_principal") {
    do_register_principal(e);
  } else if (e.kind == "register_team") {
    do_register_team(e);
  } else if (e.kind == "upload_module") {
    do_upload(e);
  } else if (e.kind == "set_royalty") {
    do_set_royalty(e);
  } else if (e.kind == "freeze") {
    do_freeze(e);
  } else if (e.kind == "declare_integration") {
    do_declare(e);
  } else if (e.kind == "verify_integration") {
    do_verify(e);
  } else if (e.kind == "remove_module") {
    do_remove(e);
  } else if (e.kind == "open_attempt") {
    do_open(e);
  } else if (e.kind == "record_outcome") {
    do_outcome(e);
  } else if (e.kind == "close_attempt") {
    do_close(e);
  } else {
    fail(ErrorCode::ParseError, "unknown ledger entry kind '" + e.kind + "'");
  }
  ledger_.push_back(e);
  if (sink_) sink_(ledger_.back());
}

Actor Event::resolve(const std::string& actor_id) const {
  if (actor_id == kSystemActor) {
    return {actor_id, {Role::Team, Role::Referee, Role::TechnicalCommittee, Role::ExternalEvaluator}};
  }
  auto it = principals_.find(actor_id);
  if (it == principals_.end()) fail(ErrorCode::Unauthorized, "unknown principal '" + actor_id + "'");
  return {it->second.id, it->second.roles};
}

Actor Event::actor(const std::string& principal_id) const {
  return resolve(principal_id);
}

std::optional<Actor> Event::authenticate(std::string_view token) const {
  auto it = tokens_.find(std::string(token));
  if (it == tokens_.end()) return std::nullopt;
  return resolve(it->second);
}

ModuleCatalog Event::module_catalog() const {
  ModuleCatalog catalog;
  for (const auto& [id, m] : marketplace_.modules()) {
    catalog.emplace(id, ModuleTerms{m.royalty_rate, m.developer_team_ids});
  }
  return catalog;
}

// ---- commands --------------------------------------------------------------

const Principal& Event::register_principal(const std::string& id, std::set<Role> roles, const std::string& token,
                                           Timestamp now) {
  json role_names = json::array();
  for (auto r : roles) role_names.push_back(to_string(r));
  commit(make_entry(kSystemActor, "register_principal", {{"id", id}, {"roles", role_names}, {"token", token}}, now));
  return principals_.at(id);
}

const Team& Event::register_team(const std::string& actor, Team team, const std::string& token, Timestamp now) {
  const auto id = team.id;
  commit(make_entry(actor, "register_team", {{"team", to_json(team)}, {"token", token}}, now));
  return teams_.at(id);
}

const ModuleRecord& Event::upload_module(const std::string& actor, const ModuleDraft& draft, Timestamp now) {
  json data{{"id", draft.id},
            {"name", draft.name},
            {"category", to_string(draft.category)},
            {"kind", to_string(draft.kind)},
            {"developer_team_ids", draft.developer_team_ids},
            {"description", draft.description},
            {"artifact_uri", draft.artifact_uri}};
  if (draft.royalty_rate) data["royalty_rate"] = to_decimal_json(*draft.royalty_rate);
  commit(make_entry(actor, "upload_module", std::move(data), now));
  return *marketplace_.find_module(draft.id);
}

const ModuleRecord& Event::set_royalty(const std::string& actor, const std::string& module_id, const Exact& rate,
                                       Timestamp now) {
  commit(make_entry(actor, "set_royalty", {{"module_id", module_id}, {"royalty_rate", to_decimal_json(rate)}}, now));
  return *marketplace_.find_module(module_id);
}

void Event::freeze(const std::string& actor, Timestamp at, Timestamp now) {
  commit(make_entry(actor, "freeze", {{"frozen_at", format_timestamp(at)}}, now));
}

const IntegrationDeclaration& Event::declare_integration(const std::string& actor, const std::string& user_team_id,
                                                         const std::string& module_id, const MilestoneScope& scope,
                                                         Timestamp now) {
  commit(make_entry(actor, "declare_integration",
                    {{"user_team_id", user_team_id}, {"module_id", module_id}, {"scope", to_json(scope)}}, now));
  return *marketplace_.find_declaration(last_created_id_);
}

const IntegrationDeclaration& Event::verify_integration(const std::string& actor, const std::string& declaration_id,
                                                        Timestamp now) {
  commit(make_entry(actor, "verify_integration", {{"declaration_id", declaration_id}}, now));
  return *marketplace_.find_declaration(declaration_id);
}

const ModuleRecord& Event::remove_module(const std::string& actor, const std::string& module_id, Timestamp now) {
  commit(make_entry(actor, "remove_module", {{"module_id", module_id}}, now));
  return *marketplace_.find_module(module_id);
}

const AttemptSession& Event::open_attempt(const std::string& actor, const std::string& team_id,
                                          const std::string& task_id, const std::string& task_level, Timestamp now) {
  commit(make_entry(actor, "open_attempt", {{"team_id", team_id}, {"task_id", task_id}, {"task_level", task_level}},
                    now));
  return sessions_.at(last_created_id_);
}

const AttemptSession& Event::record_outcome(const std::string& actor, const std::string& attempt_id,
                                            const OutcomeUpdate& update, Timestamp now) {
  commit(make_entry(actor, "record_outcome", {{"attempt_id", attempt_id}, {"outcome", to_json(update)}}, now));
  return sessions_.at(attempt_id);
}

const ScoreBreakdown& Event::close_attempt(const std::string& actor, const std::string& attempt_id, Timestamp now) {
  commit(make_entry(actor, "close_attempt", {{"attempt_id", attempt_id}}, now));
  return breakdowns_.at(attempt_id);
}

// ---- entry application -----------------------------------------------------

void Event::do_register_principal(const LedgerEntry& e) {
  using namespace detail;
  if (e.actor != kSystemActor) fail(ErrorCode::Unauthorized, "principals are provisioned by configuration");
  Principal p;
  p.id = get_string(e.data, "id");
  p.token = get_string(e.data, "token");
  for (const auto& r : field(e.data, "roles")) {
    auto role = r.is_string() ? parse_role(r.get<std::string>()) : std::nullopt;
    if (!role) fail(ErrorCode::ValidationError, "unknown role in principal '" + p.id + "'");
    p.roles.insert(*role);
  }
  if (p.id.empty() || p.id == kSystemActor) fail(ErrorCode::ValidationError, "invalid principal id");
  if (principals_.contains(p.id)) fail(ErrorCode::DuplicateId, "principal '" + p.id + "' already exists");
  if (p.token.empty() || tokens_.contains(p.token)) fail(ErrorCode::ValidationError, "token must be unique");
  tokens_[p.token] = p.id;
  principals_[p.id] = std::move(p);
}

void Event::do_register_team(const LedgerEntry& e) {
  using namespace detail;
  const auto actor = resolve(e.actor);
  if (!actor.has(Role::TechnicalCommittee)) fail(ErrorCode::Unauthorized, "only the committee registers teams");
  Team team = team_from_json(field(e.data, "team"));
  const auto token = get_string(e.data, "token");
  if (team.id.empty() || team.id == kSystemActor) fail(ErrorCode::ValidationError, "invalid team id");
  if (teams_.contains(team.id) || principals_.contains(team.id)) {
    fail(ErrorCode::DuplicateId, "team '" + team.id + "' already exists");
  }
  if (!rulebook_->find_league(team.league_id)) {
    fail(ErrorCode::ValidationError, "team '" + team.id + "' names unknown league '" + team.league_id + "'");
  }
  if (token.empty() || tokens_.contains(token)) fail(ErrorCode::ValidationError, "token must be unique");
  tokens_[token] = team.id;
  principals_[team.id] = Principal{team.id, {Role::Team}, token};
  teams_[team.id] = std::move(team);
}

void Event::do_upload(const LedgerEntry& e) {
  const auto actor = resolve(e.actor);
  ModuleDraft draft = draft_from_json(e.data);
  if (!actor.has(Role::TechnicalCommittee)) {
    if (!actor.has(Role::Team)) fail(ErrorCode::Unauthorized, "only teams upload modules");
    if (draft.developer_team_ids.empty()) draft.developer_team_ids.insert(actor.id);
    if (!draft.developer_team_ids.contains(actor.id)) {
      fail(ErrorCode::Unauthorized, "uploader must be one of the module's developers");
    }
  }
  for (const auto& t : draft.developer_team_ids) {
    if (!teams_.contains(t)) fail(ErrorCode::ValidationError, "developer team '" + t + "' is not registered");
  }
  marketplace_.upload_module(std::move(draft), e.at);
}

void Event::do_set_royalty(const LedgerEntry& e) {
  using namespace detail;
  const auto actor = resolve(e.actor);
  const auto module_id = get_string(e.data, "module_id");
  const auto* m = marketplace_.find_module(module_id);
  if (!m) fail(ErrorCode::NotFound, "module '" + module_id + "' not found");
  if (!actor.has(Role::TechnicalCommittee) && !(actor.has(Role::Team) && m->developed_by(actor.id))) {
    fail(ErrorCode::Unauthorized, "only the module's developers set its royalty");
  }
  marketplace_.set_royalty(module_id, get_exact(e.data, "royalty_rate"), e.at);
}

void Event::do_freeze(const LedgerEntry& e) {
  const auto actor = resolve(e.actor);
  if (!actor.has(Role::TechnicalCommittee)) fail(ErrorCode::Unauthorized, "only the committee freezes the marketplace");
  marketplace_.freeze(detail::get_time(e.data, "frozen_at"));
}

void Event::do_declare(const LedgerEntry& e) {
  using namespace detail;
  const auto actor = resolve(e.actor);
  const auto user = get_string(e.data, "user_team_id");
  const auto module_id = get_string(e.data, "module_id");
  const auto scope = scope_from_json(field(e.data, "scope"));
  if (!actor.has(Role::TechnicalCommittee) && !(actor.has(Role::Team) && actor.id == user)) {
    fail(ErrorCode::Unauthorized, "teams declare integrations for themselves only");
  }
  const auto* team = find_team(user);
  if (!team) fail(ErrorCode::NotFound, "team '" + user + "' not found");
  if (scope.league_id != team->league_id) {
    fail(ErrorCode::UnknownScope, "team '" + user + "' competes in league '" + team->league_id + "'");
  }
  last_created_id_ = marketplace_.declare_integration(user, module_id, scope, e.at).id;
}

void Event::do_verify(const LedgerEntry& e) {
  marketplace_.verify_integration(detail::get_string(e.data, "declaration_id"), resolve(e.actor), e.at);
}

void Event::do_remove(const LedgerEntry& e) {
  marketplace_.remove_module(detail::get_string(e.data, "module_id"), resolve(e.actor), e.at);
}

void Event::do_open(const LedgerEntry& e) {
  using namespace detail;
  const auto actor = resolve(e.actor);
  if (!actor.has(Role::Referee) && !actor.has(Role::TechnicalCommittee)) {
    fail(ErrorCode::Unauthorized, "only referees open attempts");
  }
  const auto team_id = get_string(e.data, "team_id");
  const auto task_id = get_string(e.data, "task_id");
  const auto level_key = get_string(e.data, "task_level");
  const auto* team = find_team(team_id);
  if (!team) fail(ErrorCode::NotFound, "team '" + team_id + "' not found");
  const auto* league = rulebook_->find_league(team->league_id);
  const auto* task = league->find_task(task_id);
  if (!task) fail(ErrorCode::NotFound, "task '" + task_id + "' not found in league '" + league->id + "'");
  const auto* level = league->find_task_level(level_key);
  if (!level) fail(ErrorCode::NotFound, "task conditional level '" + level_key + "' not found");
  if (!marketplace_.is_frozen(e.at)) {
    fail(ErrorCode::EventNotStarted, "attempts open once the marketplace is frozen");
  }
  int used = 0;
  for (const auto& [id, s] : sessions_) {
    if (s.attempt.team_id == team_id && s.attempt.task_id == task_id) ++used;
  }
  if (used >= league->attempt_limit) {
    fail(ErrorCode::AttemptLimitExceeded, "team '" + team_id + "' used all " + std::to_string(league->attempt_limit) +
                                              " attempts on '" + task_id + "'");
  }

  AttemptSession s;
  s.attempt.id = "att-" + std::to_string(sessions_.size() + 1);
  s.attempt.team_id = team_id;
  s.attempt.league_id = league->id;
  s.attempt.task_id = task_id;
  s.attempt.attempt_number = used + 1;
  s.attempt.task_level_id = level->id;
  s.attempt.started_at = e.at;
  s.state = SessionState::Running;
  s.deadline = e.at + league->attempt_duration;
  last_created_id_ = s.attempt.id;
  session_order_.push_back(s.attempt.id);
  sessions_.emplace(s.attempt.id, std::move(s));
}

void Event::do_outcome(const LedgerEntry& e) {
  using namespace detail;
  const auto attempt_id = get_string(e.data, "attempt_id");
  const auto update = outcome_update_from_json(field(e.data, "outcome"));
  auto it = sessions_.find(attempt_id);
  if (it == sessions_.end()) fail(ErrorCode::NotFound, "attempt '" + attempt_id + "' not found");
  auto& session = it->second;

  const auto actor = resolve(e.actor);
  if (!actor.has(Role::Referee)) {
    if (!actor.has(Role::ExternalEvaluator)) fail(ErrorCode::Unauthorized, "only referees record outcomes");
    if (update.success || update.level_id || update.penalty_ids || !update.subjective_score) {
      fail(ErrorCode::Unauthorized, "external evaluators may only enter the subjective score");
    }
  }
  if (session.state == SessionState::Closed) fail(ErrorCode::SessionClosed, "attempt '" + attempt_id + "' is closed");
  if (e.at > session.deadline) {
    fail(ErrorCode::DeadlineExpired, "attempt '" + attempt_id + "' deadline was " + format_timestamp(session.deadline));
  }

  const auto& task = *rulebook_->find_league(session.attempt.league_id)->find_task(session.attempt.task_id);
  const auto* spec = task.find_milestone(update.milestone_id);
  if (!spec) fail(ErrorCode::CatalogMismatch, "milestone '" + update.milestone_id + "' is not part of " + task.id);

  MilestoneResult merged;
  merged.milestone_id = spec->id;
  if (const auto* existing = session.attempt.find_result(spec->id)) merged = *existing;
  if (update.success) merged.success = *update.success;
  if (update.level_id) merged.level_id = *update.level_id;
  if (update.subjective_score) merged.subjective_score = *update.subjective_score;
  if (update.penalty_ids) merged.penalty_ids = *update.penalty_ids;

  if (!merged.level_id.empty() && !spec->find_level(merged.level_id)) {
    fail(ErrorCode::CatalogMismatch, "level '" + merged.level_id + "' is not in the catalog of " + spec->id);
  }
  penalty_points(*spec, merged);
  validate_subjective_score(merged.subjective_score);
  if (merged.success && merged.level_id.empty()) {
    fail(ErrorCode::ValidationError, "a successful milestone needs a conditional level");
  }
  if (merged.success && !spec->exclusive_group.empty()) {
    for (const auto& r : session.attempt.results) {
      if (r.milestone_id == spec->id || !r.success) continue;
      const auto* other = task.find_milestone(r.milestone_id);
      if (other && other->exclusive_group == spec->exclusive_group) {
        fail(ErrorCode::MutualExclusionViolation,
             spec->id + " and " + other->id + " are alternatives; only one may succeed");
      }
    }
  }

  auto& results = session.attempt.results;
  auto pos = std::find_if(results.begin(), results.end(),
                          [&](const MilestoneResult& r) { return r.milestone_id == spec->id; });
  if (pos == results.end()) {
    results.push_back(std::move(merged));
  } else {
    *pos = std::move(merged);
  }
}

void Event::do_close(const LedgerEntry& e) {
  using namespace detail;
  const auto attempt_id = get_string(e.data, "attempt_id");
  auto it = sessions_.find(attempt_id);
  if (it == sessions_.end()) fail(ErrorCode::NotFound, "attempt '" + attempt_id + "' not found");
  const auto actor = resolve(e.actor);
  if (!actor.has(Role::Referee) && !actor.has(Role::TechnicalCommittee)) {
    fail(ErrorCode::Unauthorized, "only referees close attempts");
  }
  auto& session = it->second;
  if (session.state == SessionState::Closed) fail(ErrorCode::SessionClosed, "attempt '" + attempt_id + "' is closed");

  AttemptRecord record = session.attempt;
  record.closed_at = e.at;
  ScoreBreakdown b = score_record(record);

  session.attempt = std::move(record);
  session.state = SessionState::Closed;
  breakdowns_[attempt_id] = std::move(b);
  close_order_.push_back(attempt_id);
  recount(session.attempt.team_id, session.attempt.task_id);
}

// External modules are the verified declarations standing at close time.
ScoreBreakdown Event::score_record(AttemptRecord& record) const {
  for (auto& r : record.results) {
    r.external_module_ids.clear();
    for (const auto& m :
         marketplace_.external_modules_for(record.team_id, {record.league_id, record.task_id, r.milestone_id})) {
      r.external_module_ids.insert(m.id);
    }
  }
  const auto& league = *rulebook_->find_league(record.league_id);
  const auto& task = *league.find_task(record.task_id);
  return score_attempt(league, task, record, module_catalog());
}

ScoreBreakdown Event::preview(std::string_view attempt_id, Timestamp now) const {
  const auto* s = session(attempt_id);
  if (!s) fail(ErrorCode::NotFound, "attempt '" + std::string(attempt_id) + "' not found");
  if (s->state == SessionState::Closed) return breakdowns_.at(s->attempt.id);
  AttemptRecord record = s->attempt;
  record.closed_at = now;
  return score_record(record);
}

void Event::recount(const std::string& team_id, const std::string& task_id) {
  std::vector<AttemptRecord> attempts;
  std::vector<Exact> scores;
  for (const auto& id : close_order_) {
    const auto& b = breakdowns_.at(id);
    if (b.attempt.team_id == team_id && b.attempt.task_id == task_id) {
      attempts.push_back(b.attempt);
      scores.push_back(b.task.total);
    }
  }
  if (attempts.empty()) return;
  const auto& task = *rulebook_->find_league(attempts.front().league_id)->find_task(task_id);
  counted_[{team_id, task_id}] = attempts[best_attempt(task, attempts, scores)].id;
}

// ---- queries ---------------------------------------------------------------

const Team* Event::find_team(std::string_view id) const {
  auto it = teams_.find(std::string(id));
  return it == teams_.end() ? nullptr : &it->second;
}

const AttemptSession* Event::session(std::string_view attempt_id) const {
  auto it = sessions_.find(std::string(attempt_id));
  return it == sessions_.end() ? nullptr : &it->second;
}

const ScoreBreakdown* Event::breakdown(std::string_view attempt_id) const {
  auto it = breakdowns_.find(std::string(attempt_id));
  return it == breakdowns_.end() ? nullptr : &it->second;
}

std::vector<const ScoreBreakdown*> Event::breakdowns() const {
  std::vector<const ScoreBreakdown*> out;
  for (const auto& id : close_order_) out.push_back(&breakdowns_.at(id));
  return out;
}

const ScoreBreakdown* Event::counted_attempt(const std::string& team_id, const std::string& task_id) const {
  auto it = counted_.find({team_id, task_id});
  return it == counted_.end() ? nullptr : &breakdowns_.at(it->second);
}

std::vector<RoyaltyEntry> Event::royalties_for(const std::string& team_id) const {
  std::vector<RoyaltyEntry> out;
  for (const auto& [key, attempt_id] : counted_) {
    for (const auto& entry : breakdowns_.at(attempt_id).royalties) {
      if (entry.developer_team_id == team_id) out.push_back(entry);
    }
  }
  return out;
}

Exact Event::royalty_total(const std::string& team_id) const {
  const auto entries = royalties_for(team_id);
  return royalties_total(entries);
}

Exact Event::challenge_total(const std::string& team_id) const {
  std::vector<Exact> task_scores;
  for (const auto& [key, attempt_id] : counted_) {
    if (key.first == team_id) task_scores.push_back(breakdowns_.at(attempt_id).task.total);
  }
  return challenge_score(task_scores);
}

std::vector<LeaderboardRow> Event::leaderboard(const std::string& league_id) const {
  if (!rulebook_->find_league(league_id)) fail(ErrorCode::NotFound, "league '" + league_id + "' not found");
  std::vector<LeaderboardRow> rows;
  for (const auto& [id, team] : teams_) {
    if (team.league_id != league_id) continue;
    LeaderboardRow row;
    row.team_id = id;
    row.challenge = challenge_total(id);
    row.royalties = royalty_total(id);
    row.coopetition = coopetition_score(row.challenge, row.royalties);
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end(), [](const LeaderboardRow& a, const LeaderboardRow& b) {
    if (a.coopetition != b.coopetition) return a.coopetition > b.coopetition;
    if (a.challenge != b.challenge) return a.challenge > b.challenge;
    return a.team_id < b.team_id;
  });
  return rows;
}

std::vector<Notification> Event::notifications_for(const std::string& team_id) const {
  std::vector<Notification> out;
  for (const auto& d : marketplace_.declarations()) {
    const auto* m = marketplace_.find_module(d.module_id);
    if (!m || !m->developed_by(team_id)) continue;
    const auto where = d.scope.league_id + "/" + d.scope.task_id + "/" + d.scope.milestone_id;
    out.push_back({d.declared_at, "module_declared", d.user_team_id + " declared use of " + m->id + " for " + where});
    if (d.verified_at) {
      out.push_back({*d.verified_at, "module_verified", "use of " + m->id + " by " + d.user_team_id + " verified"});
    }
  }
  for (const auto& entry : royalties_for(team_id)) {
    const auto& b = breakdowns_.at(entry.source.attempt_id);
    out.push_back({b.attempt.closed_at, "royalty",
                   to_fixed(entry.amount) + " points from " + entry.source.user_team_id + " using " +
                       entry.source.module_id + " (" + entry.source.task_id + "/" + entry.source.milestone_id + ")"});
  }
  std::stable_sort(out.begin(), out.end(), [](const Notification& a, const Notification& b) { return a.at < b.at; });
  return out;
}

}  // namespace coop

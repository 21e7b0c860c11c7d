#pragma once

#include "coop/exact.h"
#include "coop/ledger.h"
#include "coop/marketplace.h"
#include "coop/roles.h"
#include "coop/rulebook.h"
#include "coop/scoring.h"
#include "coop/timestamp.h"

#include <nlohmann/json.hpp>

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace coop {

struct Team {
  std::string id;
  std::string name;
  std::string institution;
  std::string league_id;
  std::string robot_description;

  bool operator==(const Team&) const = default;
};

struct Principal {
  std::string id;
  std::set<Role> roles;
  std::string token;
};

enum class SessionState { Setup, Running, Closed };
std::string_view to_string(SessionState s);

struct AttemptSession {
  AttemptRecord attempt;
  SessionState state = SessionState::Setup;
  Timestamp deadline{};
};

struct EventConfig {
  std::vector<UploadWindow> windows;
  Exact default_royalty{1, 4};
  bool trust_based = false;
};

struct LeaderboardRow {
  std::string team_id;
  Exact challenge;
  Exact royalties;
  Exact coopetition;
};

// Referee input for one milestone. Absent fields keep their current value,
// so referees can correct an entry while the attempt runs.
struct OutcomeUpdate {
  std::string milestone_id;
  std::optional<bool> success;
  std::optional<std::string> level_id;
  std::optional<Exact> subjective_score;
  std::optional<std::vector<std::string>> penalty_ids;
};

OutcomeUpdate outcome_update_from_json(const nlohmann::json& j);
nlohmann::json to_json(const OutcomeUpdate& u);

struct Notification {
  Timestamp at{};
  std::string kind;
  std::string message;
};

// One competition event. Every state change is expressed as a ledger entry
// and applied through a single code path, so replaying the ledger rebuilds
// identical state. Not internally synchronized.
class Event {
public:
  // Principal with every role, used for configuration-driven entries.
  static constexpr const char* kSystemActor = "system";

  Event(std::shared_ptr<const Rulebook> rulebook, EventConfig config, Timestamp now);

  // Rebuilds an event from its ledger. The first entry must be `configure`.
  static Event replay(std::shared_ptr<const Rulebook> rulebook, std::span<const LedgerEntry> entries);

  // Called after every accepted entry (e.g. to persist it).
  void set_sink(std::function<void(const LedgerEntry&)> sink) { sink_ = std::move(sink); }

  const Principal& register_principal(const std::string& id, std::set<Role> roles, const std::string& token,
                                      Timestamp now);
  const Team& register_team(const std::string& actor, Team team, const std::string& token, Timestamp now);
  const ModuleRecord& upload_module(const std::string& actor, const ModuleDraft& draft, Timestamp now);
  const ModuleRecord& set_royalty(const std::string& actor, const std::string& module_id, const Exact& rate, Timestamp now);
  void freeze(const std::string& actor, Timestamp at, Timestamp now);
  const IntegrationDeclaration& declare_integration(const std::string& actor, const std::string& user_team_id,
                                                    const std::string& module_id, const MilestoneScope& scope,
                                                    Timestamp now);
  const IntegrationDeclaration& verify_integration(const std::string& actor, const std::string& declaration_id,
                                                   Timestamp now);
  const ModuleRecord& remove_module(const std::string& actor, const std::string& module_id, Timestamp now);
  const AttemptSession& open_attempt(const std::string& actor, const std::string& team_id, const std::string& task_id,
                                     const std::string& task_level, Timestamp now);
  const AttemptSession& record_outcome(const std::string& actor, const std::string& attempt_id,
                                       const OutcomeUpdate& update, Timestamp now);
  const ScoreBreakdown& close_attempt(const std::string& actor, const std::string& attempt_id, Timestamp now);

  // Resolves a bearer token; nullopt when unknown.
  std::optional<Actor> authenticate(std::string_view token) const;
  Actor actor(const std::string& principal_id) const;

  std::vector<LeaderboardRow> leaderboard(const std::string& league_id) const;
  // Royalty entries credited to a developer team from counted attempts.
  std::vector<RoyaltyEntry> royalties_for(const std::string& team_id) const;
  Exact royalty_total(const std::string& team_id) const;
  Exact challenge_total(const std::string& team_id) const;
  std::vector<Notification> notifications_for(const std::string& team_id) const;

  // Closed attempts in close order.
  std::vector<const ScoreBreakdown*> breakdowns() const;
  const ScoreBreakdown* breakdown(std::string_view attempt_id) const;
  // Currently counted attempt per (team, task), if any.
  const ScoreBreakdown* counted_attempt(const std::string& team_id, const std::string& task_id) const;
  // Score of a running attempt as if it closed now; closed attempts return
  // their recorded breakdown.
  ScoreBreakdown preview(std::string_view attempt_id, Timestamp now) const;

  const AttemptSession* session(std::string_view attempt_id) const;
  const std::map<std::string, Team>& teams() const { return teams_; }
  const Team* find_team(std::string_view id) const;
  const Marketplace& marketplace() const { return marketplace_; }
  const Rulebook& rulebook() const { return *rulebook_; }
  std::shared_ptr<const Rulebook> rulebook_ptr() const { return rulebook_; }
  const EventConfig& config() const { return config_; }
  const std::vector<LedgerEntry>& ledger() const { return ledger_; }

  // Applies an entry. Used by replay; commands route through it too.
  void apply(const LedgerEntry& entry);

private:
  Event(std::shared_ptr<const Rulebook> rulebook, EventConfig config);

  LedgerEntry make_entry(const std::string& actor, std::string kind, nlohmann::json data, Timestamp now) const;
  void commit(LedgerEntry entry);
  Actor resolve(const std::string& actor_id) const;
  ModuleCatalog module_catalog() const;
  void recount(const std::string& team_id, const std::string& task_id);
  ScoreBreakdown score_record(AttemptRecord& record) const;

  void do_register_principal(const LedgerEntry& e);
  void do_register_team(const LedgerEntry& e);
  void do_upload(const LedgerEntry& e);
  void do_set_royalty(const LedgerEntry& e);
  void do_freeze(const LedgerEntry& e);
  void do_declare(const LedgerEntry& e);
  void do_verify(const LedgerEntry& e);
  void do_remove(const LedgerEntry& e);
  void do_open(const LedgerEntry& e);
  void do_outcome(const LedgerEntry& e);
  void do_close(const LedgerEntry& e);

  std::shared_ptr<const Rulebook> rulebook_;
  EventConfig config_;
  Marketplace marketplace_;
  std::map<std::string, Principal> principals_;
  std::map<std::string, std::string> tokens_;  // token -> principal id
  std::map<std::string, Team> teams_;
  std::map<std::string, AttemptSession> sessions_;
  std::vector<std::string> session_order_;
  std::map<std::string, ScoreBreakdown> breakdowns_;
  std::vector<std::string> close_order_;
  std::map<std::pair<std::string, std::string>, std::string> counted_;  // (team, task) -> attempt id
  std::vector<LedgerEntry> ledger_;
  std::function<void(const LedgerEntry&)> sink_;
  std::string last_created_id_;
};

nlohmann::json to_json(const Team& t);
Team team_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AttemptSession& s);
nlohmann::json to_json(const LeaderboardRow& row);
nlohmann::json to_json(const EventConfig& c);
EventConfig event_config_from_json(const nlohmann::json& j);

}  // namespace coop

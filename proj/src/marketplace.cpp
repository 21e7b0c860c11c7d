#include "coop/marketplace.h"

#include "coop/error.h"
#include "json_util.h"

#include <algorithm>

namespace coop {

using nlohmann::json;

std::string_view to_string(ModuleCategory c) {
  switch (c) {
    case ModuleCategory::RigidBodyDynamicsControl: return "rigid_body_dynamics_control";
    case ModuleCategory::PoseEstimationVisionDetection: return "pose_estimation_vision_detection";
    case ModuleCategory::SimulationDigitalEnvironments: return "simulation_digital_environments";
    case ModuleCategory::LocalizationMapping: return "localization_mapping";
    case ModuleCategory::DatasetsModels: return "datasets_models";
    case ModuleCategory::SpeechCommunication: return "speech_communication";
    case ModuleCategory::Other: return "other";
  }
  return "other";
}

std::string_view display_name(ModuleCategory c) {
  switch (c) {
    case ModuleCategory::RigidBodyDynamicsControl: return "Rigid Body Dynamics & Control";
    case ModuleCategory::PoseEstimationVisionDetection: return "Pose Estimation, Vision & Object Detection";
    case ModuleCategory::SimulationDigitalEnvironments: return "Simulation & Digital Environments";
    case ModuleCategory::LocalizationMapping: return "Localization & Mapping";
    case ModuleCategory::DatasetsModels: return "Datasets & Models";
    case ModuleCategory::SpeechCommunication: return "Speech & Communication";
    case ModuleCategory::Other: return "Other";
  }
  return "Other";
}

std::optional<ModuleCategory> parse_module_category(std::string_view text) {
  for (std::size_t i = 0; i < kModuleCategoryCount; ++i) {
    const auto c = static_cast<ModuleCategory>(i);
    if (to_string(c) == text) return c;
  }
  return std::nullopt;
}

std::string_view to_string(ModuleKind k) {
  switch (k) {
    case ModuleKind::Software: return "software";
    case ModuleKind::Data: return "data";
    case ModuleKind::Hardware: return "hardware";
  }
  return "software";
}

std::optional<ModuleKind> parse_module_kind(std::string_view text) {
  if (text == "software") return ModuleKind::Software;
  if (text == "data") return ModuleKind::Data;
  if (text == "hardware") return ModuleKind::Hardware;
  return std::nullopt;
}

std::string_view to_string(ModuleStatus s) {
  return s == ModuleStatus::Active ? "active" : "removed";
}

Marketplace::Marketplace(std::shared_ptr<const Rulebook> rulebook, std::vector<UploadWindow> windows,
                         MarketplaceOptions options)
    : rulebook_(std::move(rulebook)), windows_(std::move(windows)), options_(std::move(options)) {
  if (!rulebook_) fail(ErrorCode::ConfigError, "marketplace needs a rulebook");
  if (options_.default_royalty < 0 || options_.default_royalty > 1) {
    fail(ErrorCode::ConfigError, "default royalty outside [0,1]");
  }
  std::sort(windows_.begin(), windows_.end(),
            [](const UploadWindow& a, const UploadWindow& b) { return a.opens_at < b.opens_at; });
  for (std::size_t i = 0; i < windows_.size(); ++i) {
    if (!(windows_[i].opens_at < windows_[i].closes_at)) {
      fail(ErrorCode::ConfigError, "upload window '" + windows_[i].id + "' must open before it closes");
    }
    if (i > 0 && windows_[i].opens_at < windows_[i - 1].closes_at) {
      fail(ErrorCode::ConfigError,
           "upload windows '" + windows_[i - 1].id + "' and '" + windows_[i].id + "' overlap");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (windows_[j].id == windows_[i].id) fail(ErrorCode::ConfigError, "duplicate window id '" + windows_[i].id + "'");
    }
  }
}

const ModuleRecord& Marketplace::upload_module(ModuleDraft draft, Timestamp now) {
  if (is_frozen(now)) {
    fail(ErrorCode::FrozenMarketplace, "marketplace frozen since " + format_timestamp(*frozen_at_));
  }
  auto window = std::find_if(windows_.begin(), windows_.end(), [&](const UploadWindow& w) { return w.contains(now); });
  if (window == windows_.end()) {
    fail(ErrorCode::OutsideWindow, "no upload window open at " + format_timestamp(now));
  }
  if (draft.id.empty()) fail(ErrorCode::ValidationError, "module id must not be empty");
  if (modules_.contains(draft.id)) fail(ErrorCode::DuplicateId, "module '" + draft.id + "' already exists");
  if (draft.developer_team_ids.empty()) {
    fail(ErrorCode::ValidationError, "module '" + draft.id + "' needs at least one developer team");
  }
  const Exact rate = draft.royalty_rate.value_or(options_.default_royalty);
  if (rate < 0 || rate > 1) fail(ErrorCode::ValidationError, "royalty rate outside [0,1]");

  ModuleRecord record;
  record.id = draft.id;
  record.name = draft.name.empty() ? draft.id : std::move(draft.name);
  record.category = draft.category;
  record.kind = draft.kind;
  record.developer_team_ids = std::move(draft.developer_team_ids);
  record.royalty_rate = rate;
  record.uploaded_at = now;
  record.upload_window_id = window->id;
  record.description = std::move(draft.description);
  record.artifact_uri = std::move(draft.artifact_uri);
  record.status = ModuleStatus::Active;

  latest_upload_ = std::max(latest_upload_, now);
  auto [it, _] = modules_.emplace(record.id, std::move(record));
  return it->second;
}

void Marketplace::freeze(Timestamp at) {
  if (frozen_at_) fail(ErrorCode::AlreadyFrozen, "marketplace already frozen at " + format_timestamp(*frozen_at_));
  if (!modules_.empty() && at < latest_upload_) {
    fail(ErrorCode::ValidationError, "freeze instant precedes an accepted upload");
  }
  frozen_at_ = at;
}

const IntegrationDeclaration& Marketplace::declare_integration(const std::string& user_team_id,
                                                               const std::string& module_id,
                                                               const MilestoneScope& scope, Timestamp now) {
  const auto it = modules_.find(module_id);
  if (it == modules_.end()) fail(ErrorCode::NotFound, "module '" + module_id + "' not found");
  const auto& module = it->second;
  if (module.status == ModuleStatus::Removed) fail(ErrorCode::ModuleRemoved, "module '" + module_id + "' was removed");
  if (module.developed_by(user_team_id)) {
    fail(ErrorCode::SelfIntegration, "team '" + user_team_id + "' co-developed module '" + module_id + "'");
  }
  const auto* league = rulebook_->find_league(scope.league_id);
  const auto* task = league ? league->find_task(scope.task_id) : nullptr;
  if (!task || !task->find_milestone(scope.milestone_id)) {
    fail(ErrorCode::UnknownScope,
         "unknown scope " + scope.league_id + "/" + scope.task_id + "/" + scope.milestone_id);
  }

  IntegrationDeclaration decl;
  decl.id = "decl-" + std::to_string(declarations_.size() + 1);
  decl.user_team_id = user_team_id;
  decl.module_id = module_id;
  decl.scope = scope;
  decl.declared_at = now;
  if (options_.trust_based) {
    decl.verified = true;
    decl.verified_at = now;
  }
  declarations_.push_back(std::move(decl));
  return declarations_.back();
}

const IntegrationDeclaration& Marketplace::verify_integration(const std::string& declaration_id, const Actor& actor,
                                                              Timestamp now) {
  if (!actor.has(Role::Referee) && !actor.has(Role::TechnicalCommittee)) {
    fail(ErrorCode::Unauthorized, "only referees or the technical committee verify integrations");
  }
  auto it = std::find_if(declarations_.begin(), declarations_.end(),
                         [&](const IntegrationDeclaration& d) { return d.id == declaration_id; });
  if (it == declarations_.end()) fail(ErrorCode::NotFound, "declaration '" + declaration_id + "' not found");
  if (!it->verified) {
    it->verified = true;
    it->verified_at = now;
  }
  return *it;
}

const ModuleRecord& Marketplace::remove_module(const std::string& module_id, const Actor& actor, Timestamp now) {
  if (!actor.has(Role::TechnicalCommittee)) {
    fail(ErrorCode::Unauthorized, "only the technical committee removes modules");
  }
  auto it = modules_.find(module_id);
  if (it == modules_.end() || it->second.status != ModuleStatus::Active) {
    fail(ErrorCode::NotFound, "active module '" + module_id + "' not found");
  }
  it->second.status = ModuleStatus::Removed;
  it->second.removed_at = now;
  return it->second;
}

const ModuleRecord& Marketplace::set_royalty(const std::string& module_id, const Exact& rate, Timestamp now) {
  if (is_frozen(now)) fail(ErrorCode::FrozenMarketplace, "royalty rates are fixed once the marketplace is frozen");
  auto it = modules_.find(module_id);
  if (it == modules_.end()) fail(ErrorCode::NotFound, "module '" + module_id + "' not found");
  if (rate < 0 || rate > 1) fail(ErrorCode::ValidationError, "royalty rate outside [0,1]");
  it->second.royalty_rate = rate;
  return it->second;
}

std::vector<ModuleRecord> Marketplace::external_modules_for(const std::string& user_team_id,
                                                            const MilestoneScope& scope) const {
  std::set<std::string> ids;
  for (const auto& d : declarations_) {
    if (d.verified && d.user_team_id == user_team_id && d.scope == scope) ids.insert(d.module_id);
  }
  std::vector<ModuleRecord> out;
  for (const auto& id : ids) {
    const auto& m = modules_.at(id);
    if (m.developed_by(user_team_id)) continue;
    out.push_back(m);
  }
  return out;
}

std::vector<ModuleRecord> Marketplace::list_modules(std::optional<ModuleCategory> category,
                                                    std::optional<std::string> developer) const {
  std::vector<ModuleRecord> out;
  for (const auto& [id, m] : modules_) {
    if (category && m.category != *category) continue;
    if (developer && !m.developed_by(*developer)) continue;
    out.push_back(m);
  }
  return out;
}

const ModuleRecord* Marketplace::find_module(std::string_view id) const {
  auto it = modules_.find(std::string(id));
  return it == modules_.end() ? nullptr : &it->second;
}

const IntegrationDeclaration* Marketplace::find_declaration(std::string_view id) const {
  for (const auto& d : declarations_) {
    if (d.id == id) return &d;
  }
  return nullptr;
}

json to_json(const ModuleRecord& m) {
  json j{{"id", m.id},
         {"name", m.name},
         {"category", to_string(m.category)},
         {"kind", to_string(m.kind)},
         {"developer_team_ids", m.developer_team_ids},
         {"royalty_rate", to_decimal_json(m.royalty_rate)},
         {"uploaded_at", format_timestamp(m.uploaded_at)},
         {"upload_window_id", m.upload_window_id},
         {"description", m.description},
         {"artifact_uri", m.artifact_uri},
         {"status", to_string(m.status)}};
  if (m.removed_at) j["removed_at"] = format_timestamp(*m.removed_at);
  return j;
}

ModuleRecord module_from_json(const json& j) {
  using namespace detail;
  ModuleRecord m;
  m.id = get_string(j, "id");
  m.name = get_string(j, "name");
  auto cat = parse_module_category(get_string(j, "category"));
  auto kind = parse_module_kind(get_string(j, "kind"));
  if (!cat || !kind) fail(ErrorCode::ParseError, "bad module category or kind");
  m.category = *cat;
  m.kind = *kind;
  m.developer_team_ids = field(j, "developer_team_ids").get<std::set<std::string>>();
  m.royalty_rate = get_exact(j, "royalty_rate");
  m.uploaded_at = get_time(j, "uploaded_at");
  m.upload_window_id = get_string(j, "upload_window_id");
  m.description = get_string_or(j, "description", "");
  m.artifact_uri = get_string_or(j, "artifact_uri", "");
  m.status = get_string(j, "status") == "removed" ? ModuleStatus::Removed : ModuleStatus::Active;
  if (has(j, "removed_at")) m.removed_at = get_time(j, "removed_at");
  return m;
}

json to_json(const MilestoneScope& s) {
  return {{"league_id", s.league_id}, {"task_id", s.task_id}, {"milestone_id", s.milestone_id}};
}

MilestoneScope scope_from_json(const json& j) {
  using namespace detail;
  return {get_string(j, "league_id"), get_string(j, "task_id"), get_string(j, "milestone_id")};
}

json to_json(const IntegrationDeclaration& d) {
  json j{{"id", d.id},
         {"user_team_id", d.user_team_id},
         {"module_id", d.module_id},
         {"scope", to_json(d.scope)},
         {"declared_at", format_timestamp(d.declared_at)},
         {"verified", d.verified}};
  if (d.verified_at) j["verified_at"] = format_timestamp(*d.verified_at);
  return j;
}

json to_json(const UploadWindow& w) {
  return {{"id", w.id}, {"opens_at", format_timestamp(w.opens_at)}, {"closes_at", format_timestamp(w.closes_at)}};
}

UploadWindow window_from_json(const json& j) {
  using namespace detail;
  return {get_string(j, "id"), get_time(j, "opens_at"), get_time(j, "closes_at")};
}

ModuleDraft draft_from_json(const json& j) {
  using namespace detail;
  ModuleDraft d;
  d.id = get_string(j, "id");
  d.name = get_string_or(j, "name", "");
  if (has(j, "category")) {
    auto c = parse_module_category(get_string(j, "category"));
    if (!c) fail(ErrorCode::ValidationError, "unknown module category '" + get_string(j, "category") + "'");
    d.category = *c;
  }
  if (has(j, "kind")) {
    auto k = parse_module_kind(get_string(j, "kind"));
    if (!k) fail(ErrorCode::ValidationError, "unknown module kind '" + get_string(j, "kind") + "'");
    d.kind = *k;
  }
  if (has(j, "developer_team_ids")) {
    const auto& devs = field(j, "developer_team_ids");
    if (!devs.is_array()) fail(ErrorCode::ParseError, "developer_team_ids must be an array");
    for (const auto& t : devs) {
      if (!t.is_string()) fail(ErrorCode::ParseError, "developer_team_ids must hold strings");
      d.developer_team_ids.insert(t.get<std::string>());
    }
  }
  if (has(j, "royalty_rate")) d.royalty_rate = get_exact(j, "royalty_rate");
  d.description = get_string_or(j, "description", "");
  d.artifact_uri = get_string_or(j, "artifact_uri", "");
  return d;
}

}  // namespace coop

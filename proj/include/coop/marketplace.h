#pragma once

#include "coop/exact.h"
#include "coop/roles.h"
#include "coop/rulebook.h"
#include "coop/timestamp.h"

#include <nlohmann/json.hpp>

#include <compare>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace coop {

enum class ModuleCategory {
  RigidBodyDynamicsControl,
  PoseEstimationVisionDetection,
  SimulationDigitalEnvironments,
  LocalizationMapping,
  DatasetsModels,
  SpeechCommunication,
  Other,
};

inline constexpr std::size_t kModuleCategoryCount = 7;

enum class ModuleKind { Software, Data, Hardware };
enum class ModuleStatus { Active, Removed };

std::string_view to_string(ModuleCategory c);
std::string_view display_name(ModuleCategory c);
std::optional<ModuleCategory> parse_module_category(std::string_view text);
std::string_view to_string(ModuleKind k);
std::optional<ModuleKind> parse_module_kind(std::string_view text);
std::string_view to_string(ModuleStatus s);

struct ModuleRecord {
  std::string id;
  std::string name;
  ModuleCategory category = ModuleCategory::Other;
  ModuleKind kind = ModuleKind::Software;
  std::set<std::string> developer_team_ids;
  Exact royalty_rate{1, 4};
  Timestamp uploaded_at{};
  std::string upload_window_id;
  std::string description;
  std::string artifact_uri;
  ModuleStatus status = ModuleStatus::Active;
  std::optional<Timestamp> removed_at;

  // T_k: number of teams credited with the module.
  std::size_t co_developer_count() const { return developer_team_ids.size(); }
  bool developed_by(std::string_view team_id) const { return developer_team_ids.contains(std::string(team_id)); }

  bool operator==(const ModuleRecord&) const = default;
};

// What a team submits; the marketplace fills the rest.
struct ModuleDraft {
  std::string id;
  std::string name;
  ModuleCategory category = ModuleCategory::Other;
  ModuleKind kind = ModuleKind::Software;
  std::set<std::string> developer_team_ids;
  std::optional<Exact> royalty_rate;
  std::string description;
  std::string artifact_uri;
};

// Half-open interval [opens_at, closes_at).
struct UploadWindow {
  std::string id;
  Timestamp opens_at{};
  Timestamp closes_at{};

  bool contains(Timestamp t) const { return opens_at <= t && t < closes_at; }
  bool operator==(const UploadWindow&) const = default;
};

struct MilestoneScope {
  std::string league_id;
  std::string task_id;
  std::string milestone_id;

  auto operator<=>(const MilestoneScope&) const = default;
};

struct IntegrationDeclaration {
  std::string id;
  std::string user_team_id;
  std::string module_id;
  MilestoneScope scope;
  Timestamp declared_at{};
  bool verified = false;
  std::optional<Timestamp> verified_at;

  bool operator==(const IntegrationDeclaration&) const = default;
};

struct MarketplaceOptions {
  Exact default_royalty{1, 4};
  // Trust-based tracking: declarations count as verified on arrival.
  bool trust_based = false;
};

// Module registry for one event. Not internally synchronized; the owning
// event serializes writers.
class Marketplace {
public:
  Marketplace(std::shared_ptr<const Rulebook> rulebook, std::vector<UploadWindow> windows,
              MarketplaceOptions options = {});

  const ModuleRecord& upload_module(ModuleDraft draft, Timestamp now);
  void freeze(Timestamp at);
  const IntegrationDeclaration& declare_integration(const std::string& user_team_id, const std::string& module_id,
                                                    const MilestoneScope& scope, Timestamp now);
  const IntegrationDeclaration& verify_integration(const std::string& declaration_id, const Actor& actor,
                                                   Timestamp now);
  const ModuleRecord& remove_module(const std::string& module_id, const Actor& actor, Timestamp now);
  // Per-module royalty override; only allowed before the freeze instant.
  const ModuleRecord& set_royalty(const std::string& module_id, const Exact& rate, Timestamp now);

  // Distinct modules with a verified declaration by `user_team_id` for the
  // scope, excluding anything the team (co-)developed. Removed modules stay
  // in the result when the declaration predates removal.
  std::vector<ModuleRecord> external_modules_for(const std::string& user_team_id,
                                                 const MilestoneScope& scope) const;

  std::vector<ModuleRecord> list_modules(std::optional<ModuleCategory> category = std::nullopt,
                                         std::optional<std::string> developer = std::nullopt) const;

  const ModuleRecord* find_module(std::string_view id) const;
  const IntegrationDeclaration* find_declaration(std::string_view id) const;

  bool is_frozen(Timestamp now) const { return frozen_at_ && now >= *frozen_at_; }
  std::optional<Timestamp> frozen_at() const { return frozen_at_; }
  const std::vector<UploadWindow>& windows() const { return windows_; }
  const std::map<std::string, ModuleRecord>& modules() const { return modules_; }
  const std::vector<IntegrationDeclaration>& declarations() const { return declarations_; }
  const MarketplaceOptions& options() const { return options_; }
  const Rulebook& rulebook() const { return *rulebook_; }

private:
  std::shared_ptr<const Rulebook> rulebook_;
  std::vector<UploadWindow> windows_;
  MarketplaceOptions options_;
  std::map<std::string, ModuleRecord> modules_;
  std::vector<IntegrationDeclaration> declarations_;
  std::optional<Timestamp> frozen_at_;
  Timestamp latest_upload_{};
};

nlohmann::json to_json(const ModuleRecord& m);
ModuleRecord module_from_json(const nlohmann::json& j);
nlohmann::json to_json(const IntegrationDeclaration& d);
nlohmann::json to_json(const UploadWindow& w);
UploadWindow window_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MilestoneScope& s);
MilestoneScope scope_from_json(const nlohmann::json& j);
ModuleDraft draft_from_json(const nlohmann::json& j);

}  // namespace coop

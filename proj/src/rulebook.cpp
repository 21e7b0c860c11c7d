#include "coop/rulebook.h"

#include "coop/bundled.h"
#include "coop/error.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace coop {

using nlohmann::json;

std::string_view to_string(MilestoneType type) {
  switch (type) {
    case MilestoneType::Navigation: return "navigation";
    case MilestoneType::CommandUnderstanding: return "command_understanding";
    case MilestoneType::Manipulation: return "manipulation";
    case MilestoneType::Perception: return "perception";
    case MilestoneType::Other: return "other";
  }
  return "other";
}

std::optional<MilestoneType> parse_milestone_type(std::string_view text) {
  if (text == "navigation") return MilestoneType::Navigation;
  if (text == "command_understanding") return MilestoneType::CommandUnderstanding;
  if (text == "manipulation") return MilestoneType::Manipulation;
  if (text == "perception" || text == "object_detection") return MilestoneType::Perception;
  if (text == "other") return MilestoneType::Other;
  return std::nullopt;
}

const ConditionalLevel* MilestoneSpec::find_level(std::string_view level_id) const {
  for (const auto& l : levels) {
    if (l.id == level_id) return &l;
  }
  return nullptr;
}

const Penalty* MilestoneSpec::find_penalty(std::string_view penalty_id) const {
  for (const auto& p : penalties) {
    if (p.id == penalty_id) return &p;
  }
  return nullptr;
}

const MilestoneSpec* TaskSpec::find_milestone(std::string_view milestone_id) const {
  for (const auto& m : milestones) {
    if (m.id == milestone_id) return &m;
  }
  return nullptr;
}

std::int64_t TaskSpec::total_base_score() const {
  std::int64_t sum = 0;
  for (const auto& m : milestones) sum += m.base_score;
  return sum;
}

const TaskSpec* LeagueSpec::find_task(std::string_view task_id) const {
  for (const auto& t : tasks) {
    if (t.id == task_id) return &t;
  }
  return nullptr;
}

const TaskLevel* LeagueSpec::find_task_level(std::string_view key) const {
  for (const auto& l : task_levels) {
    if (l.id == key) return &l;
  }
  for (const auto& l : task_levels) {
    if (l.description == key) return &l;
  }
  const TaskLevel* match = nullptr;
  for (const auto& l : task_levels) {
    if (!key.empty() && std::string_view(l.description).starts_with(key)) {
      if (match) return nullptr;  // ambiguous
      match = &l;
    }
  }
  return match;
}

const TaskLevel* LeagueSpec::task_level_for_pins(int pinned) const {
  const TaskLevel* best = nullptr;
  for (const auto& l : task_levels) {
    if (!l.pinned_variables) continue;
    if (*l.pinned_variables == pinned) return &l;
    // Pins beyond the largest tabulated count fall into the last bracket.
    if (*l.pinned_variables < pinned && (!best || *best->pinned_variables < *l.pinned_variables)) best = &l;
  }
  return best;
}

const LeagueSpec* Rulebook::find_league(std::string_view league_id) const {
  for (const auto& l : leagues) {
    if (l.id == league_id) return &l;
  }
  return nullptr;
}

namespace {

// Walks a JSON tree while remembering where it is, so every error names the
// offending path ("leagues[0].tasks[1].milestones[3].base_score").
class Reader {
public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& node() const { return node_; }

  [[noreturn]] void parse_error(const std::string& what) const {
    fail(ErrorCode::ParseError, path_ + ": " + what);
  }
  [[noreturn]] void invalid(const std::string& what) const {
    fail(ErrorCode::ValidationError, path_ + ": " + what);
  }

  void expect_object() const {
    if (!node_.is_object()) parse_error("expected an object");
  }

  bool has(const char* key) const { return node_.is_object() && node_.contains(key); }

  Reader at(const char* key) const {
    expect_object();
    auto it = node_.find(key);
    if (it == node_.end()) fail(ErrorCode::ParseError, path_ + "." + key + ": missing");
    return Reader(*it, path_ + "." + key);
  }

  std::vector<Reader> items() const {
    if (!node_.is_array()) parse_error("expected an array");
    std::vector<Reader> out;
    out.reserve(node_.size());
    for (std::size_t i = 0; i < node_.size(); ++i) {
      out.emplace_back(node_[i], path_ + "[" + std::to_string(i) + "]");
    }
    return out;
  }

  std::string str() const {
    if (!node_.is_string()) parse_error("expected a string");
    return node_.get<std::string>();
  }

  std::string id() const {
    auto s = str();
    if (s.empty()) invalid("identifier must not be empty");
    return s;
  }

  std::int64_t integer() const {
    if (!node_.is_number_integer()) parse_error("expected an integer");
    if (node_.is_number_unsigned() && node_.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
      invalid("integer out of range");
    }
    return node_.get<std::int64_t>();
  }

  Exact fraction() const {
    Exact v;
    try {
      v = exact_from_json(node_);
    } catch (const Error& e) {
      parse_error(e.what());
    }
    if (v < 0 || v > 1) invalid("factor " + to_fixed(v, 6) + " outside [0,1]");
    return v;
  }

private:
  const json& node_;
  std::string path_;
};

struct TypeCatalog {
  std::vector<ConditionalLevel> levels;
  std::vector<Penalty> penalties;
};

std::vector<ConditionalLevel> read_levels(const Reader& r) {
  std::vector<ConditionalLevel> out;
  std::set<std::string> seen;
  for (const auto& item : r.items()) {
    ConditionalLevel level;
    level.id = item.at("id").id();
    level.description = item.has("description") ? item.at("description").str() : std::string{};
    level.factor = item.at("factor").fraction();
    if (!seen.insert(level.id).second) item.invalid("duplicate conditional level id '" + level.id + "'");
    out.push_back(std::move(level));
  }
  return out;
}

std::vector<Penalty> read_penalties(const Reader& r) {
  std::vector<Penalty> out;
  std::set<std::string> seen;
  for (const auto& item : r.items()) {
    Penalty p;
    p.id = item.at("id").id();
    p.description = item.has("description") ? item.at("description").str() : std::string{};
    auto pts = item.at("points");
    p.points = pts.integer();
    if (p.points < 0) pts.invalid("penalty points must be non-negative");
    if (!seen.insert(p.id).second) item.invalid("duplicate penalty id '" + p.id + "'");
    out.push_back(std::move(p));
  }
  return out;
}

template <typename T>
void append_unique(std::vector<T>& into, const std::vector<T>& extra, const Reader& where, const char* what) {
  for (const auto& e : extra) {
    if (std::any_of(into.begin(), into.end(), [&](const T& x) { return x.id == e.id; })) {
      where.invalid(std::string("duplicate ") + what + " id '" + e.id + "'");
    }
    into.push_back(e);
  }
}

MilestoneSpec read_milestone(const Reader& r, const std::map<MilestoneType, TypeCatalog>& catalogs) {
  r.expect_object();
  MilestoneSpec m;
  m.id = r.at("id").id();
  auto number = r.at("number");
  const auto n = number.integer();
  if (n < 1 || n > 100000) number.invalid("milestone number must be a positive integer");
  m.number = static_cast<int>(n);
  m.description = r.has("description") ? r.at("description").str() : std::string{};

  m.type = MilestoneType::Other;
  if (r.has("type")) {
    auto t = r.at("type");
    auto parsed = parse_milestone_type(t.str());
    if (!parsed) t.invalid("unknown milestone type '" + t.str() + "'");
    m.type = *parsed;
  }

  auto b = r.at("base_score");
  m.base_score = b.integer();
  if (m.base_score < 0) b.invalid("base score must be non-negative");

  if (auto it = catalogs.find(m.type); it != catalogs.end()) {
    m.levels = it->second.levels;
    m.penalties = it->second.penalties;
  }
  if (r.has("conditional_levels")) {
    auto lv = r.at("conditional_levels");
    append_unique(m.levels, read_levels(lv), lv, "conditional level");
  }
  if (r.has("penalties")) {
    auto pv = r.at("penalties");
    append_unique(m.penalties, read_penalties(pv), pv, "penalty");
  }
  if (m.levels.empty()) r.invalid("milestone '" + m.id + "' has no conditional levels");
  if (r.has("exclusive_group")) m.exclusive_group = r.at("exclusive_group").str();
  return m;
}

TaskSpec read_task(const Reader& r, const std::map<MilestoneType, TypeCatalog>& catalogs) {
  r.expect_object();
  TaskSpec t;
  t.id = r.at("id").id();
  t.name = r.has("name") ? r.at("name").str() : t.id;
  std::set<std::string> seen;
  int last_number = 0;
  auto list = r.at("milestones");
  for (const auto& item : list.items()) {
    auto m = read_milestone(item, catalogs);
    if (!seen.insert(m.id).second) item.invalid("duplicate milestone id '" + m.id + "'");
    if (m.number < last_number) item.invalid("milestones must be ordered by number");
    last_number = m.number;
    t.milestones.push_back(std::move(m));
  }
  if (t.milestones.empty()) list.invalid("task '" + t.id + "' has no milestones");

  std::map<std::string, int> group_sizes;
  for (const auto& m : t.milestones) {
    if (!m.exclusive_group.empty()) ++group_sizes[m.exclusive_group];
  }
  for (const auto& [group, size] : group_sizes) {
    if (size < 2) r.invalid("exclusive group '" + group + "' has a single member");
  }
  return t;
}

LeagueSpec read_league(const Reader& r) {
  r.expect_object();
  LeagueSpec league;
  league.id = r.at("id").id();
  league.name = r.has("name") ? r.at("name").str() : league.id;

  if (r.has("default_royalty")) league.default_royalty = r.at("default_royalty").fraction();
  if (r.has("attempt_limit")) {
    auto a = r.at("attempt_limit");
    const auto v = a.integer();
    if (v < 1 || v > 1000) a.invalid("attempt_limit must be >= 1");
    league.attempt_limit = static_cast<int>(v);
  }
  if (r.has("attempt_duration_s")) {
    auto d = r.at("attempt_duration_s");
    const auto v = d.integer();
    if (v <= 0) d.invalid("attempt_duration_s must be > 0");
    league.attempt_duration = std::chrono::seconds{v};
  }

  auto levels = r.at("task_conditional_levels");
  std::set<std::string> seen_levels;
  for (const auto& item : levels.items()) {
    TaskLevel tl;
    tl.id = item.at("id").id();
    tl.description = item.has("description") ? item.at("description").str() : std::string{};
    tl.factor = item.at("factor").fraction();
    if (item.has("pinned_variables")) {
      auto pv = item.at("pinned_variables");
      const auto v = pv.integer();
      if (v < 0 || v > 64) pv.invalid("pinned_variables out of range");
      tl.pinned_variables = static_cast<int>(v);
    }
    if (!seen_levels.insert(tl.id).second) item.invalid("duplicate task level id '" + tl.id + "'");
    league.task_levels.push_back(std::move(tl));
  }
  if (std::none_of(league.task_levels.begin(), league.task_levels.end(),
                   [](const TaskLevel& l) { return l.factor == 1; })) {
    levels.invalid("league '" + league.id + "' needs a task conditional level with T = 1.0");
  }

  std::map<MilestoneType, TypeCatalog> catalogs;
  if (r.has("type_catalogs")) {
    auto cat = r.at("type_catalogs");
    cat.expect_object();
    for (const auto& [key, value] : cat.node().items()) {
      Reader entry(value, cat.path() + "." + key);
      auto type = parse_milestone_type(key);
      if (!type) entry.invalid("unknown milestone type '" + key + "'");
      entry.expect_object();
      TypeCatalog tc;
      if (entry.has("conditional_levels")) tc.levels = read_levels(entry.at("conditional_levels"));
      if (entry.has("penalties")) tc.penalties = read_penalties(entry.at("penalties"));
      catalogs[*type] = std::move(tc);
    }
  }

  auto tasks = r.at("tasks");
  std::set<std::string> seen_tasks;
  for (const auto& item : tasks.items()) {
    auto t = read_task(item, catalogs);
    if (!seen_tasks.insert(t.id).second) item.invalid("duplicate task id '" + t.id + "'");
    league.tasks.push_back(std::move(t));
  }
  if (league.tasks.empty()) tasks.invalid("league '" + league.id + "' has no tasks");
  return league;
}

json levels_json(const std::vector<ConditionalLevel>& levels) {
  json out = json::array();
  for (const auto& l : levels) {
    out.push_back({{"id", l.id}, {"description", l.description}, {"factor", to_decimal_json(l.factor)}});
  }
  return out;
}

}  // namespace

Rulebook load_rulebook(const json& document) {
  try {
    Reader root(document, "$");
    root.expect_object();
    Rulebook rb;
    rb.version = root.at("version").id();
    auto leagues = root.at("leagues");
    std::set<std::string> seen;
    for (const auto& item : leagues.items()) {
      auto league = read_league(item);
      if (!seen.insert(league.id).second) item.invalid("duplicate league id '" + league.id + "'");
      rb.leagues.push_back(std::move(league));
    }
    if (rb.leagues.empty()) leagues.invalid("no leagues");
    return rb;
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("malformed rulebook: ") + e.what());
  }
}

Rulebook load_rulebook_text(std::string_view text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) fail(ErrorCode::ParseError, "rulebook is not valid JSON");
  return load_rulebook(doc);
}

Rulebook load_rulebook_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::NotFound, "cannot open rulebook '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return load_rulebook_text(ss.str());
  } catch (const Error& e) {
    fail(e.code(), path + ": " + e.what());
  }
}

Rulebook bundled_rulebook(std::string_view league_id) {
  auto text = bundled::find("rulebooks/" + std::string(league_id));
  if (!text) fail(ErrorCode::NotFound, "no bundled rulebook for league '" + std::string(league_id) + "'");
  return load_rulebook_text(*text);
}

Rulebook bundled_rulebooks() {
  const std::vector<Rulebook> parts{bundled_rulebook("irl"), bundled_rulebook("srl"), bundled_rulebook("orl")};
  return merge_rulebooks(parts);
}

Rulebook merge_rulebooks(std::span<const Rulebook> parts) {
  Rulebook out;
  std::set<std::string> versions;
  for (const auto& part : parts) {
    versions.insert(part.version);
    for (const auto& league : part.leagues) {
      if (out.find_league(league.id)) {
        fail(ErrorCode::ValidationError, "duplicate league id '" + league.id + "' across rulebooks");
      }
      out.leagues.push_back(league);
    }
  }
  if (out.leagues.empty()) fail(ErrorCode::ValidationError, "no leagues");
  for (const auto& v : versions) {
    if (!out.version.empty()) out.version += "+";
    out.version += v;
  }
  return out;
}

json to_json(const Rulebook& rulebook) {
  json leagues = json::array();
  for (const auto& league : rulebook.leagues) {
    json task_levels = json::array();
    for (const auto& tl : league.task_levels) {
      json j{{"id", tl.id}, {"description", tl.description}, {"factor", to_decimal_json(tl.factor)}};
      if (tl.pinned_variables) j["pinned_variables"] = *tl.pinned_variables;
      task_levels.push_back(std::move(j));
    }
    json tasks = json::array();
    for (const auto& task : league.tasks) {
      json milestones = json::array();
      for (const auto& m : task.milestones) {
        json penalties = json::array();
        for (const auto& p : m.penalties) {
          penalties.push_back({{"id", p.id}, {"description", p.description}, {"points", p.points}});
        }
        json jm{{"id", m.id},
                {"number", m.number},
                {"description", m.description},
                {"type", to_string(m.type)},
                {"base_score", m.base_score},
                {"conditional_levels", levels_json(m.levels)},
                {"penalties", std::move(penalties)}};
        if (!m.exclusive_group.empty()) jm["exclusive_group"] = m.exclusive_group;
        milestones.push_back(std::move(jm));
      }
      tasks.push_back({{"id", task.id}, {"name", task.name}, {"milestones", std::move(milestones)}});
    }
    leagues.push_back({{"id", league.id},
                       {"name", league.name},
                       {"default_royalty", to_decimal_json(league.default_royalty)},
                       {"attempt_limit", league.attempt_limit},
                       {"attempt_duration_s", league.attempt_duration.count()},
                       {"task_conditional_levels", std::move(task_levels)},
                       {"tasks", std::move(tasks)}});
  }
  return {{"version", rulebook.version}, {"leagues", std::move(leagues)}};
}

std::vector<Diagnostic> rulebook_warnings(const Rulebook& rulebook) {
  std::vector<Diagnostic> out;
  for (const auto& league : rulebook.leagues) {
    for (const auto& task : league.tasks) {
      for (const auto& m : task.milestones) {
        const bool full = std::any_of(m.levels.begin(), m.levels.end(),
                                      [](const ConditionalLevel& l) { return l.factor == 1; });
        if (!full) {
          out.push_back({league.id + "/" + task.id + "/" + m.id,
                         "no conditional level with l = 1.0; milestone cannot be scored at full autonomy"});
        }
      }
    }
  }
  return out;
}

const MilestoneSpec& lookup_milestone(const Rulebook& rulebook, std::string_view league_id,
                                      std::string_view task_id, std::string_view milestone_id) {
  const auto* league = rulebook.find_league(league_id);
  if (!league) fail(ErrorCode::NotFound, "league '" + std::string(league_id) + "' not found");
  const auto* task = league->find_task(task_id);
  if (!task) fail(ErrorCode::NotFound, "task '" + std::string(task_id) + "' not found in league '" + league->id + "'");
  const auto* m = task->find_milestone(milestone_id);
  if (!m) fail(ErrorCode::NotFound, "milestone '" + std::string(milestone_id) + "' not found in task '" + task->id + "'");
  return *m;
}

Exact task_conditional_factor(const Rulebook& rulebook, std::string_view league_id,
                              std::string_view level_description) {
  const auto* league = rulebook.find_league(league_id);
  if (!league) fail(ErrorCode::NotFound, "league '" + std::string(league_id) + "' not found");
  const auto* level = league->find_task_level(level_description);
  if (!level) {
    fail(ErrorCode::NotFound, "task conditional level '" + std::string(level_description) + "' not found in league '" +
                                  league->id + "'");
  }
  return level->factor;
}

}  // namespace coop

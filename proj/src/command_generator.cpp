#include "coop/command_generator.h"

#include "coop/bundled.h"
#include "coop/error.h"
#include "json_util.h"

#include <algorithm>
#include <cctype>
#include <limits>

namespace coop {

using nlohmann::json;

namespace {

std::vector<std::string> string_list(const json& j, const char* key) {
  std::vector<std::string> out;
  if (!detail::has(j, key)) return out;
  const auto& v = j.at(key);
  if (!v.is_array()) fail(ErrorCode::ParseError, std::string("'") + key + "' must be an array");
  for (const auto& item : v) {
    if (!item.is_string()) fail(ErrorCode::ParseError, std::string("'") + key + "' must hold strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

bool contains(const std::vector<std::string>& v, std::string_view s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

void require_non_empty(const std::vector<std::string>& v, const char* name, const std::string& league) {
  if (v.empty()) fail(ErrorCode::DegenerateDomain, std::string("domain for '") + league + "' has no " + name);
}

void check_known_pins(const PinSet& pins, std::span<const char* const> names, const std::string& league) {
  for (const auto& [key, value] : pins) {
    if (std::none_of(names.begin(), names.end(), [&](const char* n) { return key == n; })) {
      fail(ErrorCode::InvalidPin, "'" + key + "' is not a " + league + " command variable");
    }
  }
}

// Draws an unpinned variable, or validates and keeps a pinned one.
std::string choose(const std::vector<std::string>& domain, const PinSet& pins, const char* name, CommandRng& rng,
                   std::vector<std::string>& pinned) {
  if (auto it = pins.find(name); it != pins.end()) {
    if (!contains(domain, it->second)) {
      fail(ErrorCode::InvalidPin, std::string(name) + " value '" + it->second + "' is outside its domain");
    }
    pinned.emplace_back(name);
    return it->second;
  }
  return domain[rng.below(domain.size())];
}

void attach_task_level(GeneratedCommand& cmd, const LeagueSpec& league) {
  const auto* level = league.task_level_for_pins(static_cast<int>(cmd.pinned.size()));
  if (!level) {
    fail(ErrorCode::ConfigError, "league '" + league.id + "' has no task level for " +
                                     std::to_string(cmd.pinned.size()) + " pinned variables");
  }
  cmd.task_level_id = level->id;
  cmd.task_factor = level->factor;
}

}  // namespace

VariableDomain domain_from_json(const json& j) {
  using namespace detail;
  VariableDomain d;
  d.league_id = get_string(j, "league");
  d.kitchens = string_list(j, "kitchens");
  d.locations = string_list(j, "locations");
  d.actions = string_list(j, "actions");
  d.points = string_list(j, "points");
  if (has(j, "objects")) {
    for (const auto& o : j.at("objects")) {
      if (o.is_string()) {
        d.objects.push_back({o.get<std::string>(), ""});
      } else {
        d.objects.push_back({get_string(o, "name"), get_string_or(o, "set", "")});
      }
    }
  }
  if (has(j, "parcels")) {
    for (const auto& p : j.at("parcels")) {
      if (p.is_string()) {
        d.parcels.push_back({p.get<std::string>(), ""});
      } else {
        d.parcels.push_back({get_string(p, "id"), get_string_or(p, "platform", "")});
      }
    }
  }
  return d;
}

json to_json(const VariableDomain& d) {
  json j{{"league", d.league_id}};
  if (!d.kitchens.empty()) j["kitchens"] = d.kitchens;
  if (!d.locations.empty()) j["locations"] = d.locations;
  if (!d.objects.empty()) {
    j["objects"] = json::array();
    for (const auto& o : d.objects) j["objects"].push_back({{"name", o.name}, {"set", o.set}});
  }
  if (!d.actions.empty()) j["actions"] = d.actions;
  if (!d.parcels.empty()) {
    j["parcels"] = json::array();
    for (const auto& p : d.parcels) j["parcels"].push_back({{"id", p.id}, {"platform", p.platform}});
  }
  if (!d.points.empty()) j["points"] = d.points;
  return j;
}

VariableDomain bundled_domain(std::string_view league_id) {
  auto text = bundled::find("domains/" + std::string(league_id));
  if (!text) fail(ErrorCode::NotFound, "no bundled command domain for league '" + std::string(league_id) + "'");
  return domain_from_json(json::parse(*text));
}

PinSet parse_pins(std::span<const std::string> items) {
  PinSet pins;
  for (const auto& item : items) {
    auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) fail(ErrorCode::InvalidPin, "pin '" + item + "' is not key=value");
    auto key = item.substr(0, eq);
    if (pins.contains(key)) fail(ErrorCode::InvalidPin, "variable '" + key + "' pinned twice");
    pins.emplace(std::move(key), item.substr(eq + 1));
  }
  return pins;
}

json to_json(const GeneratedCommand& c) {
  json assignment = json::object();
  for (const auto& [k, v] : c.assignment) assignment[k] = v;
  return {{"league_id", c.league_id},
          {"task_number", c.task_number},
          {"seed", c.seed},
          {"assignment", std::move(assignment)},
          {"pinned", c.pinned},
          {"task_level_id", c.task_level_id},
          {"task_factor", to_decimal_json(c.task_factor)},
          {"text", c.text},
          {"warnings", c.warnings}};
}

std::size_t CommandRng::below(std::size_t n) {
  if (n == 0) fail(ErrorCode::DegenerateDomain, "cannot draw from an empty domain");
  const std::uint64_t bound = n;
  // 2^64 mod bound; values below it would bias the low residues.
  const std::uint64_t threshold = (std::numeric_limits<std::uint64_t>::max() - bound + 1) % bound;
  for (;;) {
    const std::uint64_t x = engine_();
    if (x >= threshold) return static_cast<std::size_t>(x % bound);
  }
}

std::string render_srl(const std::map<std::string, std::string>& a) {
  const auto& location_i = a.at("location_i");
  std::string text = "Pick the " + a.at("object") + " from the " + a.at("kitchen_i") + " " + lower(location_i);
  if (a.at("action") == "give") {
    text += " and give them to the person in the " + a.at("kitchen_j") + " kitchen.";
  } else {
    const auto loc = lower(a.at("location_j"));
    const bool inside = loc == "dishwasher" || loc == "cabinet" || loc == "drawer";
    text += std::string(" and place them ") + (inside ? "in" : "on") + " the " + a.at("kitchen_j") + " " + loc + ".";
  }
  return text;
}

std::string render_orl(const std::map<std::string, std::string>& a) {
  return "Pick parcel " + a.at("parcel") + " from Pick-Up Point " + a.at("pickup_point") + " and deliver it to Point " +
         a.at("delivery_point");
}

GeneratedCommand generate_srl(const VariableDomain& domain, const LeagueSpec& league, int task_number,
                              const std::optional<std::string>& base_kitchen, const PinSet& pins,
                              std::uint64_t seed) {
  if (task_number < 1 || task_number > 3) {
    fail(ErrorCode::InvalidTask, "task number must be 1, 2 or 3, got " + std::to_string(task_number));
  }
  require_non_empty(domain.kitchens, "kitchens", league.id);
  require_non_empty(domain.locations, "locations", league.id);
  require_non_empty(domain.actions, "actions", league.id);
  if (domain.objects.empty()) fail(ErrorCode::DegenerateDomain, "domain for '" + league.id + "' has no objects");
  check_known_pins(pins, kSrlVariables, "SRL");
  if (task_number < 3) {
    if (!base_kitchen) fail(ErrorCode::InvalidPin, "tasks 1 and 2 need the team's base kitchen");
    if (!contains(domain.kitchens, *base_kitchen)) {
      fail(ErrorCode::InvalidPin, "base kitchen '" + *base_kitchen + "' is not in the domain");
    }
  }

  GeneratedCommand cmd;
  cmd.league_id = league.id;
  cmd.task_number = task_number;
  cmd.seed = seed;
  CommandRng rng(seed);
  auto& a = cmd.assignment;

  // Kitchens fixed by the task structure accept a matching pin but it is not
  // a simplification, so it does not count.
  auto forced = [&](const char* name, const std::string& value) {
    if (auto it = pins.find(name); it != pins.end() && it->second != value) {
      fail(ErrorCode::InvalidPin, std::string(name) + " is fixed to the base kitchen '" + value + "' in task " +
                                      std::to_string(task_number));
    }
    a[name] = value;
  };
  if (task_number == 1) {
    forced("kitchen_i", *base_kitchen);
    forced("kitchen_j", *base_kitchen);
  } else if (task_number == 2) {
    forced("kitchen_i", *base_kitchen);
    a["kitchen_j"] = choose(domain.kitchens, pins, "kitchen_j", rng, cmd.pinned);
    if (a["kitchen_j"] == *base_kitchen) cmd.warnings.push_back("destination kitchen equals the base kitchen");
  } else {
    a["kitchen_i"] = choose(domain.kitchens, pins, "kitchen_i", rng, cmd.pinned);
    a["kitchen_j"] = choose(domain.kitchens, pins, "kitchen_j", rng, cmd.pinned);
  }
  a["location_i"] = choose(domain.locations, pins, "location_i", rng, cmd.pinned);
  a["location_j"] = choose(domain.locations, pins, "location_j", rng, cmd.pinned);
  std::vector<std::string> names;
  for (const auto& o : domain.objects) names.push_back(o.name);
  a["object"] = choose(names, pins, "object", rng, cmd.pinned);
  a["action"] = choose(domain.actions, pins, "action", rng, cmd.pinned);

  attach_task_level(cmd, league);
  cmd.text = render_srl(a);
  return cmd;
}

GeneratedCommand generate_orl(const VariableDomain& domain, const LeagueSpec& league, int task_number,
                              const PinSet& pins, std::uint64_t seed, const std::optional<std::string>& platform) {
  if (task_number < 1 || task_number > 3) {
    fail(ErrorCode::InvalidTask, "task number must be 1, 2 or 3, got " + std::to_string(task_number));
  }
  if (domain.parcels.empty()) fail(ErrorCode::DegenerateDomain, "domain for '" + league.id + "' has no parcels");
  require_non_empty(domain.points, "points", league.id);
  check_known_pins(pins, kOrlVariables, "ORL");
  auto pickup_pin = pins.find("pickup_point");
  auto delivery_pin = pins.find("delivery_point");
  if (pickup_pin != pins.end() && delivery_pin != pins.end() && pickup_pin->second == delivery_pin->second) {
    fail(ErrorCode::InvalidPin, "pick-up and delivery point must differ");
  }
  if (domain.points.size() < 2 && (pickup_pin == pins.end() || delivery_pin == pins.end())) {
    fail(ErrorCode::DegenerateDomain, "at least two points are needed to draw distinct pick-up and delivery points");
  }

  GeneratedCommand cmd;
  cmd.league_id = league.id;
  cmd.task_number = task_number;
  cmd.seed = seed;
  CommandRng rng(seed);
  auto& a = cmd.assignment;

  std::vector<std::string> parcel_ids;
  for (const auto& p : domain.parcels) parcel_ids.push_back(p.id);
  a["parcel"] = choose(parcel_ids, pins, "parcel", rng, cmd.pinned);

  if (delivery_pin != pins.end() && pickup_pin == pins.end()) {
    a["delivery_point"] = choose(domain.points, pins, "delivery_point", rng, cmd.pinned);
    std::vector<std::string> rest;
    for (const auto& p : domain.points) {
      if (p != a["delivery_point"]) rest.push_back(p);
    }
    a["pickup_point"] = rest[rng.below(rest.size())];
  } else {
    a["pickup_point"] = choose(domain.points, pins, "pickup_point", rng, cmd.pinned);
    if (delivery_pin != pins.end()) {
      a["delivery_point"] = choose(domain.points, pins, "delivery_point", rng, cmd.pinned);
    } else {
      std::vector<std::string> rest;
      for (const auto& p : domain.points) {
        if (p != a["pickup_point"]) rest.push_back(p);
      }
      a["delivery_point"] = rest[rng.below(rest.size())];
    }
  }
  std::sort(cmd.pinned.begin(), cmd.pinned.end());

  if (platform) {
    for (const auto& p : domain.parcels) {
      if (p.id == a["parcel"] && !p.platform.empty() && p.platform != *platform) {
        cmd.warnings.push_back("parcel " + p.id + " is meant for " + p.platform + " robots, not " + *platform);
      }
    }
  }

  attach_task_level(cmd, league);
  cmd.text = render_orl(a);
  return cmd;
}

GeneratedCommand generate_command(const VariableDomain& domain, const LeagueSpec& league, const CommandRequest& req) {
  if (!domain.kitchens.empty()) return generate_srl(domain, league, req.task_number, req.base_kitchen, req.pins, req.seed);
  if (!domain.parcels.empty()) return generate_orl(domain, league, req.task_number, req.pins, req.seed, req.platform);
  fail(ErrorCode::InvalidTask, "league '" + req.league_id + "' has no command domain");
}

}  // namespace coop

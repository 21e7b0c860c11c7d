#pragma once

#include "coop/exact.h"
#include "coop/rulebook.h"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace coop {

struct ObjectChoice {
  std::string name;
  std::string set;

  bool operator==(const ObjectChoice&) const = default;
};

struct ParcelChoice {
  std::string id;
  std::string platform;  // "aerial" or "ground"

  bool operator==(const ParcelChoice&) const = default;
};

struct VariableDomain {
  std::string league_id;
  std::vector<std::string> kitchens;
  std::vector<std::string> locations;
  std::vector<ObjectChoice> objects;
  std::vector<std::string> actions;
  std::vector<ParcelChoice> parcels;
  std::vector<std::string> points;

  bool operator==(const VariableDomain&) const = default;
};

VariableDomain domain_from_json(const nlohmann::json& j);
nlohmann::json to_json(const VariableDomain& d);
VariableDomain bundled_domain(std::string_view league_id);

// Variable name -> pinned value.
using PinSet = std::map<std::string, std::string, std::less<>>;

// Parses "key=value" items.
PinSet parse_pins(std::span<const std::string> items);

inline constexpr const char* kSrlVariables[] = {"kitchen_i", "kitchen_j", "location_i",
                                                "location_j", "object", "action"};
inline constexpr const char* kOrlVariables[] = {"parcel", "pickup_point", "delivery_point"};

struct CommandRequest {
  std::string league_id;
  int task_number = 1;
  std::optional<std::string> base_kitchen;  // SRL tasks 1 and 2
  std::optional<std::string> platform;      // ORL robot class, advisory
  PinSet pins;
  std::uint64_t seed = 0;
};

struct GeneratedCommand {
  std::string league_id;
  int task_number = 1;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> assignment;
  std::vector<std::string> pinned;  // variables counted towards the task level
  std::string task_level_id;
  Exact task_factor{1};
  std::string text;
  std::vector<std::string> warnings;

  bool operator==(const GeneratedCommand&) const = default;
};

nlohmann::json to_json(const GeneratedCommand& c);

// mt19937_64 (fully specified by the C++ standard) plus an unbiased
// rejection-sampled bounded draw, so a seed yields the same command with any
// conforming toolchain.
class CommandRng {
public:
  explicit CommandRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform index in [0, n). n must be positive.
  std::size_t below(std::size_t n);

private:
  std::mt19937_64 engine_;
};

GeneratedCommand generate_srl(const VariableDomain& domain, const LeagueSpec& league, int task_number,
                              const std::optional<std::string>& base_kitchen, const PinSet& pins,
                              std::uint64_t seed);
GeneratedCommand generate_orl(const VariableDomain& domain, const LeagueSpec& league, int task_number,
                              const PinSet& pins, std::uint64_t seed,
                              const std::optional<std::string>& platform = std::nullopt);
// Dispatches on the request league.
GeneratedCommand generate_command(const VariableDomain& domain, const LeagueSpec& league, const CommandRequest& req);

std::string render_srl(const std::map<std::string, std::string>& assignment);
std::string render_orl(const std::map<std::string, std::string>& assignment);

}  // namespace coop

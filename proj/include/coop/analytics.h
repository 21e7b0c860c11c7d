#pragma once

#include "coop/exact.h"
#include "coop/marketplace.h"
#include "coop/runtime.h"
#include "coop/timestamp.h"

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace coop {

enum class GraphPhase { PreEvent, PostEvent };
std::string_view to_string(GraphPhase p);
// Accepts "pre_event"/"pre" and "post_event"/"post".
std::optional<GraphPhase> parse_graph_phase(std::string_view text);

enum class GraphFormat { Dot, Json };
GraphFormat parse_graph_format(std::string_view text);

struct GraphNode {
  std::string team_id;
  std::string league_id;
  Exact royalty_weight;

  bool operator==(const GraphNode&) const = default;
};

// Developer -> user; one edge per (developer, user, module).
struct GraphEdge {
  std::string developer_team_id;
  std::string user_team_id;
  std::string module_id;
  ModuleCategory category = ModuleCategory::Other;
  bool verified = false;
  GraphPhase phase = GraphPhase::PreEvent;

  bool operator==(const GraphEdge&) const = default;
};

struct TransferGraph {
  GraphPhase phase = GraphPhase::PostEvent;
  std::vector<GraphNode> nodes;  // sorted by team id
  std::vector<GraphEdge> edges;  // sorted by (developer, user, module)

  bool operator==(const TransferGraph&) const = default;
};

// Everything the graph depends on, detached from the live event.
struct GraphSource {
  std::vector<GraphNode> nodes;
  std::map<std::string, ModuleRecord> modules;
  std::vector<IntegrationDeclaration> declarations;
  std::optional<Timestamp> cutoff;  // declarations before it are pre-event
  bool trust_based = false;
};

GraphSource graph_source(const Event& event);

// The pre-event graph keeps declarations made before the cutoff; the
// post-event graph keeps all of them.
TransferGraph build_transfer_graph(const GraphSource& source, GraphPhase phase);
TransferGraph build_transfer_graph(const Event& event, GraphPhase phase);

// Undirected connected components over all nodes.
std::size_t connected_components(const TransferGraph& g);
// Components as sorted team id lists, ordered by their first member.
std::vector<std::vector<std::string>> component_members(const TransferGraph& g);

// s_min + (w / w_max)(s_max - s_min); s_min for every node when all weights are zero.
Exact node_size(const Exact& weight, const Exact& max_weight);
std::string_view category_color(ModuleCategory c);

std::string export_graph(const TransferGraph& g, GraphFormat format);
std::string to_dot(const TransferGraph& g);
nlohmann::json to_json(const TransferGraph& g);
TransferGraph graph_from_json(const nlohmann::json& j);

struct ReuseStats {
  std::int64_t modules_total = 0;
  std::int64_t removals = 0;
  std::vector<std::pair<std::string, std::int64_t>> uploads_per_window;  // window order
  std::map<std::string, std::int64_t> integrations_per_category;         // every category listed
  std::map<std::string, std::int64_t> integrations_per_league;           // user team league
  std::size_t components_pre = 0;
  std::size_t components_post = 0;
};

ReuseStats reuse_stats(const GraphSource& source, const std::vector<UploadWindow>& windows);
ReuseStats reuse_stats(const Event& event);
nlohmann::json to_json(const ReuseStats& s);

// Deterministic audit document: every closed attempt's breakdown in close
// order, the counted attempt per team and task, per-league leaderboards and
// royalty totals.
nlohmann::json score_report(const Event& event);

}  // namespace coop

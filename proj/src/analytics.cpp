#include "coop/analytics.h"

#include "coop/error.h"
#include "json_util.h"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

namespace coop {

using nlohmann::json;

namespace {

constexpr std::string_view kPalette[kModuleCategoryCount] = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#7f7f7f",
};

constexpr ModuleCategory kCategories[kModuleCategoryCount] = {
    ModuleCategory::RigidBodyDynamicsControl, ModuleCategory::PoseEstimationVisionDetection,
    ModuleCategory::SimulationDigitalEnvironments, ModuleCategory::LocalizationMapping,
    ModuleCategory::DatasetsModels, ModuleCategory::SpeechCommunication,
    ModuleCategory::Other,
};

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

struct DisjointSet {
  std::vector<std::size_t> parent;
  explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

std::string_view to_string(GraphPhase p) {
  return p == GraphPhase::PreEvent ? "pre_event" : "post_event";
}

std::optional<GraphPhase> parse_graph_phase(std::string_view text) {
  if (text == "pre_event" || text == "pre") return GraphPhase::PreEvent;
  if (text == "post_event" || text == "post") return GraphPhase::PostEvent;
  return std::nullopt;
}

GraphFormat parse_graph_format(std::string_view text) {
  if (text == "dot") return GraphFormat::Dot;
  if (text == "json") return GraphFormat::Json;
  fail(ErrorCode::UnsupportedFormat, "unsupported graph format '" + std::string(text) + "' (dot, json)");
}

std::string_view category_color(ModuleCategory c) {
  return kPalette[static_cast<std::size_t>(c)];
}

GraphSource graph_source(const Event& event) {
  GraphSource s;
  for (const auto& [id, team] : event.teams()) {
    s.nodes.push_back({id, team.league_id, event.royalty_total(id)});
  }
  s.modules = event.marketplace().modules();
  s.declarations = event.marketplace().declarations();
  s.cutoff = event.marketplace().frozen_at();
  s.trust_based = event.config().trust_based;
  return s;
}

TransferGraph build_transfer_graph(const GraphSource& source, GraphPhase phase) {
  TransferGraph g;
  g.phase = phase;
  g.nodes = source.nodes;
  std::sort(g.nodes.begin(), g.nodes.end(),
            [](const GraphNode& a, const GraphNode& b) { return a.team_id < b.team_id; });
  std::set<std::string> team_ids;
  for (const auto& n : g.nodes) team_ids.insert(n.team_id);
  auto known = [&](const std::string& id) { return team_ids.contains(id); };

  std::map<std::tuple<std::string, std::string, std::string>, GraphEdge> edges;
  for (const auto& d : source.declarations) {
    if (!d.verified && !source.trust_based) continue;
    const bool pre = source.cutoff ? d.declared_at < *source.cutoff : true;
    if (phase == GraphPhase::PreEvent && !pre) continue;
    auto m = source.modules.find(d.module_id);
    if (m == source.modules.end()) continue;
    for (const auto& dev : m->second.developer_team_ids) {
      if (dev == d.user_team_id || !known(dev) || !known(d.user_team_id)) continue;
      auto key = std::make_tuple(dev, d.user_team_id, d.module_id);
      auto [it, inserted] = edges.try_emplace(key);
      auto& e = it->second;
      if (inserted) {
        e = {dev, d.user_team_id, d.module_id, m->second.category, d.verified,
             pre ? GraphPhase::PreEvent : GraphPhase::PostEvent};
      } else {
        e.verified = e.verified || d.verified;
        if (pre) e.phase = GraphPhase::PreEvent;
      }
    }
  }
  for (auto& [key, e] : edges) g.edges.push_back(std::move(e));
  return g;
}

TransferGraph build_transfer_graph(const Event& event, GraphPhase phase) {
  return build_transfer_graph(graph_source(event), phase);
}

std::vector<std::vector<std::string>> component_members(const TransferGraph& g) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) index[g.nodes[i].team_id] = i;
  DisjointSet ds(g.nodes.size());
  for (const auto& e : g.edges) {
    auto a = index.find(e.developer_team_id);
    auto b = index.find(e.user_team_id);
    if (a != index.end() && b != index.end()) ds.unite(a->second, b->second);
  }
  std::map<std::size_t, std::vector<std::string>> groups;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) groups[ds.find(i)].push_back(g.nodes[i].team_id);
  std::vector<std::vector<std::string>> out;
  for (auto& [root, members] : groups) {
    std::sort(members.begin(), members.end());
    out.push_back(std::move(members));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t connected_components(const TransferGraph& g) {
  return component_members(g).size();
}

Exact node_size(const Exact& weight, const Exact& max_weight) {
  const Exact s_min = parse_decimal("0.5");
  const Exact s_max = parse_decimal("2.0");
  if (max_weight <= 0) return s_min;
  return s_min + (weight / max_weight) * (s_max - s_min);
}

std::string to_dot(const TransferGraph& g) {
  Exact max_weight = 0;
  for (const auto& n : g.nodes) max_weight = std::max(max_weight, n.royalty_weight);

  std::ostringstream out;
  out << "// module transferability graph, " << to_string(g.phase) << "\n";
  out << "// node width = 0.5 + (royalties / max royalties) * 1.5\n";
  out << "// edge colors:";
  for (auto c : kCategories) out << " " << to_string(c) << "=" << category_color(c);
  out << "\n";
  out << "digraph transfer {\n";
  out << "  node [shape=circle, fixedsize=true];\n";
  for (const auto& n : g.nodes) {
    const auto size = to_fixed(node_size(n.royalty_weight, max_weight), 3);
    out << "  " << quote(n.team_id) << " [label=" << quote(n.team_id) << ", league=" << quote(n.league_id)
        << ", royalties=" << quote(to_fixed(n.royalty_weight)) << ", width=" << size << ", height=" << size
        << "];\n";
  }
  for (const auto& e : g.edges) {
    out << "  " << quote(e.developer_team_id) << " -> " << quote(e.user_team_id) << " [module=" << quote(e.module_id)
        << ", category=" << quote(to_string(e.category)) << ", color=" << quote(category_color(e.category))
        << ", phase=" << quote(to_string(e.phase));
    if (!e.verified) out << ", style=dashed, verified=false";
    out << "];\n";
  }
  out << "}\n";
  return out.str();
}

json to_json(const TransferGraph& g) {
  json nodes = json::array();
  for (const auto& n : g.nodes) {
    nodes.push_back({{"team_id", n.team_id}, {"league_id", n.league_id}, {"royalty_weight", to_audit_json(n.royalty_weight)}});
  }
  json edges = json::array();
  for (const auto& e : g.edges) {
    edges.push_back({{"developer_team_id", e.developer_team_id},
                     {"user_team_id", e.user_team_id},
                     {"module_id", e.module_id},
                     {"category", to_string(e.category)},
                     {"color", category_color(e.category)},
                     {"verified", e.verified},
                     {"phase", to_string(e.phase)}});
  }
  return {{"phase", to_string(g.phase)}, {"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

TransferGraph graph_from_json(const json& j) {
  using namespace detail;
  auto phase = [](const std::string& text) {
    auto p = parse_graph_phase(text);
    if (!p) fail(ErrorCode::ParseError, "unknown graph phase '" + text + "'");
    return *p;
  };
  TransferGraph g;
  g.phase = phase(get_string(j, "phase"));
  for (const auto& n : field(j, "nodes")) {
    g.nodes.push_back({get_string(n, "team_id"), get_string(n, "league_id"), get_exact(n, "royalty_weight")});
  }
  for (const auto& e : field(j, "edges")) {
    auto category = parse_module_category(get_string(e, "category"));
    if (!category) fail(ErrorCode::ParseError, "unknown module category");
    g.edges.push_back({get_string(e, "developer_team_id"), get_string(e, "user_team_id"), get_string(e, "module_id"),
                       *category, get_bool(e, "verified"), phase(get_string(e, "phase"))});
  }
  return g;
}

std::string export_graph(const TransferGraph& g, GraphFormat format) {
  if (format == GraphFormat::Dot) return to_dot(g);
  return to_json(g).dump(2) + "\n";
}

ReuseStats reuse_stats(const GraphSource& source, const std::vector<UploadWindow>& windows) {
  ReuseStats s;
  std::map<std::string, std::int64_t> per_window;
  std::int64_t uploads = 0;
  for (const auto& [id, m] : source.modules) {
    ++per_window[m.upload_window_id];
    ++uploads;
    if (m.status == ModuleStatus::Removed) ++s.removals;
  }
  for (const auto& w : windows) s.uploads_per_window.emplace_back(w.id, per_window[w.id]);
  s.modules_total = uploads - s.removals;

  for (auto c : kCategories) s.integrations_per_category[std::string(to_string(c))] = 0;
  std::map<std::string, std::string> league_of;
  for (const auto& n : source.nodes) {
    league_of[n.team_id] = n.league_id;
    s.integrations_per_league.try_emplace(n.league_id, 0);
  }
  const auto post = build_transfer_graph(source, GraphPhase::PostEvent);
  for (const auto& e : post.edges) {
    ++s.integrations_per_category[std::string(to_string(e.category))];
    ++s.integrations_per_league[league_of[e.user_team_id]];
  }
  s.components_pre = connected_components(build_transfer_graph(source, GraphPhase::PreEvent));
  s.components_post = connected_components(post);
  return s;
}

ReuseStats reuse_stats(const Event& event) {
  return reuse_stats(graph_source(event), event.marketplace().windows());
}

json to_json(const ReuseStats& s) {
  json windows = json::array();
  for (const auto& [id, n] : s.uploads_per_window) windows.push_back({{"window_id", id}, {"uploads", n}});
  return {{"modules_total", s.modules_total},
          {"removals", s.removals},
          {"uploads_per_window", std::move(windows)},
          {"integrations_per_category", s.integrations_per_category},
          {"integrations_per_league", s.integrations_per_league},
          {"connected_components", {{"pre_event", s.components_pre}, {"post_event", s.components_post}}}};
}

json score_report(const Event& event) {
  json breakdowns = json::array();
  for (const auto* b : event.breakdowns()) breakdowns.push_back(to_json(*b));
  json counted = json::object();
  json royalties = json::object();
  for (const auto& [team_id, team] : event.teams()) {
    json per_task = json::object();
    for (const auto& task : event.rulebook().find_league(team.league_id)->tasks) {
      if (const auto* b = event.counted_attempt(team_id, task.id)) per_task[task.id] = b->attempt.id;
    }
    counted[team_id] = std::move(per_task);
    royalties[team_id] = to_audit_json(event.royalty_total(team_id));
  }
  json leaderboards = json::object();
  for (const auto& league : event.rulebook().leagues) {
    json rows = json::array();
    for (const auto& row : event.leaderboard(league.id)) rows.push_back(to_json(row));
    leaderboards[league.id] = std::move(rows);
  }
  return {{"ledger_seq", event.ledger().empty() ? 0 : event.ledger().back().seq},
          {"breakdowns", std::move(breakdowns)},
          {"counted_attempts", std::move(counted)},
          {"royalty_totals", std::move(royalties)},
          {"leaderboards", std::move(leaderboards)}};
}

}  // namespace coop

#include "coop/service.h"

#include "coop/error.h"
#include "json_util.h"

#include <httplib.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace coop {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find(sep, pos);
    if (end == std::string_view::npos) end = text.size();
    out.emplace_back(text.substr(pos, end - pos));
    pos = end + 1;
  }
  return out;
}

std::vector<std::string> path_segments(std::string_view path) {
  std::vector<std::string> out;
  for (auto& s : split(path, '/')) {
    if (!s.empty()) out.push_back(std::move(s));
  }
  return out;
}

HttpResponse json_response(int status, json body) {
  body["schema_version"] = kSchemaVersion;
  return {status, "application/json", body.dump()};
}

HttpResponse error_response(int status, ErrorCode code, const std::string& message) {
  return json_response(status, {{"error", {{"code", to_string(code)}, {"message", message}}}});
}

json parse_body(const std::string& body) {
  if (body.find_first_not_of(" \t\r\n") == std::string::npos) return json::object();
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) fail(ErrorCode::ParseError, "request body is not valid JSON");
  if (!j.is_object()) fail(ErrorCode::ParseError, "request body must be a JSON object");
  return j;
}

void require_any(const Actor& actor, std::initializer_list<Role> roles) {
  for (auto r : roles) {
    if (actor.has(r)) return;
  }
  fail(ErrorCode::Unauthorized, "principal '" + actor.id + "' may not call this endpoint");
}

std::string random_token() {
  std::random_device rd;
  std::ostringstream out;
  out << std::hex;
  for (int i = 0; i < 4; ++i) out << rd();
  return out.str();
}

std::optional<std::string> query_value(const HttpRequest& r, const char* key) {
  auto it = r.query.find(key);
  if (it == r.query.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

}  // namespace

PrincipalSpec parse_principal_spec(std::string_view text) {
  auto parts = split(text, ':');
  if (parts.size() != 3 || parts[0].empty() || parts[2].empty()) {
    fail(ErrorCode::ConfigError, "principal '" + std::string(text) + "' is not id:role[+role]:token");
  }
  PrincipalSpec p{parts[0], {}, parts[2]};
  for (const auto& name : split(parts[1], '+')) {
    auto role = parse_role(name);
    if (!role) fail(ErrorCode::ConfigError, "unknown role '" + name + "'");
    p.roles.insert(*role);
  }
  return p;
}

std::shared_ptr<const Rulebook> load_rulebooks(const std::vector<std::string>& paths) {
  if (paths.empty()) return std::make_shared<const Rulebook>(bundled_rulebooks());
  std::vector<Rulebook> parts;
  for (const auto& p : paths) parts.push_back(load_rulebook_file(p));
  return std::make_shared<const Rulebook>(merge_rulebooks(parts));
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::ValidationError:
    case ErrorCode::SelfIntegration:
    case ErrorCode::SelfRoyalty:
    case ErrorCode::UnknownScope:
    case ErrorCode::CatalogMismatch:
    case ErrorCode::EmptyAttempts:
    case ErrorCode::InvalidPin:
    case ErrorCode::InvalidTask:
    case ErrorCode::DegenerateDomain:
    case ErrorCode::UnsupportedFormat:
      return 400;
    case ErrorCode::Unauthorized:
      return 403;
    case ErrorCode::NotFound:
      return 404;
    case ErrorCode::FrozenMarketplace:
    case ErrorCode::OutsideWindow:
    case ErrorCode::DuplicateId:
    case ErrorCode::AlreadyFrozen:
    case ErrorCode::ModuleRemoved:
    case ErrorCode::AttemptLimitExceeded:
    case ErrorCode::EventNotStarted:
    case ErrorCode::SessionClosed:
    case ErrorCode::DeadlineExpired:
    case ErrorCode::MutualExclusionViolation:
      return 409;
    case ErrorCode::ConfigError:
    case ErrorCode::BindError:
      return 500;
  }
  return 500;
}

Service::Service(ServiceConfig config, Clock clock) : config_(std::move(config)), clock_(std::move(clock)) {
  auto rulebook = load_rulebooks(config_.rulebook_paths);
  std::error_code ec;
  fs::create_directories(config_.data_dir, ec);
  if (ec) fail(ErrorCode::ConfigError, "cannot create data directory '" + config_.data_dir + "': " + ec.message());

  const auto path = ledger_path();
  const bool resume = fs::exists(path) && fs::file_size(path) > 0;
  if (resume) {
    const auto entries = read_ledger(path);
    event_ = std::make_unique<Event>(Event::replay(rulebook, entries));
    writer_ = std::make_unique<LedgerWriter>(path);
  } else {
    EventConfig ec_cfg{config_.windows, config_.default_royalty, config_.trust_based};
    event_ = std::make_unique<Event>(rulebook, ec_cfg, clock_());
    writer_ = std::make_unique<LedgerWriter>(path);
    for (const auto& e : event_->ledger()) writer_->append(e);
  }
  event_->set_sink([w = writer_.get()](const LedgerEntry& e) { w->append(e); });

  for (const auto& p : config_.principals) {
    bool known = true;
    try {
      event_->actor(p.id);
    } catch (const Error&) {
      known = false;
    }
    if (!known) event_->register_principal(p.id, p.roles, p.token, clock_());
  }
  if (config_.freeze_at && !event_->marketplace().frozen_at()) {
    event_->freeze(Event::kSystemActor, *config_.freeze_at, clock_());
  }
}

Service::~Service() {
  stop();
}

std::string Service::ledger_path() const {
  return (fs::path(config_.data_dir) / "ledger.ndjson").string();
}

std::string Service::snapshot_path() const {
  return (fs::path(config_.data_dir) / "snapshot.json").string();
}

std::uint64_t Service::next_seed() {
  if (config_.seed) return *config_.seed + seed_counter_++;
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

std::optional<Actor> Service::authenticate(const HttpRequest& request) const {
  const std::string prefix = "Bearer ";
  if (request.authorization.rfind(prefix, 0) != 0) return std::nullopt;
  return event_->authenticate(request.authorization.substr(prefix.size()));
}

void Service::write_snapshot() {
  json snap;
  {
    std::shared_lock lock(mutex_);
    const auto& ev = *event_;
    json leaderboards = json::object();
    for (const auto& league : ev.rulebook().leagues) {
      json rows = json::array();
      for (const auto& row : ev.leaderboard(league.id)) rows.push_back(to_json(row));
      leaderboards[league.id] = std::move(rows);
    }
    json teams = json::array();
    for (const auto& [id, t] : ev.teams()) teams.push_back(to_json(t));
    snap = {{"schema_version", kSchemaVersion},
            {"written_at", format_timestamp(clock_())},
            {"ledger_seq", ev.ledger().empty() ? 0 : ev.ledger().back().seq},
            {"teams", std::move(teams)},
            {"stats", to_json(reuse_stats(ev))},
            {"leaderboards", std::move(leaderboards)}};
  }
  const auto target = snapshot_path();
  const auto tmp = target + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << snap.dump(2) << '\n';
    if (!out) fail(ErrorCode::ConfigError, "cannot write snapshot");
  }
  fs::rename(tmp, target);
}

HttpResponse Service::handle(const HttpRequest& request) {
  try {
    return dispatch(request);
  } catch (const Error& e) {
    return error_response(http_status(e.code()), e.code(), e.what());
  } catch (const json::exception& e) {
    return error_response(400, ErrorCode::ParseError, e.what());
  } catch (const std::exception& e) {
    return error_response(500, ErrorCode::ConfigError, e.what());
  }
}

HttpResponse Service::dispatch(const HttpRequest& req) {
  const auto seg = path_segments(req.path);
  const bool get = req.method == "GET";
  const bool post = req.method == "POST";
  const auto n = seg.size();
  auto is = [&](std::initializer_list<const char*> pattern) {
    if (pattern.size() != n) return false;
    std::size_t i = 0;
    for (const char* p : pattern) {
      if (std::string_view(p) != "*" && seg[i] != p) return false;
      ++i;
    }
    return true;
  };

  // Public reads.
  if (get && is({"health"})) {
    return json_response(200, {{"status", "ok"}, {"version", kServiceVersion}});
  }
  if (get && is({"leaderboard", "*"})) {
    std::shared_lock lock(mutex_);
    json rows = json::array();
    int rank = 0;
    for (const auto& row : event_->leaderboard(seg[1])) {
      json r = to_json(row);
      r["rank"] = ++rank;
      rows.push_back(std::move(r));
    }
    return json_response(200, {{"league_id", seg[1]}, {"rows", std::move(rows)}});
  }
  if (get && is({"graph"})) {
    const auto phase_text = query_value(req, "phase").value_or("post_event");
    auto phase = parse_graph_phase(phase_text);
    if (!phase) fail(ErrorCode::ValidationError, "phase must be pre or post");
    const auto format = parse_graph_format(query_value(req, "format").value_or("json"));
    std::shared_lock lock(mutex_);
    auto graph = build_transfer_graph(*event_, *phase);
    if (format == GraphFormat::Dot) return {200, "text/vnd.graphviz", to_dot(graph)};
    json body = to_json(graph);
    body["components"] = connected_components(graph);
    return json_response(200, std::move(body));
  }
  if (get && is({"stats"})) {
    std::shared_lock lock(mutex_);
    return json_response(200, to_json(reuse_stats(*event_)));
  }

  const bool known_route =
      is({"teams"}) || is({"teams", "*"}) || is({"teams", "*", "royalties"}) || is({"teams", "*", "notifications"}) ||
      is({"modules"}) || is({"modules", "*"}) || is({"modules", "*", "remove"}) || is({"modules", "*", "royalty"}) ||
      is({"freeze"}) || is({"integrations"}) || is({"integrations", "*", "verify"}) || is({"attempts"}) ||
      is({"attempts", "*"}) || is({"attempts", "*", "outcomes"}) || is({"attempts", "*", "close"}) ||
      is({"attempts", "*", "score"}) || is({"commands", "generate"}) || is({"ledger"});
  if (!known_route) return error_response(404, ErrorCode::NotFound, "no route for " + req.method + " " + req.path);

  if (get) {
    std::shared_lock lock(mutex_);
    const auto actor = authenticate(req);
    if (!actor) return error_response(401, ErrorCode::Unauthorized, "missing or unknown bearer token");
    const auto& ev = *event_;

    if (is({"teams"})) {
      json teams = json::array();
      for (const auto& [id, t] : ev.teams()) teams.push_back(to_json(t));
      return json_response(200, {{"teams", std::move(teams)}});
    }
    if (is({"teams", "*"})) {
      const auto* t = ev.find_team(seg[1]);
      if (!t) fail(ErrorCode::NotFound, "team '" + seg[1] + "' not found");
      return json_response(200, {{"team", to_json(*t)}});
    }
    if (is({"teams", "*", "royalties"})) {
      if (actor->id != seg[1]) require_any(*actor, {Role::Referee, Role::TechnicalCommittee});
      if (!ev.find_team(seg[1])) fail(ErrorCode::NotFound, "team '" + seg[1] + "' not found");
      json entries = json::array();
      for (const auto& e : ev.royalties_for(seg[1])) entries.push_back(to_json(e));
      return json_response(200, {{"team_id", seg[1]},
                                  {"entries", std::move(entries)},
                                  {"total", to_audit_json(ev.royalty_total(seg[1]))}});
    }
    if (is({"teams", "*", "notifications"})) {
      if (actor->id != seg[1]) require_any(*actor, {Role::TechnicalCommittee});
      if (!ev.find_team(seg[1])) fail(ErrorCode::NotFound, "team '" + seg[1] + "' not found");
      json items = json::array();
      for (const auto& note : ev.notifications_for(seg[1])) {
        items.push_back({{"at", format_timestamp(note.at)}, {"kind", note.kind}, {"message", note.message}});
      }
      return json_response(200, {{"team_id", seg[1]}, {"notifications", std::move(items)}});
    }
    if (is({"modules"})) {
      std::optional<ModuleCategory> category;
      if (auto c = query_value(req, "category")) {
        category = parse_module_category(*c);
        if (!category) fail(ErrorCode::ValidationError, "unknown module category '" + *c + "'");
      }
      json modules = json::array();
      for (const auto& m : ev.marketplace().list_modules(category, query_value(req, "developer"))) {
        modules.push_back(to_json(m));
      }
      return json_response(200, {{"modules", std::move(modules)}});
    }
    if (is({"modules", "*"})) {
      const auto* m = ev.marketplace().find_module(seg[1]);
      if (!m) fail(ErrorCode::NotFound, "module '" + seg[1] + "' not found");
      return json_response(200, {{"module", to_json(*m)}});
    }
    if (is({"integrations"})) {
      const auto team = query_value(req, "team");
      json items = json::array();
      for (const auto& d : ev.marketplace().declarations()) {
        if (!team || d.user_team_id == *team) items.push_back(to_json(d));
      }
      return json_response(200, {{"integrations", std::move(items)}});
    }
    if (is({"attempts", "*"})) {
      const auto* s = ev.session(seg[1]);
      if (!s) fail(ErrorCode::NotFound, "attempt '" + seg[1] + "' not found");
      return json_response(200, {{"attempt", to_json(*s)}});
    }
    if (is({"attempts", "*", "score"})) {
      const auto* s = ev.session(seg[1]);
      if (!s) fail(ErrorCode::NotFound, "attempt '" + seg[1] + "' not found");
      const auto b = ev.preview(seg[1], clock_());
      const auto* counted = ev.counted_attempt(s->attempt.team_id, s->attempt.task_id);
      return json_response(200, {{"attempt_id", seg[1]},
                                  {"state", to_string(s->state)},
                                  {"final", s->state == SessionState::Closed},
                                  {"counted", counted && counted->attempt.id == s->attempt.id},
                                  {"breakdown", to_json(b)}});
    }
    if (is({"ledger"})) {
      require_any(*actor, {Role::TechnicalCommittee});
      return {200, "application/x-ndjson", serialize_ledger(ev.ledger())};
    }
  }

  if (post) {
    std::unique_lock lock(mutex_);
    const auto actor = authenticate(req);
    if (!actor) return error_response(401, ErrorCode::Unauthorized, "missing or unknown bearer token");
    auto& ev = *event_;
    const auto body = parse_body(req.body);
    const auto now = clock_();
    using namespace detail;

    if (is({"teams"})) {
      require_any(*actor, {Role::TechnicalCommittee});
      const json& team_json = has(body, "team") ? body.at("team") : body;
      const auto token = get_string_or(body, "token", random_token());
      const auto& team = ev.register_team(actor->id, team_from_json(team_json), token, now);
      return json_response(201, {{"team", to_json(team)}, {"token", token}});
    }
    if (is({"modules"})) {
      require_any(*actor, {Role::Team, Role::TechnicalCommittee});
      const auto& m = ev.upload_module(actor->id, draft_from_json(body), now);
      return json_response(201, {{"module", to_json(m)}});
    }
    if (is({"modules", "*", "remove"})) {
      require_any(*actor, {Role::TechnicalCommittee});
      return json_response(200, {{"module", to_json(ev.remove_module(actor->id, seg[1], now))}});
    }
    if (is({"modules", "*", "royalty"})) {
      require_any(*actor, {Role::Team, Role::TechnicalCommittee});
      const auto& m = ev.set_royalty(actor->id, seg[1], get_exact(body, "royalty_rate"), now);
      return json_response(200, {{"module", to_json(m)}});
    }
    if (is({"freeze"})) {
      require_any(*actor, {Role::TechnicalCommittee});
      const auto at = has(body, "at") ? get_time(body, "at") : now;
      ev.freeze(actor->id, at, now);
      return json_response(200, {{"frozen_at", format_timestamp(at)}});
    }
    if (is({"integrations"})) {
      require_any(*actor, {Role::Team, Role::TechnicalCommittee});
      const auto user = get_string_or(body, "user_team_id", actor->id);
      const json& scope_json = has(body, "scope") ? body.at("scope") : body;
      MilestoneScope scope;
      if (has(scope_json, "league_id")) {
        scope.league_id = get_string(scope_json, "league_id");
      } else if (const auto* t = ev.find_team(user)) {
        scope.league_id = t->league_id;
      }
      scope.task_id = get_string(scope_json, "task_id");
      scope.milestone_id = get_string(scope_json, "milestone_id");
      const auto& d = ev.declare_integration(actor->id, user, get_string(body, "module_id"), scope, now);
      return json_response(201, {{"integration", to_json(d)}});
    }
    if (is({"integrations", "*", "verify"})) {
      require_any(*actor, {Role::Referee, Role::TechnicalCommittee});
      return json_response(200, {{"integration", to_json(ev.verify_integration(actor->id, seg[1], now))}});
    }
    if (is({"attempts"})) {
      require_any(*actor, {Role::Referee, Role::TechnicalCommittee});
      const auto& s = ev.open_attempt(actor->id, get_string(body, "team_id"), get_string(body, "task_id"),
                                      get_string(body, "task_level"), now);
      return json_response(201, {{"attempt", to_json(s)}});
    }
    if (is({"attempts", "*", "outcomes"})) {
      require_any(*actor, {Role::Referee, Role::ExternalEvaluator});
      const auto& s = ev.record_outcome(actor->id, seg[1], outcome_update_from_json(body), now);
      return json_response(200, {{"attempt", to_json(s)}});
    }
    if (is({"attempts", "*", "close"})) {
      require_any(*actor, {Role::Referee, Role::TechnicalCommittee});
      const auto& b = ev.close_attempt(actor->id, seg[1], now);
      return json_response(200, {{"breakdown", to_json(b)}});
    }
    if (is({"commands", "generate"})) {
      require_any(*actor, {Role::Referee, Role::TechnicalCommittee});
      CommandRequest cr;
      cr.league_id = get_string(body, "league_id");
      cr.task_number = static_cast<int>(get_int(body, "task_number"));
      if (has(body, "base_kitchen")) cr.base_kitchen = get_string(body, "base_kitchen");
      if (has(body, "platform")) cr.platform = get_string(body, "platform");
      if (has(body, "pins")) {
        for (const auto& [k, v] : body.at("pins").items()) {
          if (!v.is_string()) fail(ErrorCode::ParseError, "pin values must be strings");
          cr.pins[k] = v.get<std::string>();
        }
      }
      if (has(body, "seed")) {
        const auto& s = body.at("seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
          fail(ErrorCode::ParseError, "seed must be a non-negative integer");
        }
        cr.seed = s.get<std::uint64_t>();
      } else {
        cr.seed = next_seed();
      }
      const auto* league = ev.rulebook().find_league(cr.league_id);
      if (!league) fail(ErrorCode::NotFound, "league '" + cr.league_id + "' not found");
      const auto cmd = generate_command(bundled_domain(cr.league_id), *league, cr);
      return json_response(200, {{"command", to_json(cmd)}});
    }
  }

  return error_response(403, ErrorCode::Unauthorized, req.method + " " + req.path + " is not permitted");
}

int Service::bind() {
  server_ = std::make_unique<httplib::Server>();
  auto adapt = [this](const httplib::Request& in, httplib::Response& out) {
    HttpRequest r;
    r.method = in.method;
    r.path = in.path;
    for (const auto& [k, v] : in.params) r.query.emplace(k, v);
    r.authorization = in.get_header_value("Authorization");
    r.body = in.body;
    auto resp = handle(r);
    out.status = resp.status;
    out.set_content(resp.body, resp.content_type.c_str());
  };
  server_->Get(".*", adapt);
  server_->Post(".*", adapt);
  int port = config_.port;
  if (port == 0) {
    port = server_->bind_to_any_port(config_.host);
    if (port < 0) fail(ErrorCode::BindError, "cannot bind " + config_.host);
  } else if (!server_->bind_to_port(config_.host, port)) {
    fail(ErrorCode::BindError, "cannot bind " + config_.host + ":" + std::to_string(port));
  }
  return port;
}

void Service::serve_bound() {
  if (!server_) fail(ErrorCode::BindError, "serve_bound called before bind");
  if (config_.snapshot_interval.count() > 0 && !snapshot_thread_.joinable()) {
    snapshot_thread_ = std::thread([this] {
      std::unique_lock lock(snapshot_mutex_);
      while (!snapshot_cv_.wait_for(lock, config_.snapshot_interval, [this] { return stopping_; })) {
        lock.unlock();
        try {
          write_snapshot();
        } catch (const std::exception&) {
        }
        lock.lock();
      }
    });
  }
  server_->listen_after_bind();
}

void Service::listen() {
  bind();
  serve_bound();
}

void Service::stop() {
  {
    std::lock_guard lock(snapshot_mutex_);
    if (stopping_) return;
    stopping_ = true;
  }
  snapshot_cv_.notify_all();
  if (server_) server_->stop();
  if (snapshot_thread_.joinable()) snapshot_thread_.join();
  if (writer_) writer_->flush();
  if (server_) {
    try {
      write_snapshot();
    } catch (const std::exception&) {
    }
  }
}

}  // namespace coop

#include "coop/analytics.h"
#include "coop/bundled.h"
#include "coop/command_generator.h"
#include "coop/demo.h"
#include "coop/error.h"
#include "coop/ledger.h"
#include "coop/rulebook.h"
#include "coop/service.h"

#include <CLI11.hpp>

#include <algorithm>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <pthread.h>
#include <thread>

namespace fs = std::filesystem;
using coop::ErrorCode;
using nlohmann::json;

namespace {

// Accepts a file, a directory of *.json files, or a path given without its
// extension; "fixtures/srl" also finds fixtures/rulebooks/srl.json.
std::vector<std::string> resolve_rulebook_paths(const std::string& arg) {
  const fs::path p(arg);
  if (fs::is_directory(p)) {
    std::vector<std::string> out;
    for (const auto& e : fs::directory_iterator(p)) {
      if (e.path().extension() == ".json") out.push_back(e.path().string());
    }
    std::sort(out.begin(), out.end());
    if (out.empty()) coop::fail(ErrorCode::NotFound, "no .json rulebooks in '" + arg + "'");
    return out;
  }
  for (const auto& candidate : {p, fs::path(arg + ".json"), p.parent_path() / "rulebooks" / (p.filename().string() + ".json")}) {
    if (fs::is_regular_file(candidate)) return {candidate.string()};
  }
  coop::fail(ErrorCode::NotFound, "rulebook '" + arg + "' not found");
}

std::shared_ptr<const coop::Rulebook> rulebooks_from(const std::vector<std::string>& args) {
  std::vector<std::string> paths;
  for (const auto& a : args) {
    for (auto& p : resolve_rulebook_paths(a)) paths.push_back(std::move(p));
  }
  return coop::load_rulebooks(paths);
}

coop::Event event_from(const std::string& ledger_path, const std::vector<std::string>& rulebooks) {
  if (ledger_path.empty()) return coop::demo::build_event();
  const auto entries = coop::read_ledger(ledger_path);
  return coop::Event::replay(rulebooks_from(rulebooks), entries);
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::trunc);
  out << text;
  if (!out) coop::fail(ErrorCode::ConfigError, "cannot write '" + path + "'");
}

void write_file(const fs::path& path, std::string_view text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  out << text;
  if (!out) coop::fail(ErrorCode::ConfigError, "cannot write '" + path.string() + "'");
}

coop::UploadWindow parse_window(const std::string& text) {
  // id=open/close
  auto eq = text.find('=');
  auto slash = text.find('/', eq == std::string::npos ? 0 : eq);
  if (eq == std::string::npos || slash == std::string::npos) {
    coop::fail(ErrorCode::ConfigError, "window '" + text + "' is not id=OPEN/CLOSE");
  }
  return {text.substr(0, eq), coop::parse_timestamp(text.substr(eq + 1, slash - eq - 1)),
          coop::parse_timestamp(text.substr(slash + 1))};
}

int run_serve(coop::ServiceConfig config, const std::vector<std::string>& rulebook_args,
              const std::vector<std::string>& principal_args, const std::vector<std::string>& window_args,
              const std::string& freeze_at) {
  for (const auto& a : rulebook_args) {
    for (auto& p : resolve_rulebook_paths(a)) config.rulebook_paths.push_back(std::move(p));
  }
  for (const auto& p : principal_args) config.principals.push_back(coop::parse_principal_spec(p));
  for (const auto& w : window_args) config.windows.push_back(parse_window(w));
  if (!freeze_at.empty()) config.freeze_at = coop::parse_timestamp(freeze_at);

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  coop::Service service(config);
  const int port = service.bind();
  std::cerr << "coop: listening on " << config.host << ":" << port << ", ledger " << service.ledger_path() << "\n";
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    service.stop();
  });
  service.serve_bound();
  // Wake the waiter if the server ended for another reason.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  service.stop();
  return 0;
}

int run_validate(const std::string& arg) {
  int failures = 0;
  for (const auto& path : resolve_rulebook_paths(arg)) {
    try {
      const auto rb = coop::load_rulebook_file(path);
      for (const auto& league : rb.leagues) {
        std::size_t milestones = 0;
        for (const auto& t : league.tasks) milestones += t.milestones.size();
        std::cout << path << ": league " << league.id << ", " << league.tasks.size() << " tasks, " << milestones
                  << " milestones, " << league.task_levels.size() << " task levels\n";
      }
      for (const auto& w : coop::rulebook_warnings(rb)) std::cout << "  warning: " << w.path << ": " << w.message << "\n";
    } catch (const coop::Error& e) {
      std::cerr << path << ": " << to_string(e.code()) << ": " << e.what() << "\n";
      ++failures;
    }
  }
  return failures == 0 ? 0 : 1;
}

int run_replay(const std::string& ledger, const std::vector<std::string>& rulebooks, const std::string& output) {
  const auto event = coop::Event::replay(rulebooks_from(rulebooks), coop::read_ledger(ledger));
  write_output(output, coop::score_report(event).dump(2) + "\n");
  return 0;
}

int run_generate(const std::string& league_id, int task, std::uint64_t seed, const std::vector<std::string>& pin_args,
                 const std::string& base_kitchen, const std::string& platform, const std::string& domain_path,
                 const std::vector<std::string>& rulebooks) {
  const auto rb = rulebooks_from(rulebooks);
  const auto* league = rb->find_league(league_id);
  if (!league) coop::fail(ErrorCode::NotFound, "league '" + league_id + "' not found");
  coop::VariableDomain domain;
  if (domain_path.empty()) {
    domain = coop::bundled_domain(league_id);
  } else {
    std::ifstream in(domain_path);
    if (!in) coop::fail(ErrorCode::NotFound, "cannot open domain '" + domain_path + "'");
    domain = coop::domain_from_json(json::parse(in));
  }
  coop::CommandRequest req;
  req.league_id = league_id;
  req.task_number = task;
  req.seed = seed;
  req.pins = coop::parse_pins(pin_args);
  if (!base_kitchen.empty()) req.base_kitchen = base_kitchen;
  if (!platform.empty()) req.platform = platform;
  const auto cmd = coop::generate_command(domain, *league, req);
  std::cout << cmd.text << "\n" << coop::to_json(cmd).dump(2) << "\n";
  return 0;
}

int run_graph(const std::string& phase_text, const std::string& format_text, const std::string& output,
              const std::string& ledger, const std::vector<std::string>& rulebooks) {
  const auto phase = coop::parse_graph_phase(phase_text);
  if (!phase) coop::fail(ErrorCode::ValidationError, "phase must be pre or post");
  const auto format = coop::parse_graph_format(format_text);
  const auto event = event_from(ledger, rulebooks);
  const auto graph = coop::build_transfer_graph(event, *phase);
  write_output(output, coop::export_graph(graph, format));
  if (!output.empty() && output != "-") {
    std::cerr << "coop: " << graph.nodes.size() << " nodes, " << graph.edges.size() << " edges, "
              << coop::connected_components(graph) << " components\n";
  }
  return 0;
}

int run_fixtures_init(const std::string& dir, bool force) {
  const fs::path root(dir);
  const auto ledger = root / "ledger.ndjson";
  if (fs::exists(ledger) && !force) {
    coop::fail(ErrorCode::ConfigError, "'" + ledger.string() + "' exists; pass --force to overwrite");
  }
  const auto event = coop::demo::build_event();
  write_file(ledger, coop::serialize_ledger(event.ledger()));
  for (const auto& [name, text] : coop::bundled::files()) write_file(root / (std::string(name) + ".json"), text);
  const auto stats = coop::reuse_stats(event);
  std::cout << "wrote " << ledger.string() << " (" << event.ledger().size() << " entries, " << event.teams().size()
            << " teams, " << stats.modules_total << " modules)\n";
  std::cout << "principals: tc (committee) " << coop::demo::kCommitteeToken << ", ref (referee) "
            << coop::demo::kRefereeToken << ", eval (evaluator) " << coop::demo::kEvaluatorToken
            << ", teams <id>-token\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"euROBIN coopetition management service"};
  app.require_subcommand(1);

  // serve
  coop::ServiceConfig config;
  std::vector<std::string> serve_rulebooks, principals, windows;
  std::string freeze_at;
  std::uint64_t seed = 0;
  long snapshot_s = 60;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--host", config.host, "Listen address")->envname("COOP_HOST")->capture_default_str();
  serve->add_option("--port", config.port, "Listen port (0 picks a free one)")->envname("COOP_PORT")->capture_default_str();
  serve->add_option("--data-dir", config.data_dir, "Ledger and snapshot directory")
      ->envname("COOP_DATA_DIR")
      ->capture_default_str();
  serve->add_option("--rulebook", serve_rulebooks, "Rulebook file or directory (repeatable; default bundled)")
      ->envname("COOP_RULEBOOKS")
      ->delimiter(',');
  serve->add_option("--freeze-at", freeze_at, "Marketplace freeze instant, YYYY-MM-DDTHH:MM:SSZ")->envname("COOP_FREEZE_AT");
  serve->add_flag("--trust-based", config.trust_based, "Count declarations without referee verification")
      ->envname("COOP_TRUST_BASED");
  auto* seed_opt = serve->add_option("--seed", seed, "Base seed for generated commands")->envname("COOP_SEED");
  serve->add_option("--principal", principals, "id:role[+role]:token (repeatable)")
      ->envname("COOP_PRINCIPALS")
      ->delimiter(',');
  serve->add_option("--window", windows, "Upload window id=OPEN/CLOSE (repeatable)")->envname("COOP_WINDOWS")->delimiter(',');
  serve->add_option("--snapshot-interval", snapshot_s, "Seconds between snapshots (0 disables)")
      ->envname("COOP_SNAPSHOT_INTERVAL")
      ->capture_default_str();

  // validate-rulebook
  std::string validate_path;
  auto* validate = app.add_subcommand("validate-rulebook", "Check a rulebook document");
  validate->add_option("path", validate_path, "Rulebook file, directory, or name")->required();

  // score replay
  std::string replay_ledger, replay_output;
  std::vector<std::string> replay_rulebooks;
  auto* score = app.add_subcommand("score", "Offline scoring");
  score->require_subcommand(1);
  auto* replay = score->add_subcommand("replay", "Rebuild scores from a ledger and print the audit report");
  replay->add_option("ledger", replay_ledger, "Ledger file (NDJSON)")->required();
  replay->add_option("--rulebook", replay_rulebooks, "Rulebook file or directory (repeatable)");
  replay->add_option("-o,--output", replay_output, "Output path (default stdout)");

  // command generate
  std::string gen_league, gen_base, gen_platform, gen_domain;
  int gen_task = 1;
  std::uint64_t gen_seed = 0;
  std::vector<std::string> gen_pins, gen_rulebooks;
  auto* command = app.add_subcommand("command", "Task command generation");
  command->require_subcommand(1);
  auto* generate = command->add_subcommand("generate", "Draw a task command");
  generate->add_option("--league", gen_league, "srl or orl")->required();
  generate->add_option("--task", gen_task, "Task number 1..3")->capture_default_str();
  generate->add_option("--seed", gen_seed, "RNG seed")->capture_default_str();
  generate->add_option("--pin", gen_pins, "Pinned variable key=value (repeatable)");
  generate->add_option("--base-kitchen", gen_base, "Team base kitchen (SRL tasks 1 and 2)");
  generate->add_option("--platform", gen_platform, "Robot class for parcel checks (aerial, ground)");
  generate->add_option("--domain", gen_domain, "Variable domain JSON (default bundled)");
  generate->add_option("--rulebook", gen_rulebooks, "Rulebook file or directory (repeatable)");

  // graph export
  std::string graph_phase = "post", graph_format = "dot", graph_output, graph_ledger;
  std::vector<std::string> graph_rulebooks;
  auto* graph = app.add_subcommand("graph", "Transfer graph analytics");
  graph->require_subcommand(1);
  auto* graph_export = graph->add_subcommand("export", "Export the module transfer graph");
  graph_export->add_option("--phase", graph_phase, "pre or post")->capture_default_str();
  graph_export->add_option("--format", graph_format, "dot or json")->capture_default_str();
  graph_export->add_option("-o,--output", graph_output, "Output path (default stdout)");
  graph_export->add_option("--ledger", graph_ledger, "Ledger file (default: built-in demo event)");
  graph_export->add_option("--rulebook", graph_rulebooks, "Rulebook file or directory (repeatable)");

  // fixtures init
  std::string fixtures_dir = "data";
  bool fixtures_force = false;
  auto* fixtures = app.add_subcommand("fixtures", "Demo data");
  fixtures->require_subcommand(1);
  auto* init = fixtures->add_subcommand("init", "Write the demo ledger, rulebooks and command domains");
  init->add_option("--output,--data-dir", fixtures_dir, "Target directory")->capture_default_str();
  init->add_flag("--force", fixtures_force, "Overwrite an existing ledger");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) {
      if (*seed_opt) config.seed = seed;
      config.snapshot_interval = std::chrono::seconds(snapshot_s);
      return run_serve(config, serve_rulebooks, principals, windows, freeze_at);
    }
    if (*validate) return run_validate(validate_path);
    if (*replay) return run_replay(replay_ledger, replay_rulebooks, replay_output);
    if (*generate) {
      return run_generate(gen_league, gen_task, gen_seed, gen_pins, gen_base, gen_platform, gen_domain, gen_rulebooks);
    }
    if (*graph_export) return run_graph(graph_phase, graph_format, graph_output, graph_ledger, graph_rulebooks);
    if (*init) return run_fixtures_init(fixtures_dir, fixtures_force);
  } catch (const coop::Error& e) {
    std::cerr << "coop: " << to_string(e.code()) << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "coop: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

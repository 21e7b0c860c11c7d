#pragma once

#include "coop/analytics.h"
#include "coop/command_generator.h"
#include "coop/error.h"
#include "coop/ledger.h"
#include "coop/roles.h"
#include "coop/runtime.h"

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

namespace httplib {
class Server;
}

namespace coop {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kServiceVersion = "1.0.0";

struct PrincipalSpec {
  std::string id;
  std::set<Role> roles;
  std::string token;
};

// "id:role[+role...]:token"
PrincipalSpec parse_principal_spec(std::string_view text);

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir = "data";
  std::vector<std::string> rulebook_paths;  // empty: bundled rulebooks
  std::vector<UploadWindow> windows;
  std::optional<Timestamp> freeze_at;
  bool trust_based = false;
  Exact default_royalty{1, 4};
  // Commands without an explicit seed draw seed + n for the n-th request;
  // with no seed configured they draw from std::random_device.
  std::optional<std::uint64_t> seed;
  std::vector<PrincipalSpec> principals;
  std::chrono::seconds snapshot_interval{60};
};

std::shared_ptr<const Rulebook> load_rulebooks(const std::vector<std::string>& paths);

struct HttpRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string authorization;  // raw Authorization header
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;

  nlohmann::json json() const { return nlohmann::json::parse(body); }
};

int http_status(ErrorCode code);

using Clock = std::function<Timestamp()>;

// The event behind an HTTP facade. All mutations go through the event ledger,
// which is appended to <data_dir>/ledger.ndjson as entries are accepted; on
// boot an existing ledger is replayed.
class Service {
public:
  explicit Service(ServiceConfig config, Clock clock = now_utc);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Transport-independent dispatch.
  HttpResponse handle(const HttpRequest& request);

  // Binds and serves until stop(). Throws BindError.
  void listen();
  // Binds without serving; returns the bound port (useful with port 0).
  int bind();
  void serve_bound();
  void stop();

  void write_snapshot();
  std::string ledger_path() const;
  std::string snapshot_path() const;

  // Read access for tests and tools; callers must not race with handle().
  const Event& event() const { return *event_; }

private:
  HttpResponse dispatch(const HttpRequest& request);
  std::optional<Actor> authenticate(const HttpRequest& request) const;
  std::uint64_t next_seed();

  ServiceConfig config_;
  Clock clock_;
  std::unique_ptr<Event> event_;
  std::unique_ptr<LedgerWriter> writer_;
  mutable std::shared_mutex mutex_;
  std::unique_ptr<httplib::Server> server_;
  std::uint64_t seed_counter_ = 0;

  std::mutex snapshot_mutex_;
  std::condition_variable snapshot_cv_;
  bool stopping_ = false;
  std::thread snapshot_thread_;
};

}  // namespace coop

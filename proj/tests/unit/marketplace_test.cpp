#include "coop/error.h"
#include "coop/marketplace.h"
#include "coop/scoring.h"
#include "oracle.h"

#include <doctest.h>

#include <memory>
#include <set>
#include <string>

using coop::ErrorCode;
using coop::Exact;
using coop::Role;
using coop::parse_timestamp;

namespace {

const coop::Actor kCommittee{"tc", {Role::TechnicalCommittee}};
const coop::Actor kReferee{"ref", {Role::Referee}};
const coop::Actor kTeam{"inria", {Role::Team}};

std::vector<coop::UploadWindow> windows() {
  return {{"W1", parse_timestamp("2024-07-17T00:00:00Z"), parse_timestamp("2024-09-01T00:00:00Z")},
          {"W2", parse_timestamp("2024-09-01T00:00:00Z"), parse_timestamp("2024-10-16T00:00:00Z")},
          {"W3", parse_timestamp("2024-10-16T00:00:00Z"), parse_timestamp("2024-11-25T00:00:00Z")}};
}

coop::Marketplace make(coop::MarketplaceOptions options = {}) {
  return coop::Marketplace(std::make_shared<const coop::Rulebook>(coop::bundled_rulebooks()), windows(), options);
}

coop::ModuleDraft draft(const std::string& id, std::set<std::string> devs,
                        coop::ModuleCategory c = coop::ModuleCategory::Other) {
  coop::ModuleDraft d;
  d.id = id;
  d.name = id;
  d.category = c;
  d.developer_team_ids = std::move(devs);
  return d;
}

const coop::MilestoneScope kIrlMs1{"irl", "task-board", "MS1"};
const coop::MilestoneScope kIrlMs2{"irl", "task-board", "MS2"};

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const coop::Error& e) {
    return e.code();
  }
  return ErrorCode::ConfigError;
}

}  // namespace

TEST_CASE("three windows totaling ninety modules") {
  auto m = make();
  const std::vector<std::pair<const char*, int>> plan{
      {"2024-08-01T10:00:00Z", 24}, {"2024-09-20T10:00:00Z", 32}, {"2024-11-01T10:00:00Z", 34}};
  int n = 0;
  for (const auto& [at, count] : plan) {
    for (int i = 0; i < count; ++i) {
      m.upload_module(draft("m" + std::to_string(n++), {"tum"}), parse_timestamp(at));
    }
  }
  CHECK(m.modules().size() == 90);
  std::map<std::string, int> per_window;
  for (const auto& [id, rec] : m.modules()) ++per_window[rec.upload_window_id];
  CHECK(per_window["W1"] == 24);
  CHECK(per_window["W2"] == 32);
  CHECK(per_window["W3"] == 34);
}

TEST_CASE("upload rules") {
  auto m = make();
  const auto t = parse_timestamp("2024-08-01T10:00:00Z");
  const auto& rec = m.upload_module(draft("a", {"tum"}), t);
  CHECK(rec.royalty_rate == Exact(1, 4));
  CHECK(rec.status == coop::ModuleStatus::Active);
  CHECK(rec.upload_window_id == "W1");
  CHECK(rec.co_developer_count() == 1);

  auto custom = draft("b", {"tum"});
  custom.royalty_rate = Exact(1, 10);
  CHECK(m.upload_module(custom, t).royalty_rate == Exact(1, 10));

  CHECK(code_of([&] { m.upload_module(draft("a", {"tum"}), t); }) == ErrorCode::DuplicateId);
  CHECK(code_of([&] { m.upload_module(draft("c", {}), t); }) == ErrorCode::ValidationError);
  CHECK(code_of([&] { m.upload_module(draft("c", {"tum"}), parse_timestamp("2024-12-01T00:00:00Z")); }) ==
        ErrorCode::OutsideWindow);
  CHECK(code_of([&] { m.upload_module(draft("c", {"tum"}), parse_timestamp("2024-07-16T23:59:59Z")); }) ==
        ErrorCode::OutsideWindow);
  auto bad = draft("c", {"tum"});
  bad.royalty_rate = Exact(3, 2);
  CHECK(code_of([&] { m.upload_module(bad, t); }) == ErrorCode::ValidationError);
}

TEST_CASE("freeze rules") {
  auto m = make();
  m.upload_module(draft("a", {"tum"}), parse_timestamp("2024-08-01T10:00:00Z"));
  const auto freeze = parse_timestamp("2024-11-20T08:00:00Z");
  m.freeze(freeze);
  CHECK(m.is_frozen(freeze));
  CHECK_FALSE(m.is_frozen(freeze - std::chrono::seconds(1)));
  CHECK(code_of([&] { m.upload_module(draft("b", {"tum"}), freeze); }) == ErrorCode::FrozenMarketplace);
  CHECK(code_of([&] { m.upload_module(draft("b", {"tum"}), parse_timestamp("2024-11-21T00:00:00Z")); }) ==
        ErrorCode::FrozenMarketplace);
  CHECK(code_of([&] { m.freeze(freeze); }) == ErrorCode::AlreadyFrozen);
  CHECK(code_of([&] { m.set_royalty("a", Exact(1, 2), freeze); }) == ErrorCode::FrozenMarketplace);
  CHECK_NOTHROW(m.set_royalty("a", Exact(1, 2), freeze - std::chrono::hours(1)));

  const auto& d = m.declare_integration("inria", "a", kIrlMs1, parse_timestamp("2024-11-26T10:00:00Z"));
  CHECK_FALSE(d.verified);

  auto early = make();
  early.upload_module(draft("a", {"tum"}), parse_timestamp("2024-08-01T10:00:00Z"));
  CHECK(code_of([&] { early.freeze(parse_timestamp("2024-07-20T00:00:00Z")); }) == ErrorCode::ValidationError);
}

TEST_CASE("declarations") {
  auto m = make();
  const auto t = parse_timestamp("2024-08-01T10:00:00Z");
  m.upload_module(draft("tum-mod", {"tum"}), t);
  m.upload_module(draft("joint", {"tum", "inria"}), t);

  const auto& d = m.declare_integration("inria", "tum-mod", kIrlMs1, t);
  CHECK(d.user_team_id == "inria");
  CHECK_FALSE(d.verified);
  CHECK(code_of([&] { m.declare_integration("tum", "tum-mod", kIrlMs1, t); }) == ErrorCode::SelfIntegration);
  CHECK(code_of([&] { m.declare_integration("inria", "joint", kIrlMs1, t); }) == ErrorCode::SelfIntegration);
  CHECK(code_of([&] { m.declare_integration("inria", "ghost", kIrlMs1, t); }) == ErrorCode::NotFound);
  CHECK(code_of([&] { m.declare_integration("inria", "tum-mod", {"irl", "task-board", "MS99"}, t); }) ==
        ErrorCode::UnknownScope);
  CHECK(code_of([&] { m.declare_integration("inria", "tum-mod", {"xrl", "task-board", "MS1"}, t); }) ==
        ErrorCode::UnknownScope);
}

TEST_CASE("verification and external modules") {
  auto m = make();
  const auto t = parse_timestamp("2024-08-01T10:00:00Z");
  m.upload_module(draft("a", {"tum"}), t);
  m.upload_module(draft("b", {"hcr"}), t);

  CHECK(m.external_modules_for("inria", kIrlMs1).empty());

  const auto d1 = m.declare_integration("inria", "a", kIrlMs1, t).id;
  const auto d2 = m.declare_integration("inria", "a", kIrlMs1, t).id;
  const auto d3 = m.declare_integration("inria", "b", kIrlMs1, t).id;
  const auto d4 = m.declare_integration("inria", "b", kIrlMs2, t).id;
  CHECK(m.external_modules_for("inria", kIrlMs1).empty());

  CHECK(code_of([&] { m.verify_integration(d1, kTeam, t); }) == ErrorCode::Unauthorized);
  CHECK(code_of([&] { m.verify_integration("decl-99", kReferee, t); }) == ErrorCode::NotFound);
  CHECK(m.verify_integration(d1, kReferee, t).verified);
  CHECK(m.external_modules_for("inria", kIrlMs1).size() == 1);
  m.verify_integration(d2, kCommittee, t);
  CHECK(m.external_modules_for("inria", kIrlMs1).size() == 1);
  m.verify_integration(d3, kReferee, t);
  CHECK(m.external_modules_for("inria", kIrlMs1).size() == 2);
  CHECK(m.external_modules_for("inria", kIrlMs2).empty());
  m.verify_integration(d4, kReferee, t);
  CHECK(m.external_modules_for("inria", kIrlMs2).size() == 1);
  CHECK(m.external_modules_for("tum", kIrlMs1).empty());
}

TEST_CASE("trust-based mode verifies on arrival") {
  auto m = make({Exact(1, 4), true});
  const auto t = parse_timestamp("2024-08-01T10:00:00Z");
  m.upload_module(draft("a", {"tum"}), t);
  CHECK(m.declare_integration("inria", "a", kIrlMs1, t).verified);
  CHECK(m.external_modules_for("inria", kIrlMs1).size() == 1);
}

TEST_CASE("removal") {
  auto m = make();
  const auto t = parse_timestamp("2024-08-01T10:00:00Z");
  m.upload_module(draft("a", {"tum"}), t);
  const auto d = m.declare_integration("inria", "a", kIrlMs1, t).id;
  m.verify_integration(d, kReferee, t);

  CHECK(code_of([&] { m.remove_module("a", kTeam, t); }) == ErrorCode::Unauthorized);
  CHECK(code_of([&] { m.remove_module("a", kReferee, t); }) == ErrorCode::Unauthorized);
  CHECK(code_of([&] { m.remove_module("ghost", kCommittee, t); }) == ErrorCode::NotFound);

  // Score the verified use before and after removal.
  auto score_with = [&] {
    coop::ModuleCatalog catalog;
    for (const auto& rec : m.external_modules_for("inria", kIrlMs1)) {
      catalog[rec.id] = {rec.royalty_rate, rec.developer_team_ids};
    }
    const auto rb = coop::bundled_rulebooks();
    const auto* league = rb.find_league("irl");
    const auto* task = league->find_task("task-board");
    coop::AttemptRecord a;
    a.team_id = "inria";
    a.league_id = "irl";
    a.task_id = "task-board";
    a.task_level_id = "board-random";
    coop::MilestoneResult r;
    r.milestone_id = "MS1";
    r.success = true;
    r.level_id = "autonomous";
    for (const auto& [id, _] : catalog) r.external_module_ids.insert(id);
    a.results.push_back(r);
    return coop::score_attempt(*league, *task, a, catalog).task.total;
  };
  const auto before = score_with();
  CHECK(before == Exact(750));

  const auto& removed = m.remove_module("a", kCommittee, t + std::chrono::hours(1));
  CHECK(removed.status == coop::ModuleStatus::Removed);
  CHECK(code_of([&] { m.remove_module("a", kCommittee, t); }) == ErrorCode::NotFound);
  CHECK(code_of([&] { m.declare_integration("hcr", "a", kIrlMs1, t); }) == ErrorCode::ModuleRemoved);
  CHECK(m.external_modules_for("inria", kIrlMs1).size() == 1);
  CHECK(score_with() == before);
}

TEST_CASE("freeze monotonicity under random operation sequences") {
  oracle::Gen gen(99);
  const auto open = parse_timestamp("2024-07-17T00:00:00Z");
  for (int iter = 0; iter < 200; ++iter) {
    auto m = make();
    auto now = open;
    int accepted = 0;
    std::map<std::string, int> per_window;
    for (int step = 0; step < 60; ++step) {
      now += std::chrono::hours(gen.range(1, 72));
      const auto op = gen.range(0, 9);
      try {
        if (op == 0 && !m.frozen_at()) {
          m.freeze(now);
        } else {
          const auto& rec = m.upload_module(draft("m" + std::to_string(step), {"tum"}), now);
          ++accepted;
          ++per_window[rec.upload_window_id];
        }
      } catch (const coop::Error& e) {
        CHECK((e.code() == ErrorCode::FrozenMarketplace || e.code() == ErrorCode::OutsideWindow));
      }
    }
    for (const auto& [id, rec] : m.modules()) {
      if (m.frozen_at()) CHECK(rec.uploaded_at < *m.frozen_at());
    }
    CHECK(static_cast<int>(m.modules().size()) == accepted);
    for (const auto& [id, rec] : m.modules()) --per_window[rec.upload_window_id];
    for (const auto& [w, c] : per_window) CHECK(c == 0);
  }
}

TEST_CASE("self-integration never appears in external modules") {
  oracle::Gen gen(5);
  const std::vector<std::string> teams{"tum", "hcr", "ipa", "oscar"};
  const auto t = parse_timestamp("2024-08-01T10:00:00Z");
  for (int iter = 0; iter < 200; ++iter) {
    auto m = make({Exact(1, 4), gen.coin()});
    const auto n = gen.range(1, 5);
    for (int k = 0; k < n; ++k) {
      std::set<std::string> devs;
      while (devs.empty()) {
        for (const auto& team : teams) {
          if (gen.coin()) devs.insert(team);
        }
      }
      m.upload_module(draft("m" + std::to_string(k), devs), t);
    }
    for (int k = 0; k < 10; ++k) {
      const auto& user = gen.pick(teams);
      const auto id = "m" + std::to_string(gen.range(0, n - 1));
      try {
        const auto decl = m.declare_integration(user, id, kIrlMs1, t).id;
        if (gen.coin()) m.verify_integration(decl, kReferee, t);
      } catch (const coop::Error& e) {
        CHECK(e.code() == ErrorCode::SelfIntegration);
        CHECK(m.find_module(id)->developed_by(user));
      }
    }
    for (const auto& team : teams) {
      std::set<std::string> seen;
      for (const auto& rec : m.external_modules_for(team, kIrlMs1)) {
        CHECK_FALSE(rec.developed_by(team));
        CHECK(seen.insert(rec.id).second);
      }
    }
  }
}

TEST_CASE("module json round trip") {
  auto m = make();
  auto d = draft("x", {"tum", "inria"}, coop::ModuleCategory::SpeechCommunication);
  d.description = "speech";
  d.artifact_uri = "https://example.org/x";
  const auto& rec = m.upload_module(d, parse_timestamp("2024-08-01T10:00:00Z"));
  CHECK(coop::module_from_json(coop::to_json(rec)) == rec);
  CHECK(coop::to_json(rec)["category"] == "speech_communication");
  CHECK(m.list_modules(coop::ModuleCategory::SpeechCommunication).size() == 1);
  CHECK(m.list_modules(coop::ModuleCategory::DatasetsModels).empty());
  CHECK(m.list_modules(std::nullopt, std::string("inria")).size() == 1);
  CHECK(m.list_modules(std::nullopt, std::string("hcr")).empty());
}

#include "coop/analytics.h"
#include "coop/command_generator.h"
#include "coop/demo.h"
#include "coop/error.h"
#include "coop/ledger.h"
#include "coop/marketplace.h"
#include "coop/runtime.h"
#include "coop/scoring.h"
#include "oracle.h"
#include "stats.h"
#include "synthetic.h"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using coop::Exact;
using coop::Role;
using coop::parse_timestamp;
using nlohmann::json;
using oracle::Frac;

namespace {

// Thrown by expect() with the first mismatch of a criterion.
struct Mismatch {
  std::string what;
};

void expect(bool ok, const std::string& what) {
  if (!ok) throw Mismatch{what};
}

int failures = 0;

void criterion(const std::string& name, const std::function<std::string()>& body) {
  const auto start = std::chrono::steady_clock::now();
  std::string status = "PASS";
  std::string detail;
  try {
    detail = body();
  } catch (const Mismatch& m) {
    status = "FAIL";
    detail = m.what;
  } catch (const std::exception& e) {
    status = "FAIL";
    detail = std::string("exception: ") + e.what();
  }
  if (status == "FAIL") ++failures;
  const auto ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
  std::cout << status << "  " << name << "  (" << detail << "; " << ms << " ms)" << std::endl;
}

std::shared_ptr<const coop::Rulebook> rulebooks() {
  static const auto rb = std::make_shared<const coop::Rulebook>(coop::bundled_rulebooks());
  return rb;
}

coop::MilestoneResult result(const std::string& id, bool success, const std::string& level, long long q_tenths,
                             std::vector<std::string> penalties = {}, std::set<std::string> modules = {}) {
  coop::MilestoneResult r;
  r.milestone_id = id;
  r.success = success;
  r.level_id = level;
  r.subjective_score = synthetic::q_exact(q_tenths);
  r.penalty_ids = std::move(penalties);
  r.external_module_ids = std::move(modules);
  return r;
}

coop::AttemptRecord attempt(const std::string& team, const std::string& league, const std::string& task,
                            const std::string& level, std::vector<coop::MilestoneResult> results) {
  coop::AttemptRecord a;
  a.id = "a";
  a.team_id = team;
  a.league_id = league;
  a.task_id = task;
  a.task_level_id = level;
  a.results = std::move(results);
  return a;
}

std::string irl_perfect_run() {
  // Spreadsheet-style oracle read straight from the fixture document.
  std::ifstream in(std::string(COOP_FIXTURE_DIR) + "/rulebooks/irl.json");
  expect(in.good(), "cannot open IRL fixture");
  const auto doc = json::parse(in);
  const auto& league = doc.at("leagues").at(0);
  const auto& task_doc = league.at("tasks").at(0);
  long long sum_b = 0;
  Frac expected(0);
  std::vector<coop::MilestoneResult> results;
  for (const auto& m : task_doc.at("milestones")) {
    const long long b = m.at("base_score").get<long long>();
    sum_b += b;
    json levels = json::array();
    if (m.contains("type")) {
      for (const auto& l : league.at("type_catalogs").at(m.at("type").get<std::string>()).at("conditional_levels")) {
        levels.push_back(l);
      }
    }
    if (m.contains("conditional_levels")) {
      for (const auto& l : m.at("conditional_levels")) levels.push_back(l);
    }
    bool has_autonomous = false;
    for (const auto& l : levels) {
      if (l.at("id") == "autonomous") {
        has_autonomous = true;
        expect(l.at("factor").get<double>() == 1.0, "autonomous factor is not 1.0");
      }
    }
    expect(has_autonomous, "milestone without an autonomous level");
    expected = expected + oracle::milestone(true, b, 1, 5, 0, 0);
    results.push_back(result(m.at("id").get<std::string>(), true, "autonomous", 50));
  }
  std::string full_level;
  for (const auto& tl : league.at("task_conditional_levels")) {
    if (tl.at("factor").get<double>() == 1.0) full_level = tl.at("id").get<std::string>();
  }
  expect(sum_b == 2100, "sum of base scores is " + std::to_string(sum_b));
  expect(expected == Frac(2310), "oracle total is " + expected.str());

  const auto* spec = rulebooks()->find_league(league.at("id").get<std::string>());
  const auto* task = spec->find_task(task_doc.at("id").get<std::string>());
  const auto a = attempt("t", spec->id, task->id, full_level, results);
  const auto score = coop::task_score(*spec, *task, a, {});
  expect(score.task_factor == Exact(1), "task factor is not 1");
  expect(score.total == expected.exact(), "S_task = " + coop::to_ratio_string(score.total));
  return "S_task = " + coop::to_ratio_string(score.total) + " with sum(b) = " + std::to_string(sum_b);
}

std::string transfer_factor() {
  oracle::Gen gen(101);
  const std::vector<std::int64_t> bases{100, 150, 200, 300, 400, 600, 800, 1000};
  int cases = 0;
  for (; cases < 2000; ++cases) {
    const auto b = gen.pick(bases);
    const auto spec = synthetic::milestone("M1", 1, b);
    const auto& level = gen.pick(synthetic::kLevels);
    const long long q = gen.range(0, 100);
    std::vector<std::string> penalties;
    for (long long n = gen.range(0, 3); n > 0; --n) penalties.push_back(gen.pick(synthetic::kPenalties).first);
    const auto r = result("M1", true, level.id, q, penalties);
    const auto plain = coop::milestone_score(spec, r, 0);
    const Frac oracle_plain = oracle::milestone(true, b, oracle::tenths(level.tenths), oracle::tenths(q),
                                                synthetic::penalty_points(penalties), 0);
    expect(plain == oracle_plain.exact(), "non-transfer score differs from oracle at case " + std::to_string(cases));
    for (std::size_t m = 1; m <= 4; ++m) {
      const auto boosted = coop::milestone_score(spec, r, m);
      expect(boosted == Exact(10) * plain, "transfer score is not ten times at case " + std::to_string(cases));
    }
  }
  return std::to_string(cases) + " random results, M_n in 1..4";
}

std::string subjective_bound() {
  Exact previous(-1);
  for (long long q = 0; q <= 100; ++q) {
    const auto f = coop::subjective_factor(synthetic::q_exact(q));
    expect(f >= Exact(1) && f <= Exact(6, 5), "factor out of [1, 1.2] at q = " + std::to_string(q));
    expect(f > previous, "factor not increasing at q = " + std::to_string(q));
    previous = f;
  }
  expect(coop::subjective_factor(Exact(0)) == Exact(1), "factor at q = 0");
  expect(coop::subjective_factor(Exact(10)) == Exact(6, 5), "factor at q = 10");

  oracle::Gen gen(202);
  const auto spec = synthetic::milestone("M1", 1, 300);
  int cases = 0;
  for (; cases < 1000; ++cases) {
    const auto& level = gen.pick(synthetic::kLevels);
    const long long q1 = gen.range(0, 100);
    const long long q2 = gen.range(q1, 100);
    std::vector<std::string> penalties;
    if (gen.coin()) penalties.push_back(gen.pick(synthetic::kPenalties).first);
    const auto low = coop::milestone_score(spec, result("M1", true, level.id, q1, penalties), 0);
    const auto high = coop::milestone_score(spec, result("M1", true, level.id, q2, penalties), 0);
    expect(low <= high, "milestone score decreases in q at case " + std::to_string(cases));
    auto more = penalties;
    more.push_back(gen.pick(synthetic::kPenalties).first);
    const auto penalized = coop::milestone_score(spec, result("M1", true, level.id, q1, more), 0);
    expect(penalized <= low, "milestone score increases with penalties at case " + std::to_string(cases));
  }
  return "q grid 0.0..10.0 and " + std::to_string(cases) + " random monotonicity pairs";
}

std::string conservation() {
  oracle::Gen gen(303);
  const std::vector<std::string> developers{"d1", "d2", "d3", "d4"};
  const std::vector<std::int64_t> bases{100, 200, 300, 400, 600};
  int cases = 0;
  int unit_t = 0;
  for (; cases < 2000; ++cases) {
    const auto b = gen.pick(bases);
    const auto t = synthetic::task({b});
    const auto league = synthetic::league(t);
    const auto& task_level = cases % 2 == 0 ? synthetic::kTaskLevels[0] : gen.pick(synthetic::kTaskLevels);
    if (task_level.tenths == 10) ++unit_t;

    coop::ModuleCatalog catalog;
    std::set<std::string> used;
    std::vector<std::pair<long long, long long>> oracle_modules;  // (rate in twentieths, developer count)
    const long long modules = gen.range(1, 4);
    for (long long k = 0; k < modules; ++k) {
      const long long rate = gen.range(0, 20);
      coop::ModuleTerms terms;
      terms.royalty_rate = Exact(rate, 20);
      for (const auto& d : developers) {
        if (gen.coin()) terms.developer_team_ids.insert(d);
      }
      if (terms.developer_team_ids.empty()) terms.developer_team_ids.insert(gen.pick(developers));
      oracle_modules.emplace_back(rate, static_cast<long long>(terms.developer_team_ids.size()));
      const auto id = "m" + std::to_string(k);
      catalog[id] = terms;
      used.insert(id);
    }
    const auto& level = gen.pick(synthetic::kLevels);
    const long long q = gen.range(0, 100);
    std::vector<std::string> penalties;
    if (gen.coin()) penalties.push_back(gen.pick(synthetic::kPenalties).first);
    const auto a = attempt("user", "lab", "t", task_level.id, {result("M1", true, level.id, q, penalties, used)});
    const auto score = coop::task_score(league, t, a, catalog);
    const auto royalties = coop::royalties_for_attempt(a, score, catalog);

    const auto& m = score.milestones.at(0);
    const Exact deduction = score.task_factor * std::max(m.score, Exact(0)) - m.contribution;
    Exact payouts(0);
    for (const auto& e : royalties) {
      expect(e.developer_team_id != "user", "user paid itself at case " + std::to_string(cases));
      payouts += e.amount;
    }
    expect(deduction == score.task_factor * payouts, "deduction != T x payouts at case " + std::to_string(cases));
    if (task_level.tenths == 10) expect(deduction == payouts, "deduction != payouts at T = 1");

    const Frac ms = oracle::milestone(true, b, oracle::tenths(level.tenths), oracle::tenths(q),
                                      synthetic::penalty_points(penalties), modules);
    Frac oracle_payouts(0);
    Frac rate_sum(0);
    for (const auto& [rate, devs] : oracle_modules) {
      rate_sum = rate_sum + Frac(rate, 20);
      for (long long k = 0; k < devs; ++k) oracle_payouts = oracle_payouts + oracle::royalty(ms, modules, Frac(rate, 20), devs);
    }
    const Frac t_factor = synthetic::task_factor(task_level.id);
    const Frac oracle_deduction = t_factor * (rate_sum / Frac(modules)) * oracle::clamp0(ms);
    expect(payouts == oracle_payouts.exact(), "payouts differ from oracle at case " + std::to_string(cases));
    expect(deduction == oracle_deduction.exact(), "deduction differs from oracle at case " + std::to_string(cases));
  }
  return std::to_string(cases) + " random fixtures, " + std::to_string(unit_t) + " with T = 1";
}

const auto kFreeze = parse_timestamp("2024-11-25T08:00:00Z");
const auto kRun = parse_timestamp("2024-11-26T09:00:00Z");

coop::ModuleDraft draft(const std::string& id, std::set<std::string> devs) {
  coop::ModuleDraft d;
  d.id = id;
  d.name = id;
  d.developer_team_ids = std::move(devs);
  return d;
}

coop::OutcomeUpdate outcome(const std::string& ms, bool success, const std::string& level,
                            std::vector<std::string> penalties = {}) {
  coop::OutcomeUpdate u;
  u.milestone_id = ms;
  u.success = success;
  u.level_id = level;
  u.penalty_ids = std::move(penalties);
  return u;
}

// IRL teams tum (developer) and hcr (user); hcr declares tum-mod for MS7.
coop::Event irl_event() {
  coop::EventConfig config;
  config.windows = {{"W1", parse_timestamp("2024-07-17T00:00:00Z"), parse_timestamp("2024-11-25T00:00:00Z")}};
  const auto start = parse_timestamp("2024-08-01T00:00:00Z");
  coop::Event ev(rulebooks(), config, start);
  ev.register_principal("tc", {Role::TechnicalCommittee}, "tc-token", start);
  ev.register_principal("ref", {Role::Referee}, "ref-token", start);
  ev.register_team("tc", {"tum", "tum", "", "irl", ""}, "tum-token", start);
  ev.register_team("tc", {"hcr", "hcr", "", "irl", ""}, "hcr-token", start);
  ev.upload_module("tum", draft("tum-mod", {"tum"}), start);
  const auto decl = ev.declare_integration("hcr", "hcr", "tum-mod", {"irl", "task-board", "MS7"}, start).id;
  ev.verify_integration("ref", decl, start);
  ev.freeze("tc", kFreeze, kFreeze);
  return ev;
}

std::string fixed_royalty() {
  const auto& league = *rulebooks()->find_league("irl");
  const auto& task = league.tasks.at(0);
  coop::ModuleCatalog catalog{{"mod", {league.default_royalty, {"dev"}}}};
  expect(league.default_royalty == Exact(1, 4), "default royalty is " + coop::to_ratio_string(league.default_royalty));
  int checked = 0;
  for (const auto& m : task.milestones) {
    for (const auto& level : m.levels) {
      for (long long q : {0LL, 25LL, 50LL, 100LL}) {
        for (bool penalized : {false, true}) {
          std::vector<std::string> penalties;
          if (penalized && !m.penalties.empty()) penalties.push_back(m.penalties.front().id);
          const auto a = attempt("user", "irl", task.id, league.task_levels.front().id,
                                 {result(m.id, true, level.id, q, penalties, {"mod"})});
          const auto score = coop::task_score(league, task, a, catalog);
          const auto entries = coop::royalties_for_attempt(a, score, catalog);
          Exact ms(0);
          for (const auto& row : score.milestones) {
            if (row.milestone_id == m.id) ms = row.score;
          }
          const Exact expected = Exact(1, 4) * std::max(ms, Exact(0));
          expect(coop::royalties_total(entries) == expected, "developer share is not 25% on " + m.id);
          for (const auto& e : entries) expect(e.developer_team_id == "dev", "unexpected payee");
          ++checked;
        }
      }
    }
  }

  // Through the event runtime: 0.6 * 10 * 400 = 2400, developer receives 600.
  auto ev = irl_event();
  const auto id = ev.open_attempt("ref", "hcr", "task-board", "board-random", kRun).attempt.id;
  ev.record_outcome("ref", id, outcome("MS7", true, "teleop-remote"), kRun);
  const auto& b = ev.close_attempt("ref", id, kRun + std::chrono::minutes(5));
  Exact milestone_score(0);
  for (const auto& m : b.task.milestones) {
    if (m.milestone_id == "MS7") milestone_score = m.score;
  }
  expect(milestone_score == Exact(2400), "MS7 scored " + coop::to_ratio_string(milestone_score));
  expect(ev.royalty_total("tum") == Exact(600), "tum received " + coop::to_ratio_string(ev.royalty_total("tum")));
  return std::to_string(checked) + " IRL milestone/level/q cases plus one live attempt (600 of 2400)";
}

std::string no_self_royalties() {
  const std::vector<std::string> teams{"A", "B", "C", "D"};
  const auto t = synthetic::task({100});
  const auto league = synthetic::league(t);
  long long instances = 0;
  // Every module count 1..4, every developer subset per module, every user,
  // every subset of modules declared.
  for (int modules = 1; modules <= 4; ++modules) {
    std::vector<int> dev_masks(static_cast<std::size_t>(modules), 1);
    for (;;) {
      coop::ModuleCatalog catalog;
      for (int k = 0; k < modules; ++k) {
        coop::ModuleTerms terms;
        terms.royalty_rate = Exact(1, 4);
        for (int bit = 0; bit < 4; ++bit) {
          if (dev_masks[static_cast<std::size_t>(k)] & (1 << bit)) terms.developer_team_ids.insert(teams[bit]);
        }
        catalog["m" + std::to_string(k)] = terms;
      }
      for (int user = 0; user < 4; ++user) {
        const auto& user_id = teams[static_cast<std::size_t>(user)];
        for (int declared = 1; declared < (1 << modules); ++declared) {
          // Undeclared modules never reach scoring; enumerate them once.
          bool canonical = true;
          for (int k = 0; k < modules; ++k) {
            if (!(declared & (1 << k)) && dev_masks[static_cast<std::size_t>(k)] != 1) canonical = false;
          }
          if (!canonical) continue;
          std::set<std::string> used;
          long long external = 0;
          std::set<std::string> payees;
          for (int k = 0; k < modules; ++k) {
            if (!(declared & (1 << k))) continue;
            used.insert("m" + std::to_string(k));
            if (!(dev_masks[static_cast<std::size_t>(k)] & (1 << user))) {
              ++external;
              for (int bit = 0; bit < 4; ++bit) {
                if (dev_masks[static_cast<std::size_t>(k)] & (1 << bit)) payees.insert(teams[bit]);
              }
            }
          }
          const auto a = attempt(user_id, "lab", "t", "t10", {result("M1", true, "l10", 0, {}, used)});
          const auto score = coop::task_score(league, t, a, catalog);
          const auto entries = coop::royalties_for_attempt(a, score, catalog);
          ++instances;
          const auto& m = score.milestones.at(0);
          expect(static_cast<long long>(m.external_modules.size()) == external,
                 "co-developed module counted for user " + user_id);
          expect(m.score == (external > 0 ? Exact(1000) : Exact(100)), "transfer flag wrong for user " + user_id);
          std::set<std::string> paid;
          for (const auto& e : entries) {
            expect(e.developer_team_id != user_id, "self royalty for " + user_id);
            paid.insert(e.developer_team_id);
          }
          expect(paid == payees, "payees differ for user " + user_id);
        }
      }
      std::size_t k = 0;
      while (k < dev_masks.size() && dev_masks[k] == 15) dev_masks[k++] = 1;
      if (k == dev_masks.size()) break;
      ++dev_masks[k];
    }
  }

  // The marketplace refuses declarations by any developer of the module.
  long long refusals = 0;
  for (int mask = 1; mask < 16; ++mask) {
    coop::Marketplace market(rulebooks(), {{"W1", parse_timestamp("2024-07-17T00:00:00Z"),
                                            parse_timestamp("2024-11-25T00:00:00Z")}});
    std::set<std::string> devs;
    for (int bit = 0; bit < 4; ++bit) {
      if (mask & (1 << bit)) devs.insert(teams[static_cast<std::size_t>(bit)]);
    }
    const auto at = parse_timestamp("2024-08-01T00:00:00Z");
    market.upload_module(draft("m", devs), at);
    for (const auto& user : teams) {
      bool refused = false;
      try {
        market.declare_integration(user, "m", {"irl", "task-board", "MS1"}, at);
      } catch (const coop::Error& e) {
        refused = e.code() == coop::ErrorCode::SelfIntegration;
      }
      expect(refused == devs.contains(user), "declaration by " + user + " handled wrongly");
      if (refused) ++refusals;
    }
  }
  return std::to_string(instances) + " scoring instances, " + std::to_string(refusals) +
         " self-declarations refused";
}

struct GridOutcome {
  const char* label;
  bool success;
  const char* level;
  bool collision;
};

std::string best_of_three() {
  const std::vector<GridOutcome> grid{{"fail", false, "autonomous", false},
                                      {"assisted+collision", true, "human-assistance", true},
                                      {"line-of-sight", true, "teleop-line-of-sight", false},
                                      {"line-of-sight+collision", true, "teleop-line-of-sight", true},
                                      {"remote", true, "teleop-remote", false},
                                      {"autonomous+collision", true, "autonomous", true}};
  // Oracle per outcome: T = 1, M_n = 1 at r = 0.25, b = 400, collision 100.
  auto oracle_ms = [](const GridOutcome& o) {
    const Frac level = o.level == std::string("human-assistance")       ? Frac(0)
                       : o.level == std::string("teleop-line-of-sight") ? oracle::tenths(3)
                       : o.level == std::string("teleop-remote")        ? oracle::tenths(6)
                                                                        : Frac(1);
    return oracle::milestone(o.success, 400, level, 0, o.collision ? 100 : 0, 1);
  };
  int triples = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = 0; j < grid.size(); ++j) {
      for (std::size_t k = 0; k < grid.size(); ++k) {
        const std::vector<const GridOutcome*> plan{&grid[i], &grid[j], &grid[k]};
        auto ev = irl_event();
        std::vector<std::string> ids;
        for (std::size_t n = 0; n < plan.size(); ++n) {
          const auto at = kRun + std::chrono::hours(static_cast<int>(n));
          const auto id = ev.open_attempt("ref", "hcr", "task-board", "board-random", at).attempt.id;
          ev.record_outcome("ref", id,
                            outcome("MS7", plan[n]->success, plan[n]->level,
                                    plan[n]->collision ? std::vector<std::string>{"collision"}
                                                       : std::vector<std::string>{}),
                            at);
          ev.close_attempt("ref", id, at + std::chrono::minutes(5));
          ids.push_back(id);
        }
        std::size_t best = 0;
        for (std::size_t n = 1; n < plan.size(); ++n) {
          const Frac s_n = Frac(3, 4) * oracle::clamp0(oracle_ms(*plan[n]));
          const Frac s_best = Frac(3, 4) * oracle::clamp0(oracle_ms(*plan[best]));
          const int p_n = plan[n]->collision ? 100 : 0;
          const int p_best = plan[best]->collision ? 100 : 0;
          if (s_best < s_n || (s_n == s_best && p_n < p_best)) best = n;
        }
        const Frac best_score = Frac(3, 4) * oracle::clamp0(oracle_ms(*plan[best]));
        const Frac best_royalty = Frac(1, 4) * oracle::clamp0(oracle_ms(*plan[best]));
        const std::string where = std::string(plan[0]->label) + "/" + plan[1]->label + "/" + plan[2]->label;
        expect(ev.challenge_total("hcr") == best_score.exact(), "S_task wrong for " + where);
        const auto* counted = ev.counted_attempt("hcr", "task-board");
        expect(counted && counted->attempt.id == ids[best], "wrong counted attempt for " + where);
        Exact paid(0);
        for (const auto& e : ev.royalties_for("tum")) {
          expect(e.source.attempt_id == ids[best], "royalty from a non-counted attempt for " + where);
          paid += e.amount;
        }
        expect(paid == best_royalty.exact(), "royalty total wrong for " + where);
        ++triples;
      }
    }
  }
  return std::to_string(triples) + " attempt triples against brute force";
}

std::string marketplace_stats() {
  auto ev = coop::demo::build_event();
  const auto stats = coop::reuse_stats(ev);
  expect(stats.modules_total == 90, "modules_total = " + std::to_string(stats.modules_total));
  std::vector<std::int64_t> per_window;
  for (const auto& [id, n] : stats.uploads_per_window) per_window.push_back(n);
  expect(per_window == std::vector<std::int64_t>{24, 32, 34}, "per-window uploads differ");

  const auto freeze = parse_timestamp(coop::demo::kFreezeAt);
  const auto last = ev.ledger().back().at;
  int rejected = 0;
  for (int day = 0; day < 30; ++day) {
    const auto at = std::max(freeze, last) + std::chrono::hours(24 * day) + std::chrono::seconds(day);
    coop::ErrorCode code = coop::ErrorCode::ConfigError;
    try {
      ev.upload_module("tum-mirmi", draft("late-" + std::to_string(day), {"tum-mirmi"}), at);
    } catch (const coop::Error& e) {
      code = e.code();
    }
    expect(code == coop::ErrorCode::FrozenMarketplace, "upload after freeze was not rejected");
    ++rejected;
  }
  expect(coop::reuse_stats(ev).modules_total == 90, "module count changed after rejected uploads");
  return "modules_total = 90 (24 + 32 + 34), " + std::to_string(rejected) + " late uploads rejected";
}

std::string graph_merge() {
  const auto ev = coop::demo::build_event();
  const auto pre = coop::build_transfer_graph(ev, coop::GraphPhase::PreEvent);
  const auto post = coop::build_transfer_graph(ev, coop::GraphPhase::PostEvent);
  const auto pre_components = coop::connected_components(pre);
  const auto post_components = coop::connected_components(post);
  expect(pre_components >= 2, "pre-event components = " + std::to_string(pre_components));
  expect(post_components == 1, "post-event components = " + std::to_string(post_components));
  std::map<std::string, std::string> league_of;
  for (const auto& n : pre.nodes) league_of[n.team_id] = n.league_id;
  for (const auto& e : pre.edges) {
    expect((league_of[e.developer_team_id] == "irl") == (league_of[e.user_team_id] == "irl"),
           "pre-event edge crosses into IRL: " + e.developer_team_id + " -> " + e.user_team_id);
  }
  for (const auto& component : coop::component_members(pre)) {
    bool irl = false;
    bool other = false;
    for (const auto& team : component) (league_of[team] == "irl" ? irl : other) = true;
    expect(!(irl && other), "IRL shares a pre-event component with another league");
  }
  return "pre-event " + std::to_string(pre_components) + " components with IRL isolated, post-event " +
         std::to_string(post_components);
}

std::string command_generator() {
  const auto& srl = *rulebooks()->find_league("srl");
  const auto& orl = *rulebooks()->find_league("orl");
  const auto srl_domain = coop::bundled_domain("srl");
  const auto orl_domain = coop::bundled_domain("orl");
  std::vector<std::string> objects;
  for (const auto& o : srl_domain.objects) objects.push_back(o.name);

  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    for (int task = 1; task <= 3; ++task) {
      const auto base = task < 3 ? std::optional<std::string>(srl_domain.kitchens[seed % 3]) : std::nullopt;
      const auto a = coop::to_json(coop::generate_srl(srl_domain, srl, task, base, {}, seed)).dump();
      const auto b = coop::to_json(coop::generate_srl(srl_domain, srl, task, base, {}, seed)).dump();
      expect(a == b, "SRL output differs between runs for seed " + std::to_string(seed));
      const auto c = coop::to_json(coop::generate_orl(orl_domain, orl, task, {}, seed)).dump();
      const auto d = coop::to_json(coop::generate_orl(orl_domain, orl, task, {}, seed)).dump();
      expect(c == d, "ORL output differs between runs for seed " + std::to_string(seed));
    }
  }

  oracle::Gen gen(404);
  for (int i = 0; i < 1000; ++i) {
    coop::PinSet pins;
    if (gen.coin()) pins["kitchen_i"] = gen.pick(srl_domain.kitchens);
    if (gen.coin()) pins["kitchen_j"] = gen.pick(srl_domain.kitchens);
    if (gen.coin()) pins["location_i"] = gen.pick(srl_domain.locations);
    if (gen.coin()) pins["location_j"] = gen.pick(srl_domain.locations);
    if (gen.coin()) pins["object"] = gen.pick(objects);
    if (gen.coin()) pins["action"] = gen.pick(srl_domain.actions);
    const auto c = coop::generate_srl(srl_domain, srl, 3, std::nullopt, pins, static_cast<std::uint64_t>(i));
    for (const auto& [k, v] : pins) expect(c.assignment.at(k) == v, "SRL pin " + k + " not honored");
  }
  for (int i = 0; i < 1000; ++i) {
    coop::PinSet pins;
    if (gen.coin()) pins["parcel"] = gen.pick(orl_domain.parcels).id;
    if (gen.coin()) pins["pickup_point"] = gen.pick(orl_domain.points);
    if (gen.coin()) {
      const auto d = gen.pick(orl_domain.points);
      if (!(pins.contains("pickup_point") && pins["pickup_point"] == d)) pins["delivery_point"] = d;
    }
    const auto c = coop::generate_orl(orl_domain, orl, 1, pins, static_cast<std::uint64_t>(i));
    for (const auto& [k, v] : pins) expect(c.assignment.at(k) == v, "ORL pin " + k + " not honored");
    expect(c.assignment.at("pickup_point") != c.assignment.at("delivery_point"), "pick-up equals delivery");
  }

  std::map<std::string, std::map<std::string, std::size_t>> srl_counts;
  std::map<std::string, std::map<std::string, std::size_t>> orl_counts;
  const std::regex shape(R"(^Pick the .+ from the .+ and (give|place) .+)");
  bool saw_give = false;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    const auto c = coop::generate_srl(srl_domain, srl, 3, std::nullopt, {}, seed);
    for (const auto& [k, v] : c.assignment) ++srl_counts[k][v];
    expect(std::regex_search(c.text, shape), "SRL text out of template: " + c.text);
    saw_give = saw_give || c.assignment.at("action") == "give";
    const auto o = coop::generate_orl(orl_domain, orl, 1, {}, seed);
    for (const auto& [k, v] : o.assignment) ++orl_counts[k][v];
  }
  expect(saw_give, "no give command rendered");
  std::vector<std::string> parcels;
  for (const auto& p : orl_domain.parcels) parcels.push_back(p.id);
  const std::vector<std::pair<std::string, std::vector<std::string>>> srl_vars{
      {"kitchen_i", srl_domain.kitchens}, {"kitchen_j", srl_domain.kitchens}, {"location_i", srl_domain.locations},
      {"location_j", srl_domain.locations}, {"object", objects},             {"action", srl_domain.actions}};
  const std::vector<std::pair<std::string, std::vector<std::string>>> orl_vars{
      {"parcel", parcels}, {"pickup_point", orl_domain.points}, {"delivery_point", orl_domain.points}};
  std::ostringstream chi;
  std::string worst;
  auto test = [&](const std::map<std::string, std::map<std::string, std::size_t>>& counts, const auto& vars) {
    for (const auto& [name, domain] : vars) {
      const double x = stats::chi_square_uniform(counts.at(name), domain);
      const double critical = stats::chi_square_critical_001(domain.size() - 1);
      chi << " " << name << "=" << x;
      if (x >= critical && worst.empty()) {
        std::ostringstream w;
        w << name << " chi2 " << x << " >= " << critical;
        worst = w.str();
      }
    }
  };
  test(srl_counts, srl_vars);
  test(orl_counts, orl_vars);
  expect(worst.empty(), worst + ";" + chi.str());
  return "determinism over 1200 commands, 2000 pin sets, chi2 at 0.01:" + chi.str();
}

std::string ledger_replay() {
  const auto incremental = coop::demo::build_event();
  const auto dir = std::filesystem::temp_directory_path() / "coop-acceptance";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "ledger.ndjson").string();
  {
    std::ofstream out(path);
    out << coop::serialize_ledger(incremental.ledger());
  }
  const auto first = coop::Event::replay(rulebooks(), coop::read_ledger(path));
  const auto second = coop::Event::replay(rulebooks(), coop::read_ledger(path));
  const auto a = coop::score_report(first).dump(2);
  const auto b = coop::score_report(second).dump(2);
  expect(a == b, "two replays differ");
  expect(a == coop::score_report(incremental).dump(2), "replay differs from incremental state");
  for (const char* league : {"irl", "srl", "orl"}) {
    const auto x = first.leaderboard(league);
    const auto y = incremental.leaderboard(league);
    expect(x.size() == y.size(), "leaderboard size differs");
    for (std::size_t i = 0; i < x.size(); ++i) {
      expect(x[i].team_id == y[i].team_id && x[i].coopetition == y[i].coopetition, "leaderboard row differs");
    }
  }
  for (const auto& [id, team] : incremental.teams()) {
    expect(first.royalty_total(id) == incremental.royalty_total(id), "royalty total differs for " + id);
  }
  std::filesystem::remove_all(dir);
  return std::to_string(incremental.ledger().size()) + " entries, " + std::to_string(a.size()) +
         "-byte report identical across runs and to incremental state";
}

}  // namespace

int main() {
  criterion("IRL perfect run scores 2310 exactly", irl_perfect_run);
  criterion("Transfer score is ten times the non-transfer score", transfer_factor);
  criterion("Subjective factor within [1, 1.2] and monotone", subjective_bound);
  criterion("Royalty conservation", conservation);
  criterion("Single developer receives 25% at the fixed rate", fixed_royalty);
  criterion("No self-royalties (exhaustive, 4 teams, 4 modules)", no_self_royalties);
  criterion("Best of three attempts", best_of_three);
  criterion("Marketplace stats and freeze", marketplace_stats);
  criterion("Transfer graph merges after the event", graph_merge);
  criterion("Command generator", command_generator);
  criterion("Ledger replay", ledger_replay);
  return failures == 0 ? 0 : 1;
}

#include "coop/demo.h"

#include "coop/rulebook.h"

#include <memory>

namespace coop::demo {

namespace {

using namespace std::chrono_literals;

constexpr const char* kCommittee = "tc";
constexpr const char* kReferee = "ref";
constexpr const char* kEvaluator = "eval";

Timestamp at(const char* text) {
  return parse_timestamp(text);
}

struct TeamSeed {
  const char* id;
  const char* name;
  const char* institution;
  const char* league;
  const char* robot;
};

constexpr TeamSeed kTeams[] = {
    {"tum-mirmi", "TUM-MIRMI", "TUM", "irl", "Franka FR3 / Franka Hand / Realsense D435i"},
    {"hcr", "HCR Team", "J. Stefan Inst.", "irl", "Franka FR3 / Franka Hand / Realsense D435"},
    {"tecnalia", "Tecnalia Flexbotics", "Tecnalia", "irl", "Nextage / Pneumatic EE / Stereo Vision"},
    {"ipa", "Fraunhofer IPA", "Fraunhofer IPA", "irl", "UR5e / WSG 50-110 / Realsense D435"},
    {"oscar", "OSCAR", "CEA", "irl", "Collaborative arm / parallel gripper"},
    {"alter-ego", "Alter-Ego", "IIT / Univ. Pisa", "srl", "Alter-Ego mobile humanoid"},
    {"inria", "INRIA", "INRIA", "srl", "TIAGo"},
    {"susr", "SUSR", "Sorbonne Univ.", "srl", "TIAGo"},
    {"dlr", "DLR", "DLR", "srl", "Rollin' Justin"},
    {"kit", "KIT", "KIT", "srl", "ARMAR-6"},
    {"socrob", "SocRob", "IST Lisbon", "srl", "TIAGo"},
    {"gepetto", "GEPETTO", "LAAS-CNRS", "srl", "TIAGo++"},
    {"use", "USE", "Univ. Seville", "orl", "Aerial manipulator"},
    {"rsl", "RSL", "ETH Zurich", "orl", "ANYmal with arm"},
    {"iit", "IIT", "IIT", "orl", "CENTAURO"},
};

struct ModuleSeed {
  const char* id;
  const char* name;
  ModuleCategory category;
  ModuleKind kind;
  std::set<std::string> developers;
};

const std::vector<ModuleSeed>& named_modules() {
  using C = ModuleCategory;
  using K = ModuleKind;
  static const std::vector<ModuleSeed> modules{
      {"pinocchio", "Pinocchio Library", C::RigidBodyDynamicsControl, K::Software, {"gepetto"}},
      {"opensot-cartesio", "OpenSoT & CartesI/O", C::RigidBodyDynamicsControl, K::Software, {"iit"}},
      {"tum-task-board-perception", "TUM Task Board Perception Package", C::PoseEstimationVisionDetection,
       K::Software, {"tum-mirmi"}},
      {"happypose", "HappyPose", C::PoseEstimationVisionDetection, K::Software, {"inria", "gepetto"}},
      {"3d-object-tracking", "3D Object Tracking", C::PoseEstimationVisionDetection, K::Software, {"dlr"}},
      {"yolo-ros", "YOLO ROS", C::PoseEstimationVisionDetection, K::Software, {"use"}},
      {"blenderproc", "BlenderProc", C::SimulationDigitalEnvironments, K::Software, {"dlr"}},
      {"nancy-digital-twin", "Nancy Digital Twin", C::SimulationDigitalEnvironments, K::Data, {"inria"}},
      {"kitchens-envs", "Kitchens Envs", C::SimulationDigitalEnvironments, K::Data, {"kit"}},
      {"dlr-kitchen", "DLR Kitchen", C::SimulationDigitalEnvironments, K::Data, {"dlr"}},
      {"icp-localization", "ICP Localization", C::LocalizationMapping, K::Software, {"rsl"}},
      {"kit-object-dataset", "KIT Object Dataset", C::DatasetsModels, K::Data, {"kit"}},
      {"table-obj", "Table obj", C::DatasetsModels, K::Data, {"hcr"}},
      {"speech-to-text", "Speech-To-Text", C::SpeechCommunication, K::Software, {"socrob"}},
      {"text-to-speech", "Text-To-Speech", C::SpeechCommunication, K::Software, {"socrob"}},
      {"llm-task-planning", "LLM Task Planning", C::SpeechCommunication, K::Software, {"alter-ego"}},
  };
  return modules;
}

struct Outcome {
  const char* milestone;
  const char* level;
  const char* q;
  std::vector<std::string> penalties = {};
  bool success = true;
};

class Builder {
public:
  Builder()
      : event_(std::make_shared<const Rulebook>(bundled_rulebooks()), config(), at("2024-07-01T09:00:00Z")) {}

  static EventConfig config() {
    EventConfig c;
    c.windows = {{"W1", at("2024-07-17T00:00:00Z"), at("2024-09-01T00:00:00Z")},
                 {"W2", at("2024-09-01T00:00:00Z"), at("2024-10-16T00:00:00Z")},
                 {"W3", at("2024-10-16T00:00:00Z"), at("2024-11-25T00:00:00Z")}};
    return c;
  }

  void principals() {
    const auto t = at("2024-07-01T09:05:00Z");
    event_.register_principal(kCommittee, {Role::TechnicalCommittee}, kCommitteeToken, t);
    event_.register_principal(kReferee, {Role::Referee}, kRefereeToken, t);
    event_.register_principal(kEvaluator, {Role::ExternalEvaluator}, kEvaluatorToken, t);
  }

  void teams() {
    auto t = at("2024-07-10T12:00:00Z");
    for (const auto& s : kTeams) {
      event_.register_team(kCommittee, Team{s.id, s.name, s.institution, s.league, s.robot}, team_token(s.id), t);
      t += 10min;
    }
  }

  void uploads() {
    constexpr ModuleCategory cycle[] = {
        ModuleCategory::PoseEstimationVisionDetection, ModuleCategory::LocalizationMapping,
        ModuleCategory::RigidBodyDynamicsControl,      ModuleCategory::DatasetsModels,
        ModuleCategory::SimulationDigitalEnvironments, ModuleCategory::SpeechCommunication,
        ModuleCategory::Other,
    };
    const std::pair<const char*, int> windows[] = {
        {"2024-07-20T08:00:00Z", 24}, {"2024-09-05T08:00:00Z", 32}, {"2024-10-20T08:00:00Z", 34}};
    std::size_t named = 0;
    int filler = 0;
    for (const auto& [start, count] : windows) {
      auto t = at(start);
      for (int i = 0; i < count; ++i, t += 1h) {
        ModuleDraft d;
        if (named < named_modules().size()) {
          const auto& m = named_modules()[named++];
          d.id = m.id;
          d.name = m.name;
          d.category = m.category;
          d.kind = m.kind;
          d.developer_team_ids = m.developers;
        } else {
          ++filler;
          const auto& dev = kTeams[filler % std::size(kTeams)];
          d.id = "module-" + std::to_string(100 + filler);
          d.name = std::string(dev.name) + " module " + std::to_string(filler);
          d.category = cycle[filler % std::size(cycle)];
          d.kind = filler % 5 == 0 ? ModuleKind::Data : ModuleKind::Software;
          d.developer_team_ids = {dev.id};
        }
        d.description = d.name;
        d.artifact_uri = "https://example.org/modules/" + d.id;
        const auto uploader = *d.developer_team_ids.begin();
        event_.upload_module(uploader, d, t);
      }
    }
  }

  void declare(const char* user, const char* module, const char* league, const char* task, const char* milestone,
               Timestamp t, bool verify = true) {
    const auto& d = event_.declare_integration(user, user, module, {league, task, milestone}, t);
    if (verify) event_.verify_integration(kReferee, d.id, t + 2h);
  }

  void pre_event_declarations() {
    auto t = at("2024-11-04T10:00:00Z");
    const auto step = 3h;
    declare("hcr", "tum-task-board-perception", "irl", "task-board", "MS1", t += step);
    declare("tecnalia", "tum-task-board-perception", "irl", "task-board", "MS1", t += step);
    declare("ipa", "table-obj", "irl", "task-board", "MS2", t += step);
    declare("oscar", "table-obj", "irl", "task-board", "MS3", t += step);
    declare("alter-ego", "pinocchio", "srl", "multi-functional-1", "MS7", t += step);
    declare("kit", "happypose", "srl", "multi-functional-1", "MS6", t += step);
    declare("kit", "dlr-kitchen", "srl", "multi-functional-1", "MS3", t += step);
    declare("dlr", "kit-object-dataset", "srl", "multi-functional-1", "MS6", t += step);
    declare("susr", "llm-task-planning", "srl", "multi-functional-1", "MS2", t += step);
    declare("socrob", "3d-object-tracking", "srl", "multi-functional-1", "MS6", t += step);
    declare("rsl", "speech-to-text", "orl", "delivery-1", "MS2", t += step);
    declare("use", "speech-to-text", "orl", "delivery-1", "MS2", t += step);
    declare("rsl", "yolo-ros", "orl", "delivery-1", "MS5", t += step);
    declare("iit", "nancy-digital-twin", "orl", "delivery-1", "MS3", t += step);
  }

  void freeze() { event_.freeze(kCommittee, at(kFreezeAt), at("2024-11-24T18:00:00Z")); }

  void post_event_declarations() {
    declare("tecnalia", "opensot-cartesio", "irl", "task-board", "MS7", at("2024-11-25T10:00:00Z"));
    declare("inria", "blenderproc", "srl", "multi-functional-1", "MS6", at("2024-11-25T11:00:00Z"));
    declare("susr", "kitchens-envs", "srl", "multi-functional-1", "MS3", at("2024-11-25T12:00:00Z"), false);
  }

  void attempt(const char* team, const char* task, const char* level, Timestamp start,
               const std::vector<Outcome>& outcomes) {
    const auto id = event_.open_attempt(kReferee, team, task, level, start).attempt.id;
    auto t = start;
    for (const auto& o : outcomes) {
      t += 30s;
      OutcomeUpdate u;
      u.milestone_id = o.milestone;
      u.success = o.success;
      if (o.success) u.level_id = std::string(o.level);
      if (!o.penalties.empty()) u.penalty_ids = o.penalties;
      event_.record_outcome(kReferee, id, u, t);
      if (o.success) {
        OutcomeUpdate q;
        q.milestone_id = o.milestone;
        q.subjective_score = parse_decimal(o.q);
        event_.record_outcome(kEvaluator, id, q, t + 5s);
      }
    }
    event_.close_attempt(kReferee, id, start + 9min);
  }

  void attempts() {
    auto t = at("2024-11-26T09:00:00Z");
    const auto slot = 15min;
    std::vector<Outcome> perfect;
    for (const char* ms : {"MS1", "MS2", "MS3", "MS4", "MS5", "MS6", "MS7", "MS8", "MS9", "MS10"}) {
      perfect.push_back({ms, "autonomous", "5"});
    }
    attempt("tum-mirmi", "task-board", "board-random", t, perfect);
    attempt("hcr", "task-board", "board-random", t += slot,
            {{"MS1", "teleop-remote", "4"},
             {"MS2", "autonomous", "6"},
             {"MS3", "autonomous", "6"},
             {"MS4", "teleop-line-of-sight", "3", {"collision"}}});
    attempt("tecnalia", "task-board", "board-random", t += slot,
            {{"MS1", "autonomous", "5"}, {"MS2", "", "", {}, false}, {"MS7", "autonomous", "10"}});
    attempt("ipa", "task-board", "board-random", t += slot,
            {{"MS2", "autonomous", "7"}, {"MS3", "custom-handle", "5"}});
    attempt("oscar", "task-board", "board-fixed", t += slot, {{"MS3", "teleop-remote", "2"}});
    attempt("tum-mirmi", "task-board", "board-random", t += slot,
            {{"MS1", "autonomous", "3"},
             {"MS2", "autonomous", "3"},
             {"MS3", "autonomous", "3"},
             {"MS4", "slider-not-perceived", "3"},
             {"MS5", "autonomous", "3"}});

    t = at("2024-11-26T13:00:00Z");
    attempt("alter-ego", "multi-functional-1", "random", t,
            {{"MS1", "autonomous", "5"}, {"MS2", "speech", "6"}, {"MS7", "standard-handle", "6"}});
    attempt("kit", "multi-functional-1", "random", t += slot,
            {{"MS3", "autonomous", "4"}, {"MS6", "occluded-known", "5"}});
    attempt("dlr", "multi-functional-1", "random", t += slot,
            {{"MS1", "autonomous", "7"}, {"MS6", "cluttered-known", "5"}, {"MS10.1", "standard-handle", "4"}});
    attempt("susr", "multi-functional-1", "one-variable", t += slot,
            {{"MS2", "speech", "8"}, {"MS3", "teleop-remote", "3"}});
    attempt("socrob", "multi-functional-1", "random", t += slot,
            {{"MS1", "autonomous", "5"}, {"MS6", "cluttered-unknown", "6", {"artificial-landmarks"}}});
    attempt("inria", "multi-functional-1", "random", t += slot,
            {{"MS1", "autonomous", "5"}, {"MS6", "target-only", "5"}});
    attempt("gepetto", "multi-functional-1", "two-variables", t += slot,
            {{"MS1", "autonomous", "5"}, {"MS10.2", "standard-handle", "7"}});

    t = at("2024-11-27T09:00:00Z");
    attempt("rsl", "delivery-1", "random", t,
            {{"MS1", "autonomous", "5"}, {"MS2", "speech", "6"}, {"MS5", "cluttered", "5"}});
    attempt("use", "delivery-1", "random", t += slot,
            {{"MS1", "autonomous", "8"}, {"MS2", "speech", "5"}, {"MS3", "autonomous", "8"}});
    attempt("iit", "delivery-1", "one-variable", t += slot,
            {{"MS3", "teleop-remote", "4"}, {"MS4", "teleop-line-of-sight", "2", {"collision"}}});
  }

  Event take() { return std::move(event_); }

private:
  Event event_;
};

}  // namespace

std::string team_token(const std::string& team_id) {
  return team_id + "-token";
}

Event build_event() {
  Builder b;
  b.principals();
  b.teams();
  b.uploads();
  b.pre_event_declarations();
  b.freeze();
  b.post_event_declarations();
  b.attempts();
  return b.take();
}

std::vector<LedgerEntry> ledger() {
  return build_event().ledger();
}

}  // namespace coop::demo

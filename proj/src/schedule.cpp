#include "ttw/schedule.hpp"

#include <json.hpp>

#include "ttw/error.hpp"

namespace ttw {

using nlohmann::json;

AppSlice app_slice(const ModeSchedule& sched, const SystemSpec& spec, const AppId& app_id) {
  const auto& app = spec.app(app_id);
  AppSlice s;
  for (const auto& t : app.tasks()) {
    auto it = sched.task_offsets.find(t);
    if (it == sched.task_offsets.end())
      fail_input("schedule of mode '" + sched.mode + "' lacks task '" + t + "'");
    s.task_offsets[t] = it->second;
  }
  for (const auto& m : app.messages()) {
    auto o = sched.msg_offsets.find(m);
    auto d = sched.msg_deadlines.find(m);
    if (o == sched.msg_offsets.end() || d == sched.msg_deadlines.end())
      fail_input("schedule of mode '" + sched.mode + "' lacks message '" + m + "'");
    s.msg_offsets[m] = o->second;
    s.msg_deadlines[m] = d->second;
  }
  return s;
}

std::string to_string(InheritancePolicy p) {
  switch (p) {
    case InheritancePolicy::None: return "none";
    case InheritancePolicy::Minimal: return "minimal";
    case InheritancePolicy::Full: return "full";
  }
  return "minimal";
}

InheritancePolicy parse_policy(const std::string& s) {
  if (s == "none") return InheritancePolicy::None;
  if (s == "minimal") return InheritancePolicy::Minimal;
  if (s == "full") return InheritancePolicy::Full;
  fail_input("unknown inheritance policy '" + s + "'");
}

const ModeSchedule& SystemSchedule::mode(const ModeId& id) const {
  for (const auto& m : modes)
    if (m.mode == id) return m;
  fail_input("schedule has no mode '" + id + "'");
}

bool SystemSchedule::has_mode(const ModeId& id) const {
  for (const auto& m : modes)
    if (m.mode == id) return true;
  return false;
}

namespace {

json mode_to_json(const ModeSchedule& s) {
  json tasks = json::array();
  for (const auto& [id, off] : s.task_offsets) tasks.push_back({{"id", id}, {"offset", off}});
  json msgs = json::array();
  for (const auto& [id, off] : s.msg_offsets)
    msgs.push_back({{"id", id}, {"offset", off}, {"deadline", s.msg_deadlines.at(id)}});
  json rounds = json::array();
  for (const auto& r : s.rounds) rounds.push_back({{"start", r.start}, {"alloc", r.alloc}});
  return {{"mode_id", s.mode},
          {"hyperperiod_ticks", s.hyperperiod},
          {"round_length_ticks", s.round_length},
          {"tasks", tasks},
          {"messages", msgs},
          {"rounds", rounds}};
}

ModeSchedule mode_from_json(const json& j) {
  ModeSchedule s;
  s.mode = j.at("mode_id").get<std::string>();
  s.hyperperiod = j.at("hyperperiod_ticks").get<Ticks>();
  s.round_length = j.value("round_length_ticks", Ticks{0});
  for (const auto& t : j.at("tasks")) s.task_offsets[t.at("id")] = t.at("offset").get<Ticks>();
  for (const auto& m : j.at("messages")) {
    s.msg_offsets[m.at("id")] = m.at("offset").get<Ticks>();
    s.msg_deadlines[m.at("id")] = m.at("deadline").get<Ticks>();
  }
  for (const auto& r : j.at("rounds"))
    s.rounds.push_back({r.at("start").get<Ticks>(), r.at("alloc").get<std::vector<std::string>>()});
  return s;
}

}  // namespace

std::string dump_mode_schedule(const ModeSchedule& s) { return mode_to_json(s).dump(2); }

std::string dump_system_schedule(const SystemSchedule& s) {
  json modes = json::array();
  for (const auto& m : s.modes) modes.push_back(mode_to_json(m));
  json doc = {{"policy", to_string(s.policy)},
              {"spec_hash", s.spec_hash},
              {"tick_us", s.tick_us},
              {"modes", modes}};
  return doc.dump(2);
}

SystemSchedule parse_system_schedule(const std::string& text) {
  SystemSchedule s;
  try {
    const json doc = json::parse(text);
    s.policy = parse_policy(doc.value("policy", std::string("minimal")));
    s.spec_hash = doc.value("spec_hash", std::string());
    s.tick_us = doc.value("tick_us", Ticks{10});
    for (const auto& m : doc.at("modes")) s.modes.push_back(mode_from_json(m));
  } catch (const json::exception& e) {
    fail_input(std::string("malformed schedule document: ") + e.what());
  }
  return s;
}

}  // namespace ttw

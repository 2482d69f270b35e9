#include "ttw/sysmodel.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <numeric>
#include <queue>

#include <json.hpp>

#include "ttw/error.hpp"

namespace ttw {

using nlohmann::json;

std::vector<TaskId> ApplicationSpec::tasks() const {
  std::vector<TaskId> out;
  auto add = [&](const std::optional<TaskId>& t) {
    if (t && std::find(out.begin(), out.end(), *t) == out.end()) out.push_back(*t);
  };
  for (const auto& e : edges) {
    add(e.from_task);
    add(e.to_task);
  }
  return out;
}

std::vector<MessageId> ApplicationSpec::messages() const {
  std::vector<MessageId> out;
  for (const auto& e : edges) {
    if (e.message && std::find(out.begin(), out.end(), *e.message) == out.end())
      out.push_back(*e.message);
  }
  return out;
}

namespace {

template <typename T, typename Id>
const T& find_by_id(const std::vector<T>& items, const Id& id, const char* what) {
  for (const auto& item : items) {
    if (item.id == id) return item;
  }
  fail_input(std::string("dangling reference: unknown ") + what + " '" + id + "'");
}

}  // namespace

const TaskSpec& SystemSpec::task(const TaskId& id) const { return find_by_id(tasks, id, "task"); }
const MessageSpec& SystemSpec::message(const MessageId& id) const {
  return find_by_id(messages, id, "message");
}
const ApplicationSpec& SystemSpec::app(const AppId& id) const {
  return find_by_id(applications, id, "application");
}
const ModeSpec& SystemSpec::mode(const ModeId& id) const { return find_by_id(modes, id, "mode"); }

bool SystemSpec::has_app(const AppId& id) const {
  return std::any_of(applications.begin(), applications.end(),
                     [&](const auto& a) { return a.id == id; });
}

bool SystemSpec::has_mode(const ModeId& id) const {
  return std::any_of(modes.begin(), modes.end(), [&](const auto& m) { return m.id == id; });
}

std::vector<ModeId> SystemSpec::modes_by_priority() const {
  std::vector<const ModeSpec*> sorted;
  for (const auto& m : modes) sorted.push_back(&m);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ModeSpec* a, const ModeSpec* b) { return a->prio < b->prio; });
  std::vector<ModeId> ids;
  for (const auto* m : sorted) ids.push_back(m->id);
  return ids;
}

bool SystemSpec::adjacent(const ModeId& a, const ModeId& b) const {
  return std::any_of(mode_graph.begin(), mode_graph.end(), [&](const ModeEdge& e) {
    return (e.a == a && e.b == b) || (e.a == b && e.b == a);
  });
}

bool SystemSpec::mode_contains(const ModeId& mode_id, const AppId& app_id) const {
  const auto& apps = mode(mode_id).apps;
  return std::find(apps.begin(), apps.end(), app_id) != apps.end();
}

Ticks SystemSpec::task_period(const TaskId& id) const {
  for (const auto& a : applications) {
    for (const auto& t : a.tasks())
      if (t == id) return a.period;
  }
  fail_input("task '" + id + "' belongs to no application");
}

Ticks SystemSpec::message_period(const MessageId& id) const {
  for (const auto& a : applications) {
    for (const auto& m : a.messages())
      if (m == id) return a.period;
  }
  fail_input("message '" + id + "' belongs to no application");
}

Ticks SystemSpec::round_ticks() const {
  return round_length_ticks(platform, network, network.payload_L, network.b_max, tick_us);
}

namespace {

template <typename T>
void check_unique_ids(const std::vector<T>& items, const char* what) {
  std::set<std::string> seen;
  for (const auto& item : items) {
    if (item.id.empty()) fail_input(std::string("malformed document: empty ") + what + " id");
    if (!seen.insert(item.id).second)
      fail_input(std::string("duplicate ") + what + " id '" + item.id + "'");
  }
}

// Task-level graph: edge t1 -> t2 whenever a message edge connects them.
bool has_cycle(const std::map<TaskId, std::set<TaskId>>& succ) {
  std::map<TaskId, int> state;  // 0 new, 1 on stack, 2 done
  std::function<bool(const TaskId&)> visit = [&](const TaskId& t) {
    state[t] = 1;
    auto it = succ.find(t);
    if (it != succ.end()) {
      for (const auto& n : it->second) {
        if (state[n] == 1) return true;
        if (state[n] == 0 && visit(n)) return true;
      }
    }
    state[t] = 2;
    return false;
  };
  for (const auto& [t, _] : succ) {
    if (state[t] == 0 && visit(t)) return true;
  }
  return false;
}

}  // namespace

void SystemSpec::validate() const {
  if (tick_us <= 0) fail_input("tick_us must be > 0");
  platform.validate();
  network.validate();
  check_unique_ids(nodes, "node");
  check_unique_ids(tasks, "task");
  check_unique_ids(messages, "message");
  check_unique_ids(applications, "application");
  check_unique_ids(modes, "mode");

  for (const auto& t : tasks) {
    find_by_id(nodes, t.host, "node");
    if (t.wcet <= 0) fail_input("task '" + t.id + "' must have wcet > 0");
  }
  for (const auto& m : messages) {
    if (m.payload < 0 || m.payload > network.l_max)
      fail_input("message '" + m.id + "' payload exceeds L_max");
  }

  std::map<std::string, Ticks> period_of;  // task and message ids share no namespace clash here
  std::map<TaskId, std::set<TaskId>> global_succ;
  for (const auto& a : applications) {
    if (a.period <= 0) fail_input("application '" + a.id + "' must have period > 0");
    if (a.deadline <= 0) fail_input("application '" + a.id + "' must have deadline > 0");
    if (a.edges.empty()) fail_input("application '" + a.id + "' has an empty graph");
    std::map<TaskId, std::set<TaskId>> succ;
    for (const auto& e : a.edges) {
      if (!e.from_task && !e.to_task) fail_input("malformed document: edge without tasks");
      if (e.message && (!e.from_task || !e.to_task))
        fail_input("malformed document: message edge '" + *e.message + "' needs both tasks");
      if (e.from_task) find_by_id(tasks, *e.from_task, "task");
      if (e.to_task) find_by_id(tasks, *e.to_task, "task");
      if (e.message) find_by_id(messages, *e.message, "message");
      if (e.from_task && e.to_task) {
        succ[*e.from_task].insert(*e.to_task);
        global_succ[*e.from_task].insert(*e.to_task);
      }
    }
    if (has_cycle(succ)) fail_input("cyclic precedence graph in application '" + a.id + "'");

    auto check_period = [&](const std::string& key, const std::string& label) {
      auto [it, inserted] = period_of.emplace(key, a.period);
      if (!inserted && it->second != a.period)
        fail_input("period mismatch: " + label + " shared by applications with different periods");
    };
    for (const auto& t : a.tasks()) {
      check_period("t:" + t, "task '" + t + "'");
      if (task(t).wcet > a.period) fail_input("task '" + t + "' wcet exceeds its period");
    }
    for (const auto& m : a.messages()) check_period("m:" + m, "message '" + m + "'");
  }
  if (has_cycle(global_succ)) fail_input("cyclic precedence graph across applications");

  for (const auto& m : messages) {
    bool used = period_of.count("m:" + m.id) > 0;
    if (used && m.preceding_tasks.empty())
      fail_input("message '" + m.id + "' has no preceding task");
  }

  std::set<int> prios;
  for (const auto& m : modes) {
    if (m.prio < 1) fail_input("mode '" + m.id + "' priority must be >= 1");
    if (!prios.insert(m.prio).second) fail_input("duplicate priority " + std::to_string(m.prio));
    for (const auto& a : m.apps) find_by_id(applications, a, "application");
    std::set<AppId> uniq(m.apps.begin(), m.apps.end());
    if (uniq.size() != m.apps.size()) fail_input("mode '" + m.id + "' lists an application twice");
  }
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (!prios.count(static_cast<int>(i) + 1))
      fail_input("mode priorities must be 1..|modes| without gaps");
  }
  for (const auto& e : mode_graph) {
    find_by_id(modes, e.a, "mode");
    find_by_id(modes, e.b, "mode");
    if (e.a == e.b) fail_input("mode graph self-loop on '" + e.a + "'");
  }
}

namespace {

// Precedence sets are derived from the graphs; explicitly listed ones must
// agree with an actual edge.
void derive_precedence(SystemSpec& spec) {
  std::map<TaskId, std::set<MessageId>> task_prec;
  std::map<MessageId, std::set<TaskId>> msg_prec;
  for (const auto& a : spec.applications) {
    for (const auto& e : a.edges) {
      if (!e.message || !e.from_task || !e.to_task) continue;
      task_prec[*e.to_task].insert(*e.message);
      msg_prec[*e.message].insert(*e.from_task);
    }
  }
  for (auto& t : spec.tasks) {
    for (const auto& m : t.preceding_messages) {
      if (!task_prec[t.id].count(m))
        fail_input("dangling reference: task '" + t.id + "' lists preceding message '" + m +
                   "' with no matching edge");
    }
    t.preceding_messages = task_prec[t.id];
  }
  for (auto& m : spec.messages) {
    for (const auto& t : m.preceding_tasks) {
      if (!msg_prec[m.id].count(t))
        fail_input("dangling reference: message '" + m.id + "' lists preceding task '" + t +
                   "' with no matching edge");
    }
    m.preceding_tasks = msg_prec[m.id];
  }
}

std::optional<std::string> opt_string(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}

void read_platform(const json& j, PlatformConstants& c) {
  auto rd = [&](const char* key, double& field) {
    if (j.contains(key)) field = j.at(key).get<double>();
  };
  rd("t_wakeup_us", c.t_wakeup);
  rd("t_start_us", c.t_start);
  rd("t_gap_us", c.t_gap);
  rd("t_d_us", c.t_d);
  rd("l_cal", c.l_cal);
  rd("l_header", c.l_header);
  rd("r_bit", c.r_bit);
  rd("t_preprocess_us", c.t_preprocess);
  rd("l_beacon", c.l_beacon);
  rd("slot_quantum_us", c.slot_quantum);
}

json write_platform(const PlatformConstants& c) {
  return json{{"t_wakeup_us", c.t_wakeup},   {"t_start_us", c.t_start},
              {"t_gap_us", c.t_gap},         {"t_d_us", c.t_d},
              {"l_cal", c.l_cal},            {"l_header", c.l_header},
              {"r_bit", c.r_bit},            {"t_preprocess_us", c.t_preprocess},
              {"l_beacon", c.l_beacon},      {"slot_quantum_us", c.slot_quantum}};
}

json null_or(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

PlatformConstants parse_platform(const std::string& text) {
  PlatformConstants c;
  try {
    read_platform(json::parse(text), c);
  } catch (const json::exception& e) {
    fail_input(std::string("malformed document: ") + e.what());
  }
  c.validate();
  return c;
}

SystemSpec parse_system_spec(const std::string& text) {
  SystemSpec spec;
  try {
    const json doc = json::parse(text);
    if (!doc.is_object()) fail_input("malformed document: top level must be an object");
    for (const auto& n : doc.at("nodes")) {
      NodeSpec node;
      if (n.is_string()) {
        node.id = n.get<std::string>();
      } else {
        node.id = n.at("id").get<std::string>();
        node.name = n.value("name", node.id);
      }
      if (node.name.empty()) node.name = node.id;
      spec.nodes.push_back(node);
    }
    for (const auto& t : doc.at("tasks")) {
      TaskSpec task;
      task.id = t.at("id").get<std::string>();
      task.host = t.at("host").get<std::string>();
      task.wcet = t.at("wcet_ticks").get<Ticks>();
      if (t.contains("prec")) task.preceding_messages = t.at("prec").get<std::set<std::string>>();
      spec.tasks.push_back(task);
    }
    for (const auto& m : doc.value("messages", json::array())) {
      MessageSpec msg;
      msg.id = m.at("id").get<std::string>();
      if (m.contains("prec")) msg.preceding_tasks = m.at("prec").get<std::set<std::string>>();
      msg.payload = m.value("payload_bytes", 0);
      spec.messages.push_back(msg);
    }
    for (const auto& a : doc.at("applications")) {
      ApplicationSpec app;
      app.id = a.at("id").get<std::string>();
      app.period = a.at("period_ticks").get<Ticks>();
      app.deadline = a.at("deadline_ticks").get<Ticks>();
      app.persistent = a.value("persistent", true);
      for (const auto& e : a.at("edges")) {
        app.edges.push_back({opt_string(e, "from_task"), opt_string(e, "to_task"),
                             opt_string(e, "message")});
      }
      spec.applications.push_back(app);
    }
    for (const auto& m : doc.at("modes")) {
      spec.modes.push_back({m.at("id").get<std::string>(), m.at("prio").get<int>(),
                            m.at("apps").get<std::vector<std::string>>()});
    }
    for (const auto& e : doc.value("mode_graph", json::array())) {
      spec.mode_graph.push_back({e.at("a").get<std::string>(), e.at("b").get<std::string>()});
    }
    if (doc.contains("network")) {
      const auto& n = doc.at("network");
      spec.network.payload_L = n.value("L", spec.network.payload_L);
      spec.network.b_max = n.value("B_max", spec.network.b_max);
      spec.network.n_tx = n.value("N", spec.network.n_tx);
      spec.network.hops = n.value("H", spec.network.hops);
      spec.network.l_max = n.value("L_max", spec.network.l_max);
    }
    if (doc.contains("platform")) read_platform(doc.at("platform"), spec.platform);
    spec.tick_us = doc.value("tick_us", spec.tick_us);
  } catch (const json::exception& e) {
    fail_input(std::string("malformed document: ") + e.what());
  }

  // Dangling references are reported before derived precedence is computed.
  for (const auto& a : spec.applications) {
    for (const auto& e : a.edges) {
      if (e.from_task) spec.task(*e.from_task);
      if (e.to_task) spec.task(*e.to_task);
      if (e.message) spec.message(*e.message);
    }
  }
  for (const auto& t : spec.tasks)
    for (const auto& m : t.preceding_messages) spec.message(m);
  for (const auto& m : spec.messages)
    for (const auto& t : m.preceding_tasks) spec.task(t);
  derive_precedence(spec);
  spec.validate();
  return spec;
}

std::string dump_system_spec(const SystemSpec& spec) {
  json doc;
  doc["tick_us"] = spec.tick_us;
  doc["nodes"] = json::array();
  for (const auto& n : spec.nodes) doc["nodes"].push_back({{"id", n.id}, {"name", n.name}});
  doc["tasks"] = json::array();
  for (const auto& t : spec.tasks) {
    doc["tasks"].push_back(
        {{"id", t.id}, {"host", t.host}, {"wcet_ticks", t.wcet}, {"prec", t.preceding_messages}});
  }
  doc["messages"] = json::array();
  for (const auto& m : spec.messages) {
    doc["messages"].push_back(
        {{"id", m.id}, {"prec", m.preceding_tasks}, {"payload_bytes", m.payload}});
  }
  doc["applications"] = json::array();
  for (const auto& a : spec.applications) {
    json edges = json::array();
    for (const auto& e : a.edges) {
      edges.push_back({{"from_task", null_or(e.from_task)},
                       {"to_task", null_or(e.to_task)},
                       {"message", null_or(e.message)}});
    }
    doc["applications"].push_back({{"id", a.id},
                                   {"period_ticks", a.period},
                                   {"deadline_ticks", a.deadline},
                                   {"persistent", a.persistent},
                                   {"edges", edges}});
  }
  doc["modes"] = json::array();
  for (const auto& m : spec.modes)
    doc["modes"].push_back({{"id", m.id}, {"prio", m.prio}, {"apps", m.apps}});
  doc["mode_graph"] = json::array();
  for (const auto& e : spec.mode_graph) doc["mode_graph"].push_back({{"a", e.a}, {"b", e.b}});
  doc["network"] = {{"L", spec.network.payload_L},
                    {"B_max", spec.network.b_max},
                    {"N", spec.network.n_tx},
                    {"H", spec.network.hops},
                    {"L_max", spec.network.l_max}};
  doc["platform"] = write_platform(spec.platform);
  return doc.dump(2);
}

std::string spec_hash(const SystemSpec& spec) {
  const std::string canonical = json::parse(dump_system_spec(spec)).dump();
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Ticks hyperperiod(const SystemSpec& spec, const ModeId& mode_id) {
  const auto& mode = spec.mode(mode_id);
  if (mode.apps.empty()) fail_input("mode '" + mode_id + "' is empty");
  Ticks l = 1;
  for (const auto& a : mode.apps) {
    const Ticks p = spec.app(a).period;
    l = std::lcm(l, p);
    if (l <= 0 || l > (Ticks{1} << 50)) fail_input("hyperperiod overflow in mode '" + mode_id + "'");
  }
  return l;
}

std::vector<std::vector<ModeId>> schedule_domains(const SystemSpec& spec, const AppId& app) {
  spec.app(app);
  std::vector<ModeId> member;
  for (const auto& m : spec.modes_by_priority()) {
    if (spec.mode_contains(m, app)) member.push_back(m);
  }
  std::set<ModeId> seen;
  std::vector<std::vector<ModeId>> domains;
  for (const auto& start : member) {
    if (seen.count(start)) continue;
    std::vector<ModeId> comp;
    std::queue<ModeId> q;
    q.push(start);
    seen.insert(start);
    while (!q.empty()) {
      ModeId cur = q.front();
      q.pop();
      comp.push_back(cur);
      for (const auto& other : member) {
        if (!seen.count(other) && spec.adjacent(cur, other)) {
          seen.insert(other);
          q.push(other);
        }
      }
    }
    std::sort(comp.begin(), comp.end(), [&](const ModeId& a, const ModeId& b) {
      return spec.mode(a).prio < spec.mode(b).prio;
    });
    domains.push_back(comp);
  }
  return domains;
}

SystemSpec normalize(const SystemSpec& spec) {
  SystemSpec out = spec;
  out.applications.clear();
  std::map<std::pair<ModeId, AppId>, AppId> rename;
  std::set<AppId> taken;
  for (const auto& a : spec.applications) taken.insert(a.id);

  for (const auto& app : spec.applications) {
    std::vector<std::vector<ModeId>> groups;
    if (app.persistent) {
      groups = schedule_domains(spec, app.id);
    } else {
      for (const auto& m : spec.modes_by_priority())
        if (spec.mode_contains(m, app.id)) groups.push_back({m});
    }
    if (groups.size() <= 1) {
      ApplicationSpec copy = app;
      copy.persistent = true;
      out.applications.push_back(copy);
      continue;
    }
    for (const auto& group : groups) {
      const int prio = spec.mode(group.front()).prio;
      ApplicationSpec replica = app;
      replica.id = app.id + "." + std::to_string(prio);
      replica.persistent = true;
      if (taken.count(replica.id)) fail_input("replica id '" + replica.id + "' collides");
      taken.insert(replica.id);
      for (const auto& m : group) rename[{m, app.id}] = replica.id;
      out.applications.push_back(replica);
    }
  }
  for (auto& mode : out.modes) {
    for (auto& a : mode.apps) {
      auto it = rename.find({mode.id, a});
      if (it != rename.end()) a = it->second;
    }
  }
  return out;
}

ModeSets mode_sets(const SystemSpec& spec, const ModeId& mode_id) {
  const auto& target = spec.mode(mode_id);
  ModeSets s;
  for (const auto& m : spec.modes) {
    if (m.prio < target.prio) s.known.insert(m.apps.begin(), m.apps.end());
  }
  const std::set<AppId> here(target.apps.begin(), target.apps.end());
  for (const auto& a : here) (s.known.count(a) ? s.legacy : s.free).insert(a);
  for (const auto& a : s.known)
    if (!here.count(a)) s.virtual_legacy.insert(a);
  return s;
}

std::set<AppId> minimal_virtual_legacy(const SystemSpec& spec, const ModeId& mode_id,
                                       const AppId& app) {
  const ModeSets sets = mode_sets(spec, mode_id);
  if (!sets.free.count(app))
    fail_input("application '" + app + "' is not free in mode '" + mode_id + "'");
  const int prio = spec.mode(mode_id).prio;
  std::set<AppId> out;
  for (const auto& lower : spec.modes) {
    if (lower.prio <= prio) continue;
    const ModeSets ls = mode_sets(spec, lower.id);
    if (!ls.legacy.count(app)) continue;
    for (const auto& x : sets.virtual_legacy)
      if (ls.legacy.count(x)) out.insert(x);
  }
  return out;
}

ModeContent mode_content(const SystemSpec& spec, const ModeId& mode_id) {
  const auto& mode = spec.mode(mode_id);
  ModeContent c;
  c.apps = mode.apps;
  std::set<TaskId> tasks;
  std::set<MessageId> msgs;
  for (const auto& a_id : mode.apps) {
    const auto& app = spec.app(a_id);
    for (const auto& t : app.tasks()) {
      tasks.insert(t);
      auto [it, inserted] = c.task_deadline.emplace(t, app.deadline);
      if (!inserted) it->second = std::min(it->second, app.deadline);
      c.task_prec[t];
    }
    for (const auto& e : app.edges) {
      if (!e.message) continue;
      msgs.insert(*e.message);
      c.task_prec[*e.to_task].insert(*e.message);
      c.message_prec[*e.message].insert(*e.from_task);
      c.message_succ[*e.message].insert(*e.to_task);
    }
  }
  for (const auto& t : spec.tasks)
    if (tasks.count(t.id)) c.tasks.push_back(t.id);
  for (const auto& m : spec.messages)
    if (msgs.count(m.id)) c.messages.push_back(m.id);
  return c;
}

}  // namespace ttw

#include "fixtures.hpp"

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ttw/timeline.hpp"

namespace ttw::testing {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fixture_path(const std::string& name) { return std::string(TTW_FIXTURE_DIR) + "/" + name; }

SystemSpec load_fixture(const std::string& name) { return parse_system_spec(read_file(fixture_path(name))); }

SystemSpec chain_system(Ticks tick_us, const std::vector<ChainApp>& apps, std::vector<ModeDecl> modes,
                        const std::vector<std::pair<std::string, std::string>>& edges, int b_max) {
  std::set<std::string> nodes;
  json tasks = json::array(), msgs = json::array(), japps = json::array();
  for (const auto& a : apps) {
    nodes.insert(a.src_host);
    nodes.insert(a.dst_host);
    const std::string s = a.id + "_src", d = a.id + "_dst", m = a.id + "_m";
    tasks.push_back({{"id", s}, {"host", a.src_host}, {"wcet_ticks", a.wcet}});
    tasks.push_back({{"id", d}, {"host", a.dst_host}, {"wcet_ticks", a.wcet}});
    msgs.push_back({{"id", m}, {"payload_bytes", 16}});
    japps.push_back({{"id", a.id},
                     {"period_ticks", a.period},
                     {"deadline_ticks", a.deadline},
                     {"edges", {{{"from_task", s}, {"to_task", d}, {"message", m}}}}});
  }
  if (modes.empty()) {
    ModeDecl all{"M1", 1, {}};
    for (const auto& a : apps) all.apps.push_back(a.id);
    modes.push_back(all);
  }
  json jmodes = json::array();
  for (const auto& m : modes) jmodes.push_back({{"id", m.id}, {"prio", m.prio}, {"apps", m.apps}});
  json jedges = json::array();
  for (const auto& [a, b] : edges) jedges.push_back({{"a", a}, {"b", b}});
  json doc = {{"tick_us", tick_us},
              {"nodes", std::vector<std::string>(nodes.begin(), nodes.end())},
              {"tasks", tasks},
              {"messages", msgs},
              {"applications", japps},
              {"modes", jmodes},
              {"mode_graph", jedges},
              {"network", {{"L", 16}, {"B_max", b_max}, {"N", 2}, {"H", 4}, {"L_max", 64}}}};
  return parse_system_spec(doc.dump());
}

bool flow_functions_hold(const ModeSchedule& s, const SystemSpec& spec, std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  const auto pa = periodic_assignment(s, spec);
  if (!pa) return fail("no periodic slot assignment");
  const Ticks T = s.round_length;
  for (const auto& [m, r0] : pa->leftover) {
    const MessageTiming mt{s.msg_offsets.at(m), s.msg_deadlines.at(m), spec.message_period(m)};
    std::vector<Ticks> allocs, ends;
    for (const auto& r : s.rounds) {
      Ticks n = 0;
      for (const auto& x : r.alloc) n += x == m;
      allocs.push_back(n);
      ends.push_back(r.start + T);
    }
    for (const auto& r : s.rounds) {
      const Ticks start = r.start, end = r.start + T;
      // Rounds up to and including this one, and strictly before it.
      const Ticks through = service(allocs, ends, r0, end + 1);
      const Ticks before = service(allocs, ends, r0, start + 1);
      if (through > arrival(mt, start))
        return fail(m + ": service ahead of arrival at round " + std::to_string(start));
      if (demand(mt, end) > before)
        return fail(m + ": demand ahead of service at round " + std::to_string(start));
      for (Ticks t : {start, end}) {
        const Ticks sf = service(allocs, ends, r0, t);
        if (demand(mt, t) > sf || sf > arrival(mt, t))
          return fail(m + ": df <= sf <= af broken at " + std::to_string(t));
      }
    }
  }
  return true;
}

}  // namespace ttw::testing

#include "generators.hpp"

#include <algorithm>
#include <json.hpp>

namespace ttw::testing {

using nlohmann::json;

namespace {

int pick(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

template <typename T>
const T& choose(std::mt19937_64& rng, const std::vector<T>& v) {
  return v[static_cast<std::size_t>(pick(rng, 0, static_cast<int>(v.size()) - 1))];
}

struct Doc {
  json tasks = json::array(), msgs = json::array(), apps = json::array();

  void task(const std::string& id, const std::string& host, int wcet) {
    tasks.push_back({{"id", id}, {"host", host}, {"wcet_ticks", wcet}});
  }
  void msg(const std::string& id) { msgs.push_back({{"id", id}, {"payload_bytes", 16}}); }
  void app(const std::string& id, Ticks p, Ticks d, json edges, bool persistent = true) {
    apps.push_back({{"id", id},
                    {"period_ticks", p},
                    {"deadline_ticks", d},
                    {"persistent", persistent},
                    {"edges", std::move(edges)}});
  }
};

json edge(const std::string& from, const std::string& to, const std::string& msg) {
  return {{"from_task", from}, {"to_task", to}, {"message", msg}};
}

json lone(const std::string& t) { return {{"from_task", t}, {"to_task", nullptr}, {"message", nullptr}}; }

}  // namespace

SystemSpec random_micro_instance(std::mt19937_64& rng) {
  const bool wide = pick(rng, 0, 1) == 1;
  const std::vector<Ticks> periods = wide ? std::vector<Ticks>{10, 20, 40} : std::vector<Ticks>{15, 30};
  std::vector<std::string> nodes;
  for (int i = pick(rng, 2, 3); i > 0; --i) nodes.push_back("n" + std::to_string(i));

  Doc doc;
  int tasks_left = 5, msgs_left = 3;
  const int n_apps = pick(rng, 1, 3);
  json mode_apps = json::array();
  for (int a = 0; a < n_apps && tasks_left > 0; ++a) {
    const std::string id = "a" + std::to_string(a);
    const Ticks p = choose(rng, periods);
    const Ticks d = pick(rng, static_cast<int>((p + 1) / 2), static_cast<int>(p));
    auto host = [&] { return choose(rng, nodes); };
    auto wcet = [&] { return pick(rng, 1, 3); };
    // 0 lone, 1 chain, 2 fan-in, 3 multicast, 4 two-hop chain
    int shape = pick(rng, 0, 4);
    if (shape >= 2 && (tasks_left < 3 || msgs_left < (shape == 3 ? 1 : 2))) shape = 1;
    if (shape == 1 && (tasks_left < 2 || msgs_left < 1)) shape = 0;
    json edges = json::array();
    switch (shape) {
      case 0:
        doc.task(id + "_t", host(), wcet());
        edges.push_back(lone(id + "_t"));
        tasks_left -= 1;
        break;
      case 1:
        doc.task(id + "_src", host(), wcet());
        doc.task(id + "_dst", host(), wcet());
        doc.msg(id + "_m");
        edges.push_back(edge(id + "_src", id + "_dst", id + "_m"));
        tasks_left -= 2, msgs_left -= 1;
        break;
      case 2:
        doc.task(id + "_s1", host(), wcet());
        doc.task(id + "_s2", host(), wcet());
        doc.task(id + "_dst", host(), wcet());
        doc.msg(id + "_m1");
        doc.msg(id + "_m2");
        edges.push_back(edge(id + "_s1", id + "_dst", id + "_m1"));
        edges.push_back(edge(id + "_s2", id + "_dst", id + "_m2"));
        tasks_left -= 3, msgs_left -= 2;
        break;
      case 4:
        doc.task(id + "_t1", host(), wcet());
        doc.task(id + "_t2", host(), wcet());
        doc.task(id + "_t3", host(), wcet());
        doc.msg(id + "_m1");
        doc.msg(id + "_m2");
        edges.push_back(edge(id + "_t1", id + "_t2", id + "_m1"));
        edges.push_back(edge(id + "_t2", id + "_t3", id + "_m2"));
        tasks_left -= 3, msgs_left -= 2;
        break;
      default:
        doc.task(id + "_src", host(), wcet());
        doc.task(id + "_d1", host(), wcet());
        doc.task(id + "_d2", host(), wcet());
        doc.msg(id + "_m");
        edges.push_back(edge(id + "_src", id + "_d1", id + "_m"));
        edges.push_back(edge(id + "_src", id + "_d2", id + "_m"));
        tasks_left -= 3, msgs_left -= 1;
        break;
    }
    doc.app(id, p, d, edges);
    mode_apps.push_back(id);
  }
  const int b_max = wide ? 5 : 2;
  json j = {{"tick_us", wide ? 10000 : 5000},
            {"nodes", nodes},
            {"tasks", doc.tasks},
            {"messages", doc.msgs},
            {"applications", doc.apps},
            {"modes", {{{"id", "M1"}, {"prio", 1}, {"apps", mode_apps}}}},
            {"network", {{"L", 16}, {"B_max", b_max}, {"N", 2}, {"H", 4}, {"L_max", 64}}}};
  return parse_system_spec(j.dump());
}

SystemSpec random_multimode_instance(std::mt19937_64& rng) {
  std::vector<std::string> nodes;
  for (int i = pick(rng, 2, 3); i > 0; --i) nodes.push_back("n" + std::to_string(i));
  Doc doc;
  const int n_apps = pick(rng, 3, 6);
  std::vector<std::string> ids;
  for (int a = 0; a < n_apps; ++a) {
    const std::string id = "a" + std::to_string(a + 1);
    ids.push_back(id);
    const Ticks p = pick(rng, 0, 2) == 0 ? 40 : 20;
    const bool persistent = pick(rng, 0, 4) != 0;
    if (pick(rng, 0, 3) == 0) {
      doc.task(id + "_t", choose(rng, nodes), pick(rng, 1, 4));
      doc.app(id, p, p, json::array({lone(id + "_t")}), persistent);
    } else {
      doc.task(id + "_src", choose(rng, nodes), pick(rng, 1, 4));
      doc.task(id + "_dst", choose(rng, nodes), pick(rng, 1, 4));
      doc.msg(id + "_m");
      doc.app(id, p, p, json::array({edge(id + "_src", id + "_dst", id + "_m")}), persistent);
    }
  }
  const int n_modes = pick(rng, 2, 4);
  std::vector<std::vector<std::string>> members(n_modes);
  for (const auto& id : ids) members[pick(rng, 0, n_modes - 1)].push_back(id);
  for (auto& m : members) {
    for (const auto& id : ids)
      if (pick(rng, 0, 2) == 0 && std::find(m.begin(), m.end(), id) == m.end()) m.push_back(id);
    if (m.empty()) m.push_back(choose(rng, ids));
  }
  json modes = json::array(), graph = json::array();
  for (int i = 0; i < n_modes; ++i)
    modes.push_back({{"id", "M" + std::to_string(i + 1)}, {"prio", i + 1}, {"apps", members[i]}});
  // Random spanning tree plus occasional extra edges.
  for (int i = 1; i < n_modes; ++i) {
    const int j = pick(rng, 0, i - 1);
    graph.push_back({{"a", "M" + std::to_string(j + 1)}, {"b", "M" + std::to_string(i + 1)}});
  }
  for (int i = 0; i < n_modes; ++i)
    for (int j = i + 2; j < n_modes; ++j)
      if (pick(rng, 0, 3) == 0)
        graph.push_back({{"a", "M" + std::to_string(i + 1)}, {"b", "M" + std::to_string(j + 1)}});
  json j = {{"tick_us", 10000},
            {"nodes", nodes},
            {"tasks", doc.tasks},
            {"messages", doc.msgs},
            {"applications", doc.apps},
            {"modes", modes},
            {"mode_graph", graph},
            {"network", {{"L", 16}, {"B_max", 5}, {"N", 2}, {"H", 4}, {"L_max", 64}}}};
  return normalize(parse_system_spec(j.dump()));
}

SystemSpec inheritance_scenario(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::string> nodes;
  for (int i = 1; i <= 13; ++i) nodes.push_back("n" + std::to_string(i));
  const std::vector<Ticks> periods{100, 200, 400, 800};
  Doc doc;
  std::vector<std::string> ids;
  for (int a = 1; a <= 15; ++a) {
    const std::string id = "a" + std::to_string(a);
    ids.push_back(id);
    const Ticks p = choose(rng, periods);
    for (int t = 1; t <= 3; ++t) doc.task(id + "_t" + std::to_string(t), choose(rng, nodes), pick(rng, 2, 8));
    doc.msg(id + "_m1");
    doc.msg(id + "_m2");
    doc.app(id, p, p,
            json::array({edge(id + "_t1", id + "_t2", id + "_m1"),
                         edge(id + "_t2", id + "_t3", id + "_m2")}));
  }
  // Every application sits in two adjacent modes of a chain-shaped mode
  // graph with one shortcut, so persistence spans mode changes.
  json modes = json::array();
  std::vector<std::vector<std::string>> members(5);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const int m = static_cast<int>(i % 5);
    members[m].push_back(ids[i]);
    members[(m + 1) % 5].push_back(ids[i]);
  }
  for (int i = 0; i < 5; ++i)
    modes.push_back({{"id", "M" + std::to_string(i + 1)}, {"prio", i + 1}, {"apps", members[i]}});
  json graph = json::array({{{"a", "M1"}, {"b", "M2"}},
                            {{"a", "M2"}, {"b", "M3"}},
                            {{"a", "M3"}, {"b", "M4"}},
                            {{"a", "M4"}, {"b", "M5"}},
                            {{"a", "M5"}, {"b", "M1"}},
                            {{"a", "M1"}, {"b", "M3"}}});
  json j = {{"tick_us", 10000},
            {"nodes", nodes},
            {"tasks", doc.tasks},
            {"messages", doc.msgs},
            {"applications", doc.apps},
            {"modes", modes},
            {"mode_graph", graph},
            {"network", {{"L", 16}, {"B_max", 5}, {"N", 2}, {"H", 4}, {"L_max", 64}}}};
  return normalize(parse_system_spec(j.dump()));
}

}  // namespace ttw::testing

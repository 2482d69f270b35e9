#include "ttw/validator.hpp"

#include <algorithm>
#include <tuple>

#include <json.hpp>

#include "ttw/synth.hpp"
#include "ttw/timeline.hpp"

namespace ttw {

std::string to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::Precedence: return "precedence";
    case ViolationKind::E2eDeadline: return "e2e-deadline";
    case ViolationKind::NodeOverlap: return "node-overlap";
    case ViolationKind::RoundOverlap: return "round-overlap";
    case ViolationKind::Capacity: return "capacity";
    case ViolationKind::Release: return "release";
    case ViolationKind::Deadline: return "deadline";
    case ViolationKind::Persistence: return "persistence";
    case ViolationKind::LegacyConflict: return "legacy-conflict";
    case ViolationKind::Bounds: return "bounds";
  }
  return "bounds";
}

std::size_t ValidationReport::count(ViolationKind k) const {
  return static_cast<std::size_t>(std::count_if(
      violations.begin(), violations.end(), [&](const Violation& v) { return v.kind == k; }));
}

std::string ValidationReport::to_json() const {
  nlohmann::json vs = nlohmann::json::array();
  for (const auto& v : violations) {
    vs.push_back({{"kind", to_string(v.kind)},
                  {"mode", v.mode},
                  {"subjects", v.subjects},
                  {"at", v.at},
                  {"detail", v.detail}});
  }
  return nlohmann::json{{"ok", ok()}, {"violations", vs}}.dump(2);
}

namespace {

class Collector {
 public:
  Collector(ValidationReport& r, ModeId mode) : r_(r), mode_(std::move(mode)) {}

  // Keeps the first witness of each kind.
  void add(ViolationKind k, std::vector<std::string> subjects, Ticks at, std::string detail) {
    for (const auto& v : r_.violations)
      if (v.kind == k && v.mode == mode_) return;
    r_.violations.push_back({k, mode_, std::move(subjects), at, std::move(detail)});
  }

 private:
  ValidationReport& r_;
  ModeId mode_;
};

}  // namespace

ValidationReport validate_mode(const SystemSpec& spec, const ModeId& mode,
                               const ModeSchedule& s) {
  ValidationReport report;
  Collector out(report, mode);
  const ModeContent mc = mode_content(spec, mode);
  const Ticks H = hyperperiod(spec, mode);
  const Ticks T = spec.round_ticks();

  if (s.hyperperiod != H)
    out.add(ViolationKind::Bounds, {mode}, s.hyperperiod,
            "hyperperiod " + std::to_string(s.hyperperiod) + " differs from " + std::to_string(H));
  if (s.round_length != T)
    out.add(ViolationKind::Bounds, {mode}, s.round_length,
            "round length " + std::to_string(s.round_length) + " differs from " +
                std::to_string(T));

  bool complete = true;
  for (const auto& t : mc.tasks) {
    if (!s.task_offsets.count(t)) {
      out.add(ViolationKind::Bounds, {t}, 0, "task has no offset");
      complete = false;
    }
  }
  for (const auto& m : mc.messages) {
    if (!s.msg_offsets.count(m) || !s.msg_deadlines.count(m)) {
      out.add(ViolationKind::Bounds, {m}, 0, "message has no offset or deadline");
      complete = false;
    }
  }
  const std::set<TaskId> known_tasks(mc.tasks.begin(), mc.tasks.end());
  const std::set<MessageId> known_msgs(mc.messages.begin(), mc.messages.end());
  for (const auto& [t, _] : s.task_offsets)
    if (!known_tasks.count(t)) out.add(ViolationKind::Bounds, {t}, 0, "task not in mode");
  for (const auto& [m, _] : s.msg_offsets)
    if (!known_msgs.count(m)) out.add(ViolationKind::Bounds, {m}, 0, "message not in mode");
  if (!complete) return report;

  // F3: offsets within the period, completion before the end-to-end deadline.
  for (const auto& t : mc.tasks) {
    const Ticks o = s.task_offsets.at(t);
    const Ticks p = spec.task_period(t);
    if (o < 0 || o >= p)
      out.add(ViolationKind::Bounds, {t}, o, "task offset outside [0, period)");
    if (o + spec.task(t).wcet > mc.task_deadline.at(t))
      out.add(ViolationKind::E2eDeadline, {t}, o + spec.task(t).wcet,
              "task completes after its application's deadline");
  }
  for (const auto& m : mc.messages) {
    const Ticks o = s.msg_offsets.at(m);
    const Ticks d = s.msg_deadlines.at(m);
    if (o < 0 || o >= spec.message_period(m))
      out.add(ViolationKind::Bounds, {m}, o, "message offset outside [0, period)");
    if (d <= 0) out.add(ViolationKind::Bounds, {m}, d, "message deadline not positive");
  }

  // F1, F2: precedence.
  for (const auto& m : mc.messages) {
    const Ticks om = s.msg_offsets.at(m);
    for (const auto& t : mc.message_prec.at(m)) {
      const Ticks fin = s.task_offsets.at(t) + spec.task(t).wcet;
      if (om < fin)
        out.add(ViolationKind::Precedence, {t, m}, om, "message released before task finishes");
    }
    const Ticks due = om + s.msg_deadlines.at(m);
    for (const auto& t : mc.message_succ.at(m)) {
      if (s.task_offsets.at(t) < due)
        out.add(ViolationKind::Precedence, {m, t}, s.task_offsets.at(t),
                "task starts before message deadline");
    }
  }

  // F4: node overlap, instances unrolled over two hyperperiods.
  {
    std::map<NodeId, std::vector<std::tuple<Ticks, Ticks, TaskId>>> by_node;
    for (const auto& t : mc.tasks) {
      const auto& task = spec.task(t);
      const Ticks p = spec.task_period(t);
      for (Ticks st = s.task_offsets.at(t); st < 2 * H; st += p)
        by_node[task.host].emplace_back(st, st + task.wcet, t);
    }
    for (auto& [node, iv] : by_node) {
      std::sort(iv.begin(), iv.end());
      Ticks reach = 0;
      std::size_t who = 0;
      for (std::size_t i = 0; i < iv.size(); ++i) {
        if (i > 0 && std::get<0>(iv[i]) < reach) {
          out.add(ViolationKind::NodeOverlap, {node, std::get<2>(iv[who]), std::get<2>(iv[i])},
                  std::get<0>(iv[i]), "task executions overlap on a node");
          break;
        }
        if (std::get<1>(iv[i]) > reach) reach = std::get<1>(iv[i]), who = i;
      }
    }
  }

  // F5, F12: rounds ordered, disjoint, inside the hyperperiod.
  for (std::size_t j = 0; j < s.rounds.size(); ++j) {
    const Ticks st = s.rounds[j].start;
    if (st < 0 || st + T > H)
      out.add(ViolationKind::RoundOverlap, {"round " + std::to_string(j + 1)}, st,
              "round not contained in the hyperperiod");
    if (j > 0 && s.rounds[j - 1].start + T > st)
      out.add(ViolationKind::RoundOverlap,
              {"round " + std::to_string(j), "round " + std::to_string(j + 1)}, st,
              "rounds overlap or are out of order");
  }
  // F6, F7: capacity and service count.
  std::map<MessageId, Ticks> served;
  for (std::size_t j = 0; j < s.rounds.size(); ++j) {
    const auto& alloc = s.rounds[j].alloc;
    if (static_cast<int>(alloc.size()) > spec.network.b_max)
      out.add(ViolationKind::Capacity, {"round " + std::to_string(j + 1)}, s.rounds[j].start,
              "round carries more than B_max messages");
    std::set<MessageId> seen;
    for (const auto& m : alloc) {
      if (!known_msgs.count(m)) {
        out.add(ViolationKind::Bounds, {m}, s.rounds[j].start, "allocated message not in mode");
        continue;
      }
      if (!seen.insert(m).second)
        out.add(ViolationKind::Capacity, {m, "round " + std::to_string(j + 1)},
                s.rounds[j].start, "message allocated twice in one round");
      ++served[m];
    }
  }
  for (const auto& m : mc.messages) {
    const Ticks n = H / spec.message_period(m);
    if (served[m] != n)
      out.add(ViolationKind::Capacity, {m}, 0,
              "message served " + std::to_string(served[m]) + " times per hyperperiod, needs " +
                  std::to_string(n));
  }

  // C1, C2 through instance matching.
  if (s.hyperperiod == H && s.round_length == T) {
    bool orderly = true;
    for (const auto& r : s.rounds)
      for (const auto& m : r.alloc) orderly = orderly && known_msgs.count(m);
    if (orderly) {
      const MatchResult mr = edf_match(s, spec, steady_state_horizon(s, spec));
      if (mr.violation) {
        const auto& v = *mr.violation;
        const auto kind =
            v.reason == MatchFailure::TooEarly ? ViolationKind::Release : ViolationKind::Deadline;
        out.add(kind, {v.message, "instance " + std::to_string(v.instance)}, v.due,
                to_string(v.reason) + ": window [" + std::to_string(v.release) + ", " +
                    std::to_string(v.due) + "]");
      }
    }
  }
  return report;
}

ValidationReport validate_system(const SystemSpec& spec, const SystemSchedule& sched) {
  ValidationReport report;
  const auto order = spec.modes_by_priority();
  for (const auto& mode : order) {
    if (!sched.has_mode(mode)) {
      Collector(report, mode).add(ViolationKind::Bounds, {mode}, 0, "mode has no schedule");
      continue;
    }
    auto r = validate_mode(spec, mode, sched.mode(mode));
    report.violations.insert(report.violations.end(), r.violations.begin(), r.violations.end());
  }
  for (const auto& m : sched.modes) {
    if (!spec.has_mode(m.mode))
      Collector(report, m.mode).add(ViolationKind::Bounds, {m.mode}, 0, "unknown mode");
  }
  if (!report.ok()) {
    // Slices of incomplete schedules cannot be compared.
    bool complete = true;
    for (const auto& v : report.violations) complete = complete && v.kind != ViolationKind::Bounds;
    if (!complete) return report;
  }

  // Persistence across mode-graph edges.
  for (const auto& e : spec.mode_graph) {
    const auto& ma = spec.mode(e.a);
    for (const auto& app : ma.apps) {
      if (!spec.app(app).persistent || !spec.mode_contains(e.b, app)) continue;
      const AppSlice sa = app_slice(sched.mode(e.a), spec, app);
      const AppSlice sb = app_slice(sched.mode(e.b), spec, app);
      if (!(sa == sb))
        Collector(report, e.b).add(ViolationKind::Persistence, {app, e.a, e.b}, 0,
                                   "application schedule differs across a mode change");
    }
  }

  // Legacy applications of every mode, each with its first schedule.
  std::map<AppId, ModeId> origin;
  for (const auto& mode : order)
    for (const auto& a : spec.mode(mode).apps) origin.emplace(a, mode);
  for (const auto& mode : order) {
    const ModeSets sets = mode_sets(spec, mode);
    std::vector<std::pair<AppId, AppSlice>> slices;
    for (const auto& a : sets.legacy)
      slices.emplace_back(a, app_slice(sched.mode(origin.at(a)), spec, a));
    if (auto c = find_conflict(slices, spec)) {
      Collector(report, mode).add(ViolationKind::LegacyConflict,
                                  {c->app_a, c->task_a, c->app_b, c->task_b}, c->at,
                                  "legacy applications overlap on a node");
    }
  }
  return report;
}

}  // namespace ttw

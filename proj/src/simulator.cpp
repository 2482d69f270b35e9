#include "ttw/simulator.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "ttw/error.hpp"
#include "ttw/timeline.hpp"
#include "ttw/ttnet_model.hpp"

namespace ttw {

namespace {

using Key = std::pair<std::string, Ticks>;  // (task or message, instance base)

struct Mark {
  ModeId mode;
  bool trigger = false;
};

struct EpochData {
  ModeEpoch span;
  const ModeSchedule* sched = nullptr;
  ModeContent content;
  std::vector<std::size_t> order;  // rounds by start
  std::map<std::pair<MessageId, std::size_t>, Ticks> instance;  // (msg, round) -> q
};

struct Event {
  Ticks t = 0;
  int kind = 0;  // 0 task, 1 round
  std::size_t epoch = 0;
  std::string task;
  Ticks base = 0;
  std::size_t round = 0;
  Ticks cycle = 0;
};

class Sim {
 public:
  Sim(const SystemSpec& spec, const SystemSchedule& sched, const LossModel& loss,
      const SimOptions& opt)
      : spec_(spec), sched_(sched), loss_(loss), opt_(opt), rng_(loss.seed) {
    if (loss.flood_loss_prob < 0 || loss.flood_loss_prob >= 1)
      fail_input("flood loss probability must lie in [0, 1)");
    for (const auto& [n, p] : loss.beacon_loss)
      if (p < 0 || p > 1) fail_input("beacon loss probability of node '" + n + "' outside [0, 1]");
    if (spec.nodes.empty()) fail_input("system has no nodes");
    host_ = opt.host.empty() ? spec.nodes.front().id : opt.host;
    bool known = false;
    for (const auto& n : spec.nodes) known = known || n.id == host_;
    if (!known) fail_input("unknown host node '" + host_ + "'");
    const double L = spec.network.payload_L;
    listen_us_ = round_length(spec.platform, spec.network, L, 0).t_on_total;
    for (const auto& n : spec.nodes) report_.nodes[n.id];
  }

  SimReport run(const ModeChangeScript& script, Ticks duration) {
    const auto modes = spec_.modes_by_priority();
    if (modes.empty()) fail_input("system has no modes");
    const ModeId first = opt_.initial.empty() ? modes.front() : opt_.initial;
    if (!spec_.has_mode(first)) fail_input("unknown initial mode '" + first + "'");
    const ModeSchedule& s0 = mode_schedule(first);
    if (duration < s0.hyperperiod)
      fail_input("duration " + std::to_string(duration) + " is shorter than one hyperperiod (" +
                 std::to_string(s0.hyperperiod) + " ticks) of mode '" + first + "'");
    plan(script, duration, first);
    for (auto& e : epochs_) report_.epochs.push_back(e.span);

    std::vector<Event> events;
    for (std::size_t i = 0; i < epochs_.size(); ++i) unroll(i, duration, events);
    std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
      return std::tie(a.t, a.kind) < std::tie(b.t, b.kind);
    });
    std::size_t next_epoch = 1;
    for (const auto& ev : events) {
      while (next_epoch < epochs_.size() && epochs_[next_epoch].span.begin <= ev.t) {
        const auto& e = epochs_[next_epoch];
        log(e.span.begin, "mode_switch", e.span.mode, "from=" + epochs_[next_epoch - 1].span.mode);
        ++next_epoch;
      }
      if (ev.kind == 0)
        run_task(ev);
      else
        run_round(ev);
    }
    for (; next_epoch < epochs_.size(); ++next_epoch) {
      const auto& e = epochs_[next_epoch];
      log(e.span.begin, "mode_switch", e.span.mode, "from=" + epochs_[next_epoch - 1].span.mode);
    }
    for (const auto& [key, inst] : pending_) ++report_.apps[key.first].aborted;
    return std::move(report_);
  }

 private:
  const ModeSchedule& mode_schedule(const ModeId& m) const {
    if (!sched_.has_mode(m)) fail_input("schedule has no mode '" + m + "'");
    return sched_.mode(m);
  }

  void add_epoch(const ModeId& mode, Ticks begin, Ticks end) {
    EpochData e;
    e.span = {mode, begin, end};
    e.sched = &mode_schedule(mode);
    e.content = mode_content(spec_, mode);
    for (std::size_t j = 0; j < e.sched->rounds.size(); ++j) e.order.push_back(j);
    std::stable_sort(e.order.begin(), e.order.end(), [&](std::size_t a, std::size_t b) {
      return e.sched->rounds[a].start < e.sched->rounds[b].start;
    });
    const auto pa = periodic_assignment(*e.sched, spec_);
    if (!pa) fail_input("schedule of mode '" + mode + "' does not serve its messages in time");
    for (const auto& [m, slots] : pa->slots)
      for (const auto& s : slots) e.instance[{m, s.round}] = s.instance;
    epochs_.push_back(std::move(e));
  }

  void plan(const ModeChangeScript& script, Ticks duration, const ModeId& first) {
    ModeChangeScript reqs = script;
    std::stable_sort(reqs.begin(), reqs.end(),
                     [](const ModeRequest& a, const ModeRequest& b) { return a.at < b.at; });
    ModeId cur = first;
    Ticks origin = 0;
    for (const auto& req : reqs) {
      if (!spec_.has_mode(req.target)) fail_input("unknown target mode '" + req.target + "'");
      if (!spec_.adjacent(cur, req.target))
        fail_input("mode '" + req.target + "' is not adjacent to the active mode '" + cur + "'");
      const ModeSchedule& ms = mode_schedule(cur);
      const Ticks H = ms.hyperperiod;
      const Ticks at = std::max(req.at, origin);
      if (at >= duration) break;
      Ticks boundary;
      std::vector<Ticks> starts;
      for (const auto& r : ms.rounds) starts.push_back(r.start);
      std::sort(starts.begin(), starts.end());
      if (starts.empty()) {
        boundary = origin + ((at - origin) / H + 1) * H;
      } else {
        const Ticks R = static_cast<Ticks>(starts.size());
        Ticks c = (at - origin) / H, j = 0;
        while (j < R && origin + c * H + starts[j] < at) ++j;
        if (j == R) ++c, j = 0;
        const Ticks tc = j < R - 1 ? c : c + 1;
        for (Ticks cc = c, jj = j; cc < tc || (cc == tc && jj <= R - 1);) {
          marks_[origin + cc * H + starts[jj]] = {req.target, cc == tc && jj == R - 1};
          if (++jj == R) jj = 0, ++cc;
        }
        boundary = origin + (tc + 1) * H;
      }
      add_epoch(cur, origin, std::min(boundary, duration));
      cur = req.target;
      origin = boundary;
      if (origin >= duration) return;
    }
    add_epoch(cur, origin, duration);
  }

  void unroll(std::size_t i, Ticks duration, std::vector<Event>& out) const {
    const auto& e = epochs_[i];
    const Ticks H = e.sched->hyperperiod, T = e.sched->round_length;
    for (Ticks c = 0; e.span.begin + c * H < e.span.end; ++c) {
      const Ticks o = e.span.begin + c * H;
      for (std::size_t j : e.order) {
        const Ticks st = o + e.sched->rounds[j].start;
        if (st < e.span.end && st + T <= duration) out.push_back({st, 1, i, {}, 0, j, c});
      }
      for (const auto& t : e.content.tasks) {
        const Ticks p = spec_.task_period(t);
        const Ticks off = e.sched->task_offsets.at(t);
        for (Ticks k = 0; k < H / p; ++k) {
          const Ticks st = o + off + k * p;
          if (st < e.span.end && st + spec_.task(t).wcet <= duration)
            out.push_back({st, 0, i, t, st - off, 0, c});
        }
      }
    }
  }

  bool draw(double p) { return std::bernoulli_distribution(p)(rng_); }

  void log(Ticks t, std::string kind, std::string subject, std::string detail) {
    if (opt_.trace) report_.trace.push_back({t, std::move(kind), std::move(subject), std::move(detail)});
  }

  void run_task(const Event& ev) {
    const auto& e = epochs_[ev.epoch];
    const NodeId& node = spec_.task(ev.task).host;
    bool ok = true;
    auto it = e.content.task_prec.find(ev.task);
    if (it != e.content.task_prec.end())
      for (const auto& m : it->second) {
        auto r = received_.find({m, ev.base});
        ok = ok && r != received_.end() && r->second.count(node);
      }
    executed_[{ev.task, ev.base}] = ok;
    log(ev.t, ok ? "task" : "task_skip", ev.task, "base=" + std::to_string(ev.base));

    for (const auto& app_id : e.content.apps) {
      const auto& app = spec_.app(app_id);
      const auto tasks = app.tasks();
      if (std::find(tasks.begin(), tasks.end(), ev.task) == tasks.end()) continue;
      auto& inst = pending_[{app_id, ev.base}];
      if (!inst.seen.insert(ev.task).second) continue;
      bool sink = true;
      for (const auto& edge : app.edges)
        if (edge.from_task == ev.task && edge.message) sink = false;
      if (sink && !ok) inst.failed = true;
      if (inst.seen.size() == tasks.size()) {
        auto& st = report_.apps[app_id];
        if (inst.failed) {
          ++st.missed;
          log(ev.t, "app_miss", app_id, "base=" + std::to_string(ev.base));
        } else {
          ++st.completed;
        }
        pending_.erase({app_id, ev.base});
      }
    }
  }

  void run_round(const Event& ev) {
    const auto& e = epochs_[ev.epoch];
    const ModeSchedule& ms = *e.sched;
    const Round& round = ms.rounds[ev.round];
    const int idx = static_cast<int>(std::find(e.order.begin(), e.order.end(), ev.round) -
                                     e.order.begin()) + 1;
    RoundRecord rec;
    rec.start = ev.t;
    rec.mode = e.span.mode;
    rec.beacon = {idx, e.span.mode, false};
    if (auto m = marks_.find(ev.t); m != marks_.end()) {
      rec.beacon.mode_id = m->second.mode;
      rec.beacon.trigger = m->second.trigger;
      const bool first = m == marks_.begin() || std::prev(m)->second.trigger;
      if (first) log(ev.t, "announce", m->second.mode, "from=" + e.span.mode);
      if (m->second.trigger) log(ev.t, "trigger", m->second.mode, "from=" + e.span.mode);
    }
    rec.slots = static_cast<int>(round.alloc.size());
    rec.t_on_us = round_length(spec_.platform, spec_.network, spec_.network.payload_L, rec.slots)
                      .t_on_total;
    log(ev.t, "beacon", e.span.mode + "#" + std::to_string(idx),
        "mode=" + rec.beacon.mode_id + ";trigger=" + (rec.beacon.trigger ? "1" : "0") +
            ";slots=" + std::to_string(rec.slots));

    std::set<NodeId> joined;
    for (const auto& n : spec_.nodes) {
      auto& st = report_.nodes[n.id];
      bool got = n.id == host_;
      if (!got) {
        auto b = loss_.beacon_loss.find(n.id);
        got = !draw(b == loss_.beacon_loss.end() ? loss_.flood_loss_prob : b->second);
      }
      if (got) {
        joined.insert(n.id);
        ++st.rounds_joined;
        st.radio_on_us += rec.t_on_us;
      } else {
        ++st.beacons_missed;
        ++st.rounds_skipped;
        st.radio_on_us += listen_us_;
        log(ev.t, "beacon_miss", n.id, e.span.mode + "#" + std::to_string(idx));
      }
    }
    rec.participants = static_cast<int>(joined.size());

    const Ticks origin = e.span.begin + ev.cycle * ms.hyperperiod;
    for (const auto& m : round.alloc) {
      const Ticks q = e.instance.at({m, ev.round});
      const Ticks base = origin + q * spec_.message_period(m);
      const auto& producers = e.content.message_prec.at(m);
      bool ready = true;
      for (const auto& t : producers) {
        auto x = executed_.find({t, base});
        ready = ready && x != executed_.end() && x->second;
      }
      if (!ready) {
        log(ev.t, "slot_idle", m, "base=" + std::to_string(base));
        continue;
      }
      const NodeId sender = spec_.task(*producers.begin()).host;
      auto& got = received_[{m, base}];
      got.insert(sender);
      if (!joined.count(sender)) {
        log(ev.t, "slot_silent", m, "sender=" + sender);
        continue;
      }
      for (const auto& n : joined) {
        if (n == sender) continue;
        if (draw(loss_.flood_loss_prob))
          log(ev.t, "flood_loss", m, "node=" + n);
        else
          got.insert(n);
      }
    }
    report_.rounds.push_back(rec);
  }

  struct Instance {
    std::set<TaskId> seen;
    bool failed = false;
  };

  const SystemSpec& spec_;
  const SystemSchedule& sched_;
  const LossModel& loss_;
  SimOptions opt_;
  std::mt19937_64 rng_;
  NodeId host_;
  double listen_us_ = 0;
  std::vector<EpochData> epochs_;
  std::map<Ticks, Mark> marks_;
  std::map<Key, bool> executed_;
  std::map<Key, std::set<NodeId>> received_;
  std::map<std::pair<AppId, Ticks>, Instance> pending_;
  SimReport report_;
};

}  // namespace

SimReport simulate(const SystemSpec& spec, const SystemSchedule& sched, const LossModel& loss,
                   const ModeChangeScript& script, Ticks duration, const SimOptions& opt) {
  return Sim(spec, sched, loss, opt).run(script, duration);
}

std::string SimReport::to_json() const {
  nlohmann::ordered_json j;
  j["apps"] = nlohmann::ordered_json::object();
  for (const auto& [id, a] : apps)
    j["apps"][id] = {{"completed", a.completed}, {"missed", a.missed}, {"aborted", a.aborted}};
  j["nodes"] = nlohmann::ordered_json::object();
  for (const auto& [id, n] : nodes)
    j["nodes"][id] = {{"radio_on_us", n.radio_on_us},
                      {"beacons_missed", n.beacons_missed},
                      {"rounds_skipped", n.rounds_skipped},
                      {"rounds_joined", n.rounds_joined}};
  j["epochs"] = nlohmann::ordered_json::array();
  for (const auto& e : epochs) j["epochs"].push_back({{"mode", e.mode}, {"begin", e.begin}, {"end", e.end}});
  j["rounds"] = rounds.size();
  return j.dump(2);
}

std::string SimReport::trace_csv() const {
  std::ostringstream out;
  out << "tick,kind,subject,detail\n";
  for (const auto& e : trace) out << e.tick << ',' << e.kind << ',' << e.subject << ',' << e.detail << '\n';
  return out.str();
}

}  // namespace ttw

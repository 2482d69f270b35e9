#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "ttw/synth.hpp"
#include "ttw/timeline.hpp"

namespace ttw {

namespace {

struct Busy {
  Ticks offset, wcet, period;
};

class Greedy {
 public:
  Greedy(const SystemSpec& spec, const ModeId& mode, const InheritanceConstraints& inherit)
      : spec_(spec), mc_(mode_content(spec, mode)), inherit_(inherit) {
    H_ = hyperperiod(spec, mode);
    T_ = spec.round_ticks();
    for (const auto& a : mc_.apps)
      for (const auto& m : spec.app(a).messages()) {
        auto it = cap_.find(m);
        cap_[m] = it == cap_.end() ? spec.app(a).deadline : std::min(it->second, spec.app(a).deadline);
      }
    for (const auto& a : mc_.apps) latest_start(spec.app(a));
    apps_ = mc_.apps;
    std::stable_sort(apps_.begin(), apps_.end(), [&](const AppId& x, const AppId& y) {
      const auto& a = spec.app(x);
      const auto& b = spec.app(y);
      return std::pair(a.period, a.deadline) < std::pair(b.period, b.deadline);
    });
  }

  // With `lazy`, rounds are opened on demand up to `rounds`; otherwise
  // `starts` fixes them.
  std::optional<ModeSchedule> run(const ModeId& mode, const std::vector<Ticks>& starts, bool lazy,
                                  std::size_t rounds, bool late = false) {
    starts_ = starts;
    late_ = late;
    lazy_ = lazy;
    rounds_ = lazy ? rounds : starts.size();
    load_.assign(starts.size(), 0);
    serves_.assign(starts.size(), {});
    task_.clear();
    msg_.clear();
    busy_.clear();

    for (const auto& [app, slice] : inherit_.reserved) {
      const Ticks p = spec_.app(app).period;
      for (const auto& [t, o] : slice.task_offsets) {
        const auto& task = spec_.task(t);
        if (std::find(mc_.tasks.begin(), mc_.tasks.end(), t) != mc_.tasks.end())
          task_[t] = o;
        else
          busy_[task.host].push_back({o, task.wcet, p});
      }
    }
    for (const auto& [app, slice] : inherit_.pinned) {
      for (const auto& [t, o] : slice.task_offsets) task_[t] = o;
      for (const auto& [m, o] : slice.msg_offsets) msg_[m] = {o, slice.msg_deadlines.at(m)};
    }
    for (const auto& [t, o] : task_) occupy(t, o);
    if (!serve_pinned()) return std::nullopt;

    for (const auto& a : apps_) {
      std::vector<TaskId> tasks;
      std::vector<MessageId> msgs;
      for (const auto& t : spec_.app(a).tasks())
        if (!task_.count(t)) tasks.push_back(t);
      for (const auto& m : spec_.app(a).messages())
        if (!msg_.count(m)) msgs.push_back(m);
      while (!tasks.empty() || !msgs.empty()) {
        bool progress = false;
        for (auto it = tasks.begin(); it != tasks.end();) {
          auto ready = ready_time(*it);
          if (!ready) {
            ++it;
            continue;
          }
          if (!place_task(*it, *ready)) return std::nullopt;
          it = tasks.erase(it);
          progress = true;
        }
        for (auto it = msgs.begin(); it != msgs.end();) {
          Ticks release = 0;
          bool ready = true;
          for (const auto& t : mc_.message_prec.at(*it)) {
            auto f = task_.find(t);
            if (f == task_.end()) ready = false;
            else release = std::max(release, f->second + spec_.task(t).wcet);
          }
          if (!ready) {
            ++it;
            continue;
          }
          if (release >= spec_.message_period(*it) || !allocate(*it, release)) return std::nullopt;
          it = msgs.erase(it);
          progress = true;
        }
        if (!progress) return std::nullopt;
      }
    }

    if (!fill()) return std::nullopt;
    std::vector<std::size_t> order(starts_.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return starts_[a] < starts_[b]; });

    ModeSchedule s;
    s.mode = mode;
    s.hyperperiod = H_;
    s.round_length = T_;
    s.task_offsets = task_;
    for (const auto& [m, od] : msg_) {
      s.msg_offsets[m] = od.first;
      s.msg_deadlines[m] = od.second;
    }
    for (std::size_t j : order) {
      Round r;
      r.start = starts_[j];
      for (const auto& m : mc_.messages)
        if (serves_[j].count(m)) r.alloc.push_back(m);
      s.rounds.push_back(std::move(r));
    }
    return s;
  }

 private:
  std::optional<Ticks> ready_time(const TaskId& t) const {
    Ticks ready = 0;
    auto it = mc_.task_prec.find(t);
    if (it == mc_.task_prec.end()) return ready;
    for (const auto& m : it->second) {
      auto f = msg_.find(m);
      if (f == msg_.end()) return std::nullopt;
      ready = std::max(ready, f->second.first + f->second.second);
    }
    return ready;
  }

  bool fits(const TaskId& t, Ticks o) const {
    const auto& task = spec_.task(t);
    const Ticks p = spec_.task_period(t);
    auto it = busy_.find(task.host);
    if (it == busy_.end()) return true;
    for (const auto& b : it->second) {
      const Ticks g = std::gcd(p, b.period);
      const Ticks delta = ((b.offset - o) % g + g) % g;
      if (delta < task.wcet || delta > g - b.wcet) return false;
    }
    return true;
  }

  void occupy(const TaskId& t, Ticks o) {
    const auto& task = spec_.task(t);
    busy_[task.host].push_back({o, task.wcet, spec_.task_period(t)});
  }

  // Latest offset of each task from which its successors can still meet
  // the deadline; every message hop costs at least one round.
  void latest_start(const ApplicationSpec& app) {
    std::map<TaskId, Ticks>& ls = latest_;
    const auto tasks = app.tasks();
    for (std::size_t pass = 0; pass <= tasks.size(); ++pass) {
      for (const auto& t : tasks) {
        const Ticks e = spec_.task(t).wcet;
        Ticks v = std::min(spec_.task_period(t) - 1, mc_.task_deadline.at(t) - e);
        for (const auto& edge : app.edges)
          if (edge.message && edge.from_task == t && ls.count(*edge.to_task))
            v = std::min(v, ls[*edge.to_task] - T_ - e);
        auto it = ls.find(t);
        ls[t] = it == ls.end() ? v : std::min(it->second, v);
      }
    }
  }

  // Latest end of a round serving m released at `offset`.
  Ticks message_due(const MessageId& m, Ticks offset) const {
    Ticks due = offset + cap_.at(m);
    auto it = mc_.message_succ.find(m);
    if (it != mc_.message_succ.end())
      for (const auto& t : it->second) due = std::min(due, latest_.at(t));
    return due - offset;
  }

  bool place_task(const TaskId& t, Ticks ready) {
    const Ticks hi = latest_.at(t);
    for (Ticks o = ready; o <= hi; ++o) {
      if (!fits(t, o)) continue;
      task_[t] = o;
      occupy(t, o);
      return true;
    }
    return false;
  }

  bool free_slot(std::size_t j, const MessageId& m) const {
    return load_[j] < spec_.network.b_max && !serves_[j].count(m);
  }

  bool clear(Ticks s) const {
    if (s < 0 || s + T_ > H_) return false;
    for (Ticks x : starts_)
      if (s < x + T_ && x < s + T_) return false;
    return true;
  }

  std::size_t open(Ticks s) {
    starts_.push_back(s);
    load_.push_back(0);
    serves_.emplace_back();
    return starts_.size() - 1;
  }

  // Pinned windows in order of their latest round start; a window without
  // a usable round gets a new one as late as possible.
  bool serve_pinned() {
    struct Need {
      MessageId m;
      Ticks release, latest;
    };
    std::vector<Need> needs;
    for (const auto& [m, od] : msg_)
      for (Ticks rel = od.first; rel < H_; rel += spec_.message_period(m))
        needs.push_back({m, rel, rel + od.second - T_});
    std::sort(needs.begin(), needs.end(), [](const Need& a, const Need& b) { return a.latest < b.latest; });
    for (const auto& n : needs) {
      std::optional<std::size_t> pick;
      Ticks wait = 0;
      for (std::size_t j = 0; j < starts_.size(); ++j) {
        if (!free_slot(j, n.m)) continue;
        const Ticks w = ((starts_[j] - n.release) % H_ + H_) % H_;
        if (n.release + w > n.latest) continue;
        if (!pick || w < wait) pick = j, wait = w;
      }
      if (!pick && lazy_ && starts_.size() < rounds_) {
        for (Ticks s = n.latest; s >= n.release && !pick; --s)
          if (clear(((s % H_) + H_) % H_)) pick = open(((s % H_) + H_) % H_);
      }
      if (!pick) return false;
      ++load_[*pick];
      serves_[*pick].insert(n.m);
    }
    return true;
  }

  // Serves every instance of m released at `offset` in the first round with
  // a free slot that still lets the successors finish, opening rounds when
  // lazy; the deadline follows from the rounds used.
  bool allocate(const MessageId& m, Ticks offset) {
    const Ticks p = spec_.message_period(m);
    const Ticks allowed = message_due(m, offset);
    if (allowed < T_) return false;
    std::vector<std::size_t> chosen;
    Ticks need = T_;
    for (Ticks rel = offset; rel < H_; rel += p) {
      std::optional<std::size_t> best;
      Ticks wait = 0;
      for (std::size_t j = 0; j < starts_.size(); ++j) {
        if (!free_slot(j, m) || std::find(chosen.begin(), chosen.end(), j) != chosen.end()) continue;
        const Ticks w = ((starts_[j] - rel) % H_ + H_) % H_;
        if (w + T_ > allowed) continue;
        if (!best || w < wait) best = j, wait = w;
      }
      if (!best && lazy_ && starts_.size() < rounds_) {
        const Ticks last = late_ ? allowed - T_ : 0;
        for (Ticks w = 0; w + T_ <= allowed && !best; ++w) {
          const Ticks s = (rel + (late_ ? last - w : w)) % H_;
          if (clear(s)) best = open(s), wait = late_ ? last - w : w;
        }
      }
      if (!best) return false;
      chosen.push_back(*best);
      need = std::max(need, wait + T_);
    }
    for (std::size_t j : chosen) ++load_[j], serves_[j].insert(m);
    msg_[m] = {offset, need};
    return true;
  }

  // Unused rounds go into the first gaps.
  bool fill() {
    for (Ticks s = 0; starts_.size() < rounds_; ++s) {
      if (s + T_ > H_) return false;
      if (clear(s)) open(s);
    }
    return true;
  }

  const SystemSpec& spec_;
  const ModeContent mc_;

 public:
  std::vector<AppId> apps_;

 private:
  const InheritanceConstraints& inherit_;
  Ticks H_ = 0, T_ = 0;
  std::map<MessageId, Ticks> cap_;
  std::map<TaskId, Ticks> latest_;
  bool lazy_ = false, late_ = false;
  std::size_t rounds_ = 0;
  std::vector<Ticks> starts_;
  std::vector<int> load_;
  std::vector<std::set<MessageId>> serves_;
  std::map<TaskId, Ticks> task_;
  std::map<MessageId, std::pair<Ticks, Ticks>> msg_;
  std::map<NodeId, std::vector<Busy>> busy_;
};

}  // namespace

void widen_windows(const SystemSpec& spec, const InheritanceConstraints& inherit, ModeSchedule& s) {
  const ModeContent mc = mode_content(spec, s.mode);
  std::set<TaskId> fixed;
  std::map<NodeId, std::vector<Busy>> others;
  for (const auto* group : {&inherit.pinned, &inherit.reserved})
    for (const auto& [app, slice] : *group)
      for (const auto& [t, o] : slice.task_offsets) {
        fixed.insert(t);
        if (group == &inherit.reserved && !s.task_offsets.count(t))
          others[spec.task(t).host].push_back({o, spec.task(t).wcet, spec.app(app).period});
      }
  auto clear_at = [&](const TaskId& t, Ticks o) {
    const auto& task = spec.task(t);
    const Ticks p = spec.task_period(t);
    auto ok = [&](Ticks off, Ticks e, Ticks q) {
      const Ticks g = std::gcd(p, q);
      const Ticks delta = ((off - o) % g + g) % g;
      return delta >= task.wcet && delta <= g - e;
    };
    for (const auto& [u, ou] : s.task_offsets)
      if (u != t && spec.task(u).host == task.host && !ok(ou, spec.task(u).wcet, spec.task_period(u)))
        return false;
    for (const auto& b : others[task.host])
      if (!ok(b.offset, b.wcet, b.period)) return false;
    return true;
  };
  std::map<MessageId, Ticks> cap;
  for (const auto& a : mc.apps)
    for (const auto& m : spec.app(a).messages())
      cap[m] = cap.count(m) ? std::min(cap[m], spec.app(a).deadline) : spec.app(a).deadline;

  std::set<MessageId> pinned_msgs;
  for (const auto& [app, slice] : inherit.pinned)
    for (const auto& [m, _] : slice.msg_offsets) pinned_msgs.insert(m);

  // Served span of each message relative to its first release: the
  // earliest serving round start and the latest serving round end.
  std::map<MessageId, std::pair<Ticks, Ticks>> span;
  if (const auto pa = periodic_assignment(s, spec)) {
    for (const auto& [m, slots] : pa->slots) {
      const Ticks p = spec.message_period(m);
      Ticks first = std::numeric_limits<Ticks>::max(), last = std::numeric_limits<Ticks>::min();
      for (const auto& sl : slots) {
        const Ticks start = s.rounds[sl.round].start - sl.instance * p;
        first = std::min(first, start);
        last = std::max(last, start + s.round_length);
      }
      if (!slots.empty()) span[m] = {first, last};
    }
  }

  auto move = [&](const TaskId& t, Ticks lo, Ticks hi, Ticks target) {
    for (Ticks step = 0; target - step >= lo || target + step <= hi; ++step)
      for (Ticks o : {target - step, target + step})
        if (o >= lo && o <= hi && clear_at(t, o)) {
          s.task_offsets[t] = o;
          return;
        }
  };
  // Sources move as early and sinks as late as their nodes allow; a task
  // between messages moves to the middle of the room left by the rounds.
  for (const auto& t : mc.tasks) {
    if (fixed.count(t)) continue;
    const auto& task = spec.task(t);
    const Ticks cur = s.task_offsets.at(t);
    const Ticks top = std::min(spec.task_period(t) - 1, mc.task_deadline.at(t) - task.wcet);
    Ticks lo = 0, hi = top;
    bool in = false, out = false, known = true;
    if (mc.task_prec.count(t))
      for (const auto& m : mc.task_prec.at(t)) {
        in = true;
        known = known && span.count(m);
        if (known) lo = std::max(lo, span[m].second);
      }
    for (const auto& [m, prod] : mc.message_prec) {
      if (!prod.count(t)) continue;
      out = true;
      known = known && span.count(m);
      if (known) hi = std::min(hi, span[m].first - task.wcet);
    }
    if (!known || (!in && !out) || lo > cur || hi < cur) continue;
    if (!in)
      move(t, lo, cur, lo);
    else if (!out)
      move(t, cur, hi, hi);
    else
      move(t, lo, hi, lo + (hi - lo) / 2);
  }
  for (const auto& m : mc.messages) {
    if (pinned_msgs.count(m)) continue;
    Ticks o = 0, end = cap.at(m);
    for (const auto& t : mc.message_prec.at(m)) o = std::max(o, s.task_offsets.at(t) + spec.task(t).wcet);
    for (const auto& t : mc.message_succ.at(m)) end = std::min(end, s.task_offsets.at(t));
    s.msg_offsets[m] = o;
    s.msg_deadlines[m] = std::min(end - o, cap.at(m));
  }
}

std::optional<ModeSchedule> list_schedule(const SystemSpec& spec, const ModeId& mode, int rounds,
                                          const InheritanceConstraints& inherit) {
  const Ticks H = hyperperiod(spec, mode);
  const Ticks T = spec.round_ticks();
  if (rounds < 0 || static_cast<Ticks>(rounds) * T > H) return std::nullopt;
  Greedy g(spec, mode, inherit);
  const auto R = static_cast<std::size_t>(rounds);
  // Lazy rounds under a few application orders, then evenly spaced rounds.
  std::mt19937_64 rng(rounds);
  const std::vector<AppId> by_period = g.apps_;
  for (int attempt = 0; attempt < 64; ++attempt) {
    if (attempt > 0) {
      g.apps_ = by_period;
      std::shuffle(g.apps_.begin(), g.apps_.end(), rng);
    }
    for (bool late : {false, true})
      if (auto s = g.run(mode, {}, true, R, late)) return s;
  }
  g.apps_ = by_period;
  const Ticks slack = rounds == 0 ? 0 : H / rounds - T;
  for (Ticks phase = 0; phase <= slack; ++phase) {
    std::vector<Ticks> starts;
    for (int j = 0; j < rounds; ++j) starts.push_back(phase + j * H / rounds);
    if (auto s = g.run(mode, starts, false, R)) return s;
  }
  return std::nullopt;
}

}  // namespace ttw

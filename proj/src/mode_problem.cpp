#include "ttw/mode_problem.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "ttw/error.hpp"
#include "ttw/timeline.hpp"

namespace ttw {

namespace {

struct Item {
  bool is_task;
  std::string id;
};

// Tasks and messages of the mode, application by application, each in
// topological order of its precedence graph.
std::vector<Item> declaration_order(const SystemSpec& spec, const ModeContent& mc) {
  std::vector<Item> out;
  std::set<std::string> done_tasks, done_msgs;
  for (const auto& app_id : mc.apps) {
    const auto& app = spec.app(app_id);
    std::vector<TaskId> tasks;
    for (const auto& t : app.tasks())
      if (!done_tasks.count(t)) tasks.push_back(t);
    std::vector<MessageId> msgs;
    for (const auto& m : app.messages())
      if (!done_msgs.count(m)) msgs.push_back(m);
    std::size_t remaining = tasks.size() + msgs.size();
    while (remaining > 0) {
      bool progress = false;
      for (const auto& t : tasks) {
        if (done_tasks.count(t)) continue;
        bool ready = true;
        auto it = mc.task_prec.find(t);
        if (it != mc.task_prec.end())
          for (const auto& m : it->second) ready = ready && done_msgs.count(m);
        if (!ready) continue;
        done_tasks.insert(t);
        out.push_back({true, t});
        --remaining;
        progress = true;
      }
      for (const auto& m : msgs) {
        if (done_msgs.count(m)) continue;
        bool ready = true;
        auto it = mc.message_prec.find(m);
        if (it != mc.message_prec.end())
          for (const auto& t : it->second) ready = ready && done_tasks.count(t);
        if (!ready) continue;
        done_msgs.insert(m);
        out.push_back({false, m});
        --remaining;
        progress = true;
      }
      if (!progress) fail_input("cyclic precedence graph in application '" + app_id + "'");
    }
  }
  return out;
}

Term term(std::size_t v, Coef a) { return {v, a}; }

}  // namespace

std::map<Ticks, Ticks> rounds_per_block(const SystemSpec& spec, const ModeId& mode) {
  const ModeContent mc = mode_content(spec, mode);
  const Ticks B = spec.network.b_max;
  // An application with a.d <= a.p keeps every instance of its messages,
  // and the rounds serving them, inside [k a.p, (k + 1) a.p). A block needs
  // the longest message chain of each such application and enough slots
  // for every confined instance.
  std::map<MessageId, Ticks> confined;  // message -> period
  std::map<Ticks, Ticks> chain;         // period -> longest message chain
  for (const auto& a_id : mc.apps) {
    const auto& app = spec.app(a_id);
    if (app.deadline > app.period) continue;
    std::map<MessageId, Ticks> depth;
    const auto msgs = app.messages();
    for (const auto& m : msgs) confined[m] = app.period, depth[m] = 1;
    for (std::size_t pass = 0; pass < msgs.size(); ++pass) {
      for (const auto& e1 : app.edges) {
        if (!e1.message) continue;
        for (const auto& e2 : app.edges)
          if (e2.message && e2.from_task == e1.to_task)
            depth[*e2.message] = std::max(depth[*e2.message], depth[*e1.message] + 1);
      }
    }
    Ticks longest = 0;
    for (const auto& [_, d] : depth) longest = std::max(longest, d);
    chain[app.period] = std::max(chain[app.period], longest);
  }
  std::map<Ticks, Ticks> need;
  for (const auto& [P, L] : chain) {
    Ticks count = 0;
    for (const auto& [_, p] : confined)
      if (P % p == 0) count += P / p;
    Ticks n = std::max(L, ceil_div(count, B));
    for (const auto& [p, k] : need)
      if (P % p == 0) n = std::max(n, P / p * k);
    need[P] = n;
  }
  std::erase_if(need, [](const auto& e) { return e.second == 0; });
  return need;
}

ModeProblem build_mode_problem(const SystemSpec& spec, const ModeId& mode, int rounds,
                               const InheritanceConstraints& inherit, bool maximize_deadlines) {
  if (rounds < 0) fail_input("round count must be non-negative");
  const ModeContent mc = mode_content(spec, mode);
  ModeProblem mp;
  mp.mode = mode;
  mp.rounds = rounds;
  mp.hyperperiod = hyperperiod(spec, mode);
  mp.round_length = spec.round_ticks();
  mp.messages = mc.messages;
  const Ticks H = mp.hyperperiod;
  const Ticks T = mp.round_length;
  auto& P = mp.problem;
  auto& ix = mp.index;

  for (const auto& [app, _] : inherit.pinned) {
    if (!spec.mode_contains(mode, app))
      fail_input("pinned application '" + app + "' is not part of mode '" + mode + "'");
    if (inherit.reserved.count(app))
      fail_input("application '" + app + "' is both pinned and reserved");
  }

  std::map<MessageId, Ticks> msg_cap;
  for (const auto& app_id : mc.apps) {
    const auto& app = spec.app(app_id);
    for (const auto& m : app.messages()) {
      auto it = msg_cap.find(m);
      msg_cap[m] = it == msg_cap.end() ? app.deadline : std::min(it->second, app.deadline);
    }
  }
  for (const auto& m : mc.messages) {
    if (spec.message_period(m) < T)
      fail_input("message '" + m + "' has a period shorter than one round (" + std::to_string(T) +
                 " ticks)");
  }

  // Inheritance pins: consistency with precedence and bounds.
  std::map<TaskId, Ticks> pin_task;
  std::map<MessageId, std::pair<Ticks, Ticks>> pin_msg;
  for (const auto& [app_id, slice] : inherit.pinned) {
    const auto& app = spec.app(app_id);
    for (const auto& [t, o] : slice.task_offsets) {
      const Ticks e = spec.task(t).wcet;
      if (o < 0 || o >= app.period || o + e > app.deadline)
        fail_input("inconsistent inheritance pin: task '" + t + "' offset " + std::to_string(o) +
                   " violates its bounds");
      pin_task[t] = o;
    }
    for (const auto& [m, o] : slice.msg_offsets) {
      if (o < 0 || o >= app.period)
        fail_input("inconsistent inheritance pin: message '" + m + "' offset " +
                   std::to_string(o) + " violates its bounds");
      pin_msg[m] = {o, slice.msg_deadlines.at(m)};
    }
  }
  for (const auto& [m, od] : pin_msg) {
    for (const auto& t : mc.message_prec.at(m)) {
      auto it = pin_task.find(t);
      if (it != pin_task.end() && od.first < it->second + spec.task(t).wcet)
        fail_input("inconsistent inheritance pin: message '" + m + "' starts before task '" + t +
                   "' finishes");
    }
    for (const auto& t : mc.message_succ.at(m)) {
      auto it = pin_task.find(t);
      if (it != pin_task.end() && it->second < od.first + od.second)
        fail_input("inconsistent inheritance pin: task '" + t + "' starts before message '" + m +
                   "' is due");
    }
  }

  // Offsets and deadlines, application by application in precedence order.
  for (const auto& item : declaration_order(spec, mc)) {
    if (item.is_task) {
      const auto& t = spec.task(item.id);
      const Ticks p = spec.task_period(t.id);
      const Ticks hi = std::min(p - 1, mc.task_deadline.at(t.id) - t.wcet);
      ix.task_offset[t.id] = P.add_var("o_t_" + t.id, VarKind::Integer, 0, hi);
    } else {
      const Ticks p = spec.message_period(item.id);
      ix.msg_offset[item.id] = P.add_var("o_m_" + item.id, VarKind::Integer, 0, p - 1);
      ix.msg_deadline[item.id] =
          P.add_var("d_m_" + item.id, VarKind::Integer, T, msg_cap.at(item.id), true);
    }
  }

  // F1, F2: precedence.
  for (const auto& m : mc.messages) {
    for (const auto& t : mc.message_prec.at(m)) {
      P.add_constraint("F1_" + m + "_" + t,
                       {term(ix.msg_offset[m], 1), term(ix.task_offset[t], -1)}, Sense::GreaterEq,
                       spec.task(t).wcet);
    }
  }
  for (const auto& t : mc.tasks) {
    auto it = mc.task_prec.find(t);
    if (it == mc.task_prec.end()) continue;
    for (const auto& m : it->second) {
      P.add_constraint("F2_" + t + "_" + m,
                       {term(ix.task_offset[t], 1), term(ix.msg_offset[m], -1),
                        term(ix.msg_deadline[m], -1)},
                       Sense::GreaterEq, 0);
    }
  }

  // F4: non-overlap of tasks sharing a node. Instances of two tasks with
  // periods p1, p2 collide iff (o2 - o1) mod gcd(p1, p2) falls outside
  // [e1, g - e2]; one integer shift variable per pair captures the modulus.
  for (std::size_t a = 0; a < mc.tasks.size(); ++a) {
    for (std::size_t b = a + 1; b < mc.tasks.size(); ++b) {
      const auto& t1 = spec.task(mc.tasks[a]);
      const auto& t2 = spec.task(mc.tasks[b]);
      if (t1.host != t2.host) continue;
      const Ticks p1 = spec.task_period(t1.id), p2 = spec.task_period(t2.id);
      const Ticks g = std::gcd(p1, p2);
      const Ticks klo = ceil_div(t1.wcet - (p2 - 1), g);
      const Ticks khi = floor_div(g - t2.wcet + (p1 - 1), g);
      const auto k = P.add_var("k_" + t1.id + "_" + t2.id, VarKind::Integer, std::min(klo, khi),
                               std::max(klo, khi));
      std::vector<Term> row{term(ix.task_offset[t2.id], 1), term(ix.task_offset[t1.id], -1),
                            term(k, g)};
      P.add_constraint("F4a_" + t1.id + "_" + t2.id, row, Sense::GreaterEq, t1.wcet);
      P.add_constraint("F4b_" + t1.id + "_" + t2.id, row, Sense::LessEq, g - t2.wcet);
    }
  }

  // F13: equality pins.
  for (const auto& [t, o] : pin_task)
    P.add_constraint("F13_t_" + t, {term(ix.task_offset.at(t), 1)}, Sense::Equal, o);
  for (const auto& [m, od] : pin_msg) {
    P.add_constraint("F13_m_" + m, {term(ix.msg_offset.at(m), 1)}, Sense::Equal, od.first);
    P.add_constraint("F13_d_" + m, {term(ix.msg_deadline.at(m), 1)}, Sense::Equal, od.second);
  }

  // F14: reserved tasks of virtual-legacy applications as fixed obstacles
  // for the tasks of free applications.
  for (const auto& [app_id, slice] : inherit.reserved) {
    const Ticks pr = spec.app(app_id).period;
    for (const auto& [rt, c] : slice.task_offsets) {
      const auto& rtask = spec.task(rt);
      for (const auto& t : mc.tasks) {
        const auto& task = spec.task(t);
        if (task.host != rtask.host) continue;
        const std::string tag = t + "_" + app_id + "_" + rt;
        if (t == rt) {
          P.add_constraint("F14_" + tag, {term(ix.task_offset[t], 1)}, Sense::Equal, c);
          continue;
        }
        if (pin_task.count(t)) continue;
        const Ticks p = spec.task_period(t);
        const Ticks g = std::gcd(p, pr);
        const Ticks klo = ceil_div(task.wcet - c, g);
        const Ticks khi = floor_div(g - rtask.wcet - c + p - 1, g);
        const auto k =
            P.add_var("kr_" + tag, VarKind::Integer, std::min(klo, khi), std::max(klo, khi));
        // e_t <= c - o_t + k g <= g - e_r
        std::vector<Term> row{term(ix.task_offset[t], -1), term(k, g)};
        P.add_constraint("F14a_" + tag, row, Sense::GreaterEq, task.wcet - c);
        P.add_constraint("F14b_" + tag, row, Sense::LessEq, g - rtask.wcet - c);
      }
    }
  }

  // Leftover counts, then the rounds with their allocations and counters.
  for (const auto& m : mc.messages) {
    const Ticks n = H / spec.message_period(m);
    ix.leftover[m] = P.add_var("r0_" + m, VarKind::Integer, 0, n);
  }
  // Blocks of rounds_per_block hold at least n rounds each, so the j-th
  // round lies between the blocks filled from either end.
  const auto blocks = rounds_per_block(spec, mode);
  for (int j = 1; j <= rounds; ++j) {
    const std::string js = std::to_string(j);
    Ticks lo = 0, hi = H - T;
    for (const auto& [p, n] : blocks) {
      hi = std::min(hi, ((j - 1) / n + 1) * p - T);
      lo = std::max(lo, (H / p - 1 - (rounds - j) / n) * p);
    }
    ix.round_start.push_back(P.add_var("t_r_" + js, VarKind::Integer, lo, hi, true));
    for (const auto& m : mc.messages)
      ix.alloc[m].push_back(P.add_var("x_" + js + "_" + m, VarKind::Binary, 0, 1, true));
    for (const auto& m : mc.messages) {
      const Ticks p = spec.message_period(m);
      const Ticks n = H / p;
      ix.ka[m].push_back(P.add_var("ka_" + m + "_" + js, VarKind::Integer, 0, n));
      const Ticks kd_lo = ceil_div(T - (p - 1) - msg_cap.at(m), p);
      const Ticks kd_hi = ceil_div(H - T, p);
      ix.kd[m].push_back(
          P.add_var("kd_" + m + "_" + js, VarKind::Integer, std::min(kd_lo, kd_hi), kd_hi));
    }
  }

  // F5: rounds ordered and disjoint.
  for (int j = 1; j < rounds; ++j) {
    P.add_constraint("F5_" + std::to_string(j),
                     {term(ix.round_start[j], 1), term(ix.round_start[j - 1], -1)},
                     Sense::GreaterEq, T);
  }
  // F6: capacity.
  for (int j = 0; j < rounds; ++j) {
    std::vector<Term> row;
    for (const auto& m : mc.messages) row.push_back(term(ix.alloc[m][j], 1));
    if (!row.empty())
      P.add_constraint("F6_" + std::to_string(j + 1), row, Sense::LessEq, spec.network.b_max);
  }
  // F7: every instance served once per hyperperiod.
  for (const auto& m : mc.messages) {
    const Ticks n = H / spec.message_period(m);
    std::vector<Term> row;
    for (int j = 0; j < rounds; ++j) row.push_back(term(ix.alloc[m][j], 1));
    P.add_constraint("F7_" + m, row, Sense::Equal, n);
  }
  // F8-F11: counter linking and the release/deadline conditions.
  for (const auto& m : mc.messages) {
    const Ticks p = spec.message_period(m);
    for (int j = 0; j < rounds; ++j) {
      const std::string tag = m + "_" + std::to_string(j + 1);
      const std::size_t t = ix.round_start[j];
      const std::vector<Term> f8{term(t, 1), term(ix.msg_offset[m], -1), term(ix.ka[m][j], -p)};
      P.add_constraint("F8a_" + tag, f8, Sense::GreaterEq, -p);
      P.add_constraint("F8b_" + tag, f8, Sense::LessEq, -1);
      const std::vector<Term> f9{term(t, 1), term(ix.msg_offset[m], -1),
                                 term(ix.msg_deadline[m], -1), term(ix.kd[m][j], -p)};
      P.add_constraint("F9a_" + tag, f9, Sense::GreaterEq, 1 - T - p);
      P.add_constraint("F9b_" + tag, f9, Sense::LessEq, -T);
      std::vector<Term> f10;
      for (int k = 0; k <= j; ++k) f10.push_back(term(ix.alloc[m][k], 1));
      f10.push_back(term(ix.leftover[m], -1));
      f10.push_back(term(ix.ka[m][j], -1));
      P.add_constraint("F10_" + tag, f10, Sense::LessEq, 0);
      std::vector<Term> f11;
      for (int k = 0; k < j; ++k) f11.push_back(term(ix.alloc[m][k], 1));
      f11.push_back(term(ix.leftover[m], -1));
      f11.push_back(term(ix.kd[m][j], -1));
      P.add_constraint("F11_" + tag, f11, Sense::GreaterEq, 0);
    }
  }

  if (maximize_deadlines) {
    for (const auto& m : mc.messages) P.objective.push_back(term(ix.msg_deadline[m], 1));
  }
  return mp;
}

void hint_schedule(ModeProblem& mp, const ModeSchedule& sched) {
  auto& vars = mp.problem.variables;
  const auto& ix = mp.index;
  for (const auto& [t, i] : ix.task_offset) vars[i].hint = sched.task_offsets.at(t);
  for (const auto& [m, i] : ix.msg_offset) vars[i].hint = sched.msg_offsets.at(m);
  for (const auto& [m, i] : ix.msg_deadline) vars[i].hint = sched.msg_deadlines.at(m);
  if (sched.rounds.size() != ix.round_start.size()) return;
  for (std::size_t j = 0; j < sched.rounds.size(); ++j) {
    vars[ix.round_start[j]].hint = sched.rounds[j].start;
    for (const auto& [m, x] : ix.alloc) {
      const auto& a = sched.rounds[j].alloc;
      vars[x[j]].hint = std::find(a.begin(), a.end(), m) != a.end() ? 1 : 0;
    }
  }
  // Instances served before their release in this hyperperiod come from
  // the previous one.
  for (const auto& [m, i] : ix.leftover) {
    const Ticks o = sched.msg_offsets.at(m);
    const Ticks p = floor_div(mp.hyperperiod, static_cast<Ticks>(vars[i].upper));
    Coef served = 0, carry = 0;
    for (std::size_t j = 0; j < sched.rounds.size(); ++j) {
      const auto& a = sched.rounds[j].alloc;
      served += std::find(a.begin(), a.end(), m) != a.end();
      const Ticks t = sched.rounds[j].start;
      const Coef released = t >= o ? floor_div(t - o, p) + 1 : 0;
      carry = std::max(carry, served - released);
    }
    vars[i].hint = carry;
  }
}

ModeSchedule decode_mode_schedule(const ModeProblem& mp, const std::vector<Coef>& v) {
  if (v.size() != mp.problem.variables.size())
    fail_input("assignment does not match the problem's variables");
  ModeSchedule s;
  s.mode = mp.mode;
  s.hyperperiod = mp.hyperperiod;
  s.round_length = mp.round_length;
  for (const auto& [t, i] : mp.index.task_offset) s.task_offsets[t] = v[i];
  for (const auto& [m, i] : mp.index.msg_offset) s.msg_offsets[m] = v[i];
  for (const auto& [m, i] : mp.index.msg_deadline) s.msg_deadlines[m] = v[i];
  for (int j = 0; j < mp.rounds; ++j) {
    Round r;
    r.start = v[mp.index.round_start[j]];
    for (const auto& m : mp.messages)
      if (v[mp.index.alloc.at(m)[j]] == 1) r.alloc.push_back(m);
    s.rounds.push_back(std::move(r));
  }
  return s;
}

}  // namespace ttw

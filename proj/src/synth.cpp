#include "ttw/synth.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>

#include "ttw/error.hpp"
#include "ttw/mode_problem.hpp"
#include "ttw/timeline.hpp"

namespace ttw {

namespace {

struct Window {
  Ticks release, latest;  // a round must start in [release, latest]
};

struct Fixed {
  NodeId host;
  Ticks offset, wcet, period;
};

// Fewest rounds of capacity B stabbing every window, ignoring the spacing
// between rounds: each round goes to the smallest uncovered latest start and
// takes the B windows around it that expire first.
Ticks stab(std::vector<Window> w, Ticks B) {
  std::sort(w.begin(), w.end(), [](const Window& a, const Window& b) { return a.latest < b.latest; });
  std::vector<bool> done(w.size(), false);
  Ticks rounds = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (done[i]) continue;
    ++rounds;
    const Ticks s = w[i].latest;
    Ticks load = 0;
    for (std::size_t j = i; j < w.size() && load < B; ++j)
      if (!done[j] && w[j].release <= s) done[j] = true, ++load;
  }
  return rounds;
}

bool clear_of(const std::vector<Fixed>& fixed, const NodeId& host, Ticks o, Ticks e, Ticks p) {
  for (const auto& f : fixed) {
    if (f.host != host) continue;
    const Ticks g = std::gcd(p, f.period);
    const Ticks delta = ((f.offset - o) % g + g) % g;
    if (delta < e || delta > g - f.wcet) return false;
  }
  return true;
}

// Every window of an application with a.d <= a.p lies inside one block of
// length P = a.p, and an unpinned application repeats the same offsets in
// every block. For each such application alone, together with the pinned
// windows, enumerate the offsets of its inner tasks (sources as early and
// sinks as late as the fixed tasks allow only widen windows) and count the
// rounds each block needs.
Ticks block_bound(const SystemSpec& spec, const ModeId& mode, const ModeContent& mc,
                  const InheritanceConstraints& inherit, Ticks P) {
  const Ticks H = hyperperiod(spec, mode);
  const Ticks T = spec.round_ticks();
  const Ticks B = spec.network.b_max;
  const Ticks K = H / P;

  std::vector<Fixed> fixed;
  std::set<TaskId> fixed_tasks;
  std::vector<std::vector<Window>> pinned(K);
  auto add_fixed = [&](const std::map<AppId, AppSlice>& slices) {
    for (const auto& [app_id, slice] : slices) {
      const Ticks p = spec.app(app_id).period;
      for (const auto& [t, o] : slice.task_offsets) {
        fixed.push_back({spec.task(t).host, o, spec.task(t).wcet, p});
        fixed_tasks.insert(t);
      }
    }
  };
  add_fixed(inherit.pinned);
  add_fixed(inherit.reserved);
  for (const auto& [app_id, slice] : inherit.pinned) {
    const auto& app = spec.app(app_id);
    if (app.deadline > app.period) continue;
    for (const auto& [m, o] : slice.msg_offsets) {
      const Ticks d = slice.msg_deadlines.at(m);
      for (Ticks r = o; r < H; r += app.period) {
        const Ticks k = r / P;
        if (r + d <= (k + 1) * P) pinned[k].push_back({r - k * P, r + d - T - k * P});
      }
    }
  }

  auto total = [&](const std::vector<Window>& own) {
    Ticks sum = 0;
    for (Ticks k = 0; k < K; ++k) {
      std::vector<Window> w = pinned[k];
      w.insert(w.end(), own.begin(), own.end());
      sum += stab(std::move(w), B);
    }
    return sum;
  };
  Ticks best = total({});

  std::map<TaskId, int> uses;
  for (const auto& a : mc.apps)
    for (const auto& t : spec.app(a).tasks()) ++uses[t];
  for (const auto& a_id : mc.apps) {
    const auto& app = spec.app(a_id);
    if (app.period != P || app.deadline > P || inherit.pinned.count(a_id)) continue;
    const auto tasks = app.tasks();
    const auto msgs = app.messages();
    if (msgs.empty()) continue;
    bool shared = false;
    for (const auto& t : tasks) shared = shared || uses[t] > 1 || fixed_tasks.count(t);
    if (shared) continue;

    std::map<MessageId, std::vector<TaskId>> prod, cons;
    std::set<TaskId> has_in, has_out;
    for (const auto& e : app.edges) {
      if (!e.message) continue;
      prod[*e.message].push_back(*e.from_task);
      cons[*e.message].push_back(*e.to_task);
      has_out.insert(*e.from_task);
      has_in.insert(*e.to_task);
    }
    std::map<TaskId, Ticks> off;
    std::vector<TaskId> inner;
    std::vector<std::vector<Ticks>> choices;
    bool stuck = false;
    for (const auto& t : tasks) {
      const auto& task = spec.task(t);
      const Ticks hi = std::min(P - 1, app.deadline - task.wcet);
      std::vector<Ticks> ok;
      for (Ticks o = 0; o <= hi; ++o)
        if (clear_of(fixed, task.host, o, task.wcet, P)) ok.push_back(o);
      if (ok.empty()) {
        stuck = true;
        break;
      }
      if (!has_in.count(t))
        off[t] = ok.front();
      else if (!has_out.count(t))
        off[t] = ok.back();
      else
        inner.push_back(t), choices.push_back(std::move(ok));
    }
    if (stuck) return std::numeric_limits<Ticks>::max();
    double combos = 1;
    for (const auto& c : choices) combos *= static_cast<double>(c.size());
    if (combos > 2e5) continue;

    Ticks least = std::numeric_limits<Ticks>::max();
    std::vector<std::size_t> pick(inner.size(), 0);
    while (true) {
      for (std::size_t i = 0; i < inner.size(); ++i) off[inner[i]] = choices[i][pick[i]];
      std::vector<Window> own;
      bool valid = true;
      for (const auto& m : msgs) {
        Ticks r = 0, end = P;
        for (const auto& t : prod[m]) r = std::max(r, off[t] + spec.task(t).wcet);
        for (const auto& t : cons[m]) end = std::min(end, off[t]);
        if (r >= P || end - r < T) valid = false;
        own.push_back({r, end - T});
      }
      if (valid) least = std::min(least, total(own));
      std::size_t i = 0;
      while (i < pick.size() && ++pick[i] == choices[i].size()) pick[i++] = 0;
      if (i == pick.size()) break;
    }
    best = std::max(best, least);
  }
  return best;
}

}  // namespace

int round_count_lower_bound(const SystemSpec& spec, const ModeId& mode,
                            const InheritanceConstraints& inherit) {
  const ModeContent mc = mode_content(spec, mode);
  const Ticks H = hyperperiod(spec, mode);
  const Ticks B = spec.network.b_max;
  Ticks best = 0, total = 0;
  for (const auto& m : mc.messages) {
    const Ticks n = H / spec.message_period(m);
    best = std::max(best, n);
    total += n;
  }
  best = std::max(best, ceil_div(total, B));
  for (const auto& [P, n] : rounds_per_block(spec, mode)) {
    best = std::max(best, H / P * n);
    best = std::max(best, block_bound(spec, mode, mc, inherit, P));
  }
  const Ticks r_max = H / spec.round_ticks();
  return static_cast<int>(std::min(best, r_max + 1));
}

ModeSynthesis synthesize_mode(const SystemSpec& spec, const ModeId& mode,
                              const InheritanceConstraints& inherit, const SynthOptions& opt) {
  const Ticks H = hyperperiod(spec, mode);
  const Ticks T = spec.round_ticks();
  const int r_max = static_cast<int>(H / T);
  ModeSynthesis out;
  for (int r = round_count_lower_bound(spec, mode, inherit); r <= r_max; ++r) {
    ModeProblem mp = build_mode_problem(spec, mode, r, inherit, false);
    if (auto guess = list_schedule(spec, mode, r, inherit)) hint_schedule(mp, *guess);
    MilpSolution sol = solve(mp.problem, opt.budget);
    out.nodes += sol.nodes;
    out.seconds += sol.seconds;
    if (sol.status == SolveStatus::Unknown)
      throw Error(ErrorKind::BudgetExhausted, "solver budget exhausted in mode '" + mode +
                                                  "' at " + std::to_string(r) + " rounds");
    if (sol.status == SolveStatus::Infeasible) continue;

    out.rounds = r;
    out.schedule = decode_mode_schedule(mp, sol.values);
    if (opt.maximize_deadlines && !mp.messages.empty()) {
      ModeProblem op = build_mode_problem(spec, mode, r, inherit, true);
      ModeSchedule wide = out.schedule;
      widen_windows(spec, inherit, wide);
      hint_schedule(op, wide);
      MilpSolution best = solve(op.problem, opt.objective_budget);
      out.nodes += best.nodes;
      out.seconds += best.seconds;
      out.objective_proven = best.status == SolveStatus::Feasible;
      if (best.has_assignment()) out.schedule = decode_mode_schedule(op, best.values);
    }
    return out;
  }
  throw Error(ErrorKind::Infeasible, "Problem infeasible: no schedule for mode '" + mode +
                                         "' with up to " + std::to_string(r_max) + " rounds");
}

InheritanceConstraints inheritance_for(const SystemSpec& spec, const ModeId& mode,
                                       InheritancePolicy policy,
                                       const std::map<AppId, AppSlice>& fixed) {
  InheritanceConstraints ic;
  if (policy == InheritancePolicy::None) return ic;
  const ModeSets sets = mode_sets(spec, mode);
  auto slice_of = [&](const AppId& a) -> const AppSlice& {
    auto it = fixed.find(a);
    if (it == fixed.end())
      fail_input("application '" + a + "' has no schedule from a higher-priority mode");
    return it->second;
  };
  for (const auto& a : sets.legacy) ic.pinned[a] = slice_of(a);
  if (policy == InheritancePolicy::Full) {
    for (const auto& a : sets.virtual_legacy) ic.reserved[a] = slice_of(a);
  } else {
    for (const auto& f : sets.free)
      for (const auto& a : minimal_virtual_legacy(spec, mode, f)) ic.reserved[a] = slice_of(a);
  }
  return ic;
}

SystemSynthesis synthesize_system(const SystemSpec& spec, InheritancePolicy policy,
                                  const SynthOptions& opt) {
  SystemSynthesis out;
  out.schedule.policy = policy;
  out.schedule.spec_hash = spec_hash(spec);
  out.schedule.tick_us = spec.tick_us;
  std::map<AppId, AppSlice> fixed;
  for (const auto& mode : spec.modes_by_priority()) {
    InheritanceConstraints ic = inheritance_for(spec, mode, policy, fixed);
    ModeSynthesis ms = synthesize_mode(spec, mode, ic, opt);
    for (const auto& a : spec.mode(mode).apps)
      if (!fixed.count(a)) fixed[a] = app_slice(ms.schedule, spec, a);
    out.schedule.modes.push_back(ms.schedule);
    out.inheritance[mode] = std::move(ic);
    out.modes.push_back(std::move(ms));
  }
  return out;
}

std::optional<Conflict> find_conflict(const std::vector<std::pair<AppId, AppSlice>>& slices,
                                      const SystemSpec& spec) {
  for (std::size_t a = 0; a < slices.size(); ++a) {
    for (std::size_t b = a + 1; b < slices.size(); ++b) {
      const auto& [app_a, sa] = slices[a];
      const auto& [app_b, sb] = slices[b];
      if (app_a == app_b) continue;
      const Ticks pa = spec.app(app_a).period, pb = spec.app(app_b).period;
      const Ticks span = 2 * std::lcm(pa, pb);
      for (const auto& [ta, oa] : sa.task_offsets) {
        const auto& task_a = spec.task(ta);
        for (const auto& [tb, ob] : sb.task_offsets) {
          const auto& task_b = spec.task(tb);
          if (task_a.host != task_b.host) continue;
          if (ta == tb && oa == ob) continue;
          for (Ticks sa0 = oa; sa0 < span; sa0 += pa) {
            const Ticks ea = sa0 + task_a.wcet;
            // Instances of b that may intersect [sa0, ea).
            Ticks first = ob + floor_div(sa0 - task_b.wcet - ob, pb) * pb;
            for (Ticks sb0 = first; sb0 < ea; sb0 += pb) {
              const Ticks eb = sb0 + task_b.wcet;
              if (sb0 < ea && sa0 < eb && sb0 >= 0 && sb0 < span)
                return Conflict{app_a, ta, app_b, tb, std::max(sa0, sb0)};
            }
          }
        }
      }
    }
  }
  return std::nullopt;
}

}  // namespace ttw

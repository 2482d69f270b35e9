#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ttw/milp.hpp"
#include "ttw/schedule.hpp"
#include "ttw/sysmodel.hpp"

namespace ttw {

struct SynthOptions {
  SolveBudget budget{2'000'000, 60.0};  // per feasibility solve
  bool maximize_deadlines = true;
  SolveBudget objective_budget{200'000, 10.0};
};

struct ModeSynthesis {
  ModeSchedule schedule;
  int rounds = 0;
  std::uint64_t nodes = 0;
  double seconds = 0;
  /// False when the deadline objective was cut short by the budget; the
  /// schedule is still feasible with the minimal round count.
  bool objective_proven = true;
};

/// Round count below which `mode` has no schedule, from slot counts, message
/// chains and, per block of an application period, the windows of pinned
/// applications combined with each unpinned application of that period.
/// Exceeds floor(hyperperiod / round length) when no count can work.
int round_count_lower_bound(const SystemSpec& spec, const ModeId& mode,
                            const InheritanceConstraints& inherit = {});

/// Greedy schedule with `rounds` evenly spaced rounds: applications by
/// increasing period, every task as early as its node allows and every
/// message instance in the next round with a free slot. Only the phase of
/// the rounds is searched; nullopt does not mean infeasible.
std::optional<ModeSchedule> list_schedule(const SystemSpec& spec, const ModeId& mode, int rounds,
                                          const InheritanceConstraints& inherit);

/// Moves source tasks earlier and sink tasks later where their nodes allow
/// and stretches every message deadline to its first consumer. Rounds and
/// allocations are kept; window starts only move earlier.
void widen_windows(const SystemSpec& spec, const InheritanceConstraints& inherit,
                   ModeSchedule& sched);

/// Tries R = 0, 1, ... up to floor(hyperperiod / round length) and returns
/// the first feasible schedule. Throws Error(Infeasible) when none exists
/// and Error(BudgetExhausted) when the solver gives up.
ModeSynthesis synthesize_mode(const SystemSpec& spec, const ModeId& mode,
                              const InheritanceConstraints& inherit, const SynthOptions& opt = {});

/// Constraints applied to `mode` given the already fixed schedules of all
/// applications of higher-priority modes.
InheritanceConstraints inheritance_for(const SystemSpec& spec, const ModeId& mode,
                                       InheritancePolicy policy,
                                       const std::map<AppId, AppSlice>& fixed);

struct SystemSynthesis {
  SystemSchedule schedule;
  std::vector<ModeSynthesis> modes;  // in synthesis (priority) order
  std::map<ModeId, InheritanceConstraints> inheritance;
};

/// Schedules the modes of a normalized spec in priority order. Throws
/// Error(Infeasible) naming the first mode without a schedule.
SystemSynthesis synthesize_system(const SystemSpec& spec, InheritancePolicy policy,
                                  const SynthOptions& opt = {});

struct Conflict {
  AppId app_a;
  TaskId task_a;
  AppId app_b;
  TaskId task_b;
  Ticks at = 0;  // start of the overlap
};

/// First pair of tasks of different applications on one node whose
/// executions overlap, checked over two least common multiples of the two
/// periods.
std::optional<Conflict> find_conflict(const std::vector<std::pair<AppId, AppSlice>>& slices,
                                      const SystemSpec& spec);

inline bool conflict_free(const std::vector<std::pair<AppId, AppSlice>>& slices,
                          const SystemSpec& spec) {
  return !find_conflict(slices, spec).has_value();
}

}  // namespace ttw

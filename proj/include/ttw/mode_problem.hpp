#pragma once

#include <map>
#include <vector>

#include "ttw/milp.hpp"
#include "ttw/schedule.hpp"
#include "ttw/sysmodel.hpp"

namespace ttw {

/// Positions of the semantic variables of a mode problem.
struct VarIndex {
  std::map<TaskId, std::size_t> task_offset;
  std::map<MessageId, std::size_t> msg_offset;
  std::map<MessageId, std::size_t> msg_deadline;
  std::map<MessageId, std::size_t> leftover;
  std::vector<std::size_t> round_start;
  std::map<MessageId, std::vector<std::size_t>> alloc;  // per round
  std::map<MessageId, std::vector<std::size_t>> ka;     // per round
  std::map<MessageId, std::vector<std::size_t>> kd;     // per round
};

struct ModeProblem {
  MilpProblem problem;
  VarIndex index;
  ModeId mode;
  int rounds = 0;
  Ticks hyperperiod = 0;
  Ticks round_length = 0;
  std::vector<MessageId> messages;
};

/// Rounds that every block [k P, (k + 1) P) of the hyperperiod must contain,
/// keyed by P, for the periods of applications whose deadline does not
/// exceed their period.
std::map<Ticks, Ticks> rounds_per_block(const SystemSpec& spec, const ModeId& mode);

/// Builds the scheduling problem of `mode` with exactly `rounds` rounds.
/// Throws InvalidInput for pins that contradict precedence or bounds and for
/// message periods shorter than a round.
ModeProblem build_mode_problem(const SystemSpec& spec, const ModeId& mode, int rounds,
                               const InheritanceConstraints& inherit, bool maximize_deadlines);

/// Uses `sched` as the solver's first guess for offsets, deadlines, rounds,
/// allocations and leftover counts.
void hint_schedule(ModeProblem& mp, const ModeSchedule& sched);

ModeSchedule decode_mode_schedule(const ModeProblem& mp, const std::vector<Coef>& values);

}  // namespace ttw

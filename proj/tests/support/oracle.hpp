#pragma once

#include <optional>

#include "ttw/schedule.hpp"
#include "ttw/sysmodel.hpp"

namespace ttw::testing {

/// Exhaustive tick-grid search for a valid schedule of `mode` with exactly
/// `rounds` rounds. Shares no code with the MILP encoding or the validator:
/// task offsets are enumerated, every message takes its widest window
/// between its producers and consumers, round starts are enumerated, and
/// slots are matched to instances of one periodic hyperperiod by
/// backtracking. Every message needs at least one consumer task. Pinned
/// applications keep their offsets and windows; reserved tasks block the
/// nodes of the other tasks, checked instance by instance.
std::optional<ModeSchedule> oracle_schedule(const SystemSpec& spec, const ModeId& mode,
                                            int rounds, const InheritanceConstraints& inherit = {});

/// Smallest feasible round count up to floor(H / T), or -1.
int oracle_min_rounds(const SystemSpec& spec, const ModeId& mode,
                      const InheritanceConstraints& inherit = {});

}  // namespace ttw::testing

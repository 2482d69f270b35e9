#pragma once

#include <string>
#include <vector>

#include "ttw/schedule.hpp"
#include "ttw/sysmodel.hpp"

namespace ttw {

enum class ViolationKind {
  Precedence,
  E2eDeadline,
  NodeOverlap,
  RoundOverlap,
  Capacity,
  Release,
  Deadline,
  Persistence,
  LegacyConflict,
  Bounds,  // missing or out-of-range entries
};

std::string to_string(ViolationKind k);

struct Violation {
  ViolationKind kind;
  ModeId mode;
  std::vector<std::string> subjects;
  Ticks at = 0;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::size_t count(ViolationKind k) const;
  std::string to_json() const;
};

/// Checks one mode schedule against the spec directly on the concrete
/// values; release and deadline conditions go through `edf_match`.
ValidationReport validate_mode(const SystemSpec& spec, const ModeId& mode,
                               const ModeSchedule& sched);

/// All modes, persistence across mode-graph edges, and conflict-freedom of
/// each mode's legacy applications as first scheduled.
ValidationReport validate_system(const SystemSpec& spec, const SystemSchedule& sched);

}  // namespace ttw

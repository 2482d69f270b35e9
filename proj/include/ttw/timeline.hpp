#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ttw/sysmodel.hpp"

namespace ttw {

struct MessageTiming {
  Ticks offset = 0;
  Ticks deadline = 0;  // relative to offset
  Ticks period = 0;
};

struct InstanceWindow {
  Ticks index = 0;
  Ticks release = 0;
  Ticks due = 0;
};

/// floor(a / b) and ceil(a / b) for b > 0, exact for negative a.
Ticks floor_div(Ticks a, Ticks b);
Ticks ceil_div(Ticks a, Ticks b);

/// Number of instances released at or before t.
Ticks arrival(const MessageTiming& mt, Ticks t);

/// Number of instances whose deadline lies strictly before t. Negative
/// before the first deadline when the window wraps past the period.
Ticks demand(const MessageTiming& mt, Ticks t);

/// Instances served by rounds ending strictly before t, minus the leftover
/// count carried over from the previous hyperperiod.
Ticks service(std::span<const Ticks> allocs, std::span<const Ticks> round_ends, Ticks leftover,
              Ticks t);

std::vector<InstanceWindow> instance_windows(const MessageTiming& mt, Ticks horizon);

struct ModeSchedule;

enum class MatchFailure { NoSlot, TooEarly, TooLate };

std::string to_string(MatchFailure f);

struct MatchViolation {
  MessageId message;
  Ticks instance = 0;
  MatchFailure reason = MatchFailure::NoSlot;
  Ticks release = 0;
  Ticks due = 0;
};

/// One served instance: round index within the hyperperiod copy, absolute
/// round start, and the instance index it serves.
struct SlotAssignment {
  MessageId message;
  std::size_t round = 0;
  Ticks round_start = 0;
  Ticks instance = 0;
};

struct MatchResult {
  std::vector<SlotAssignment> assignments;
  std::optional<MatchViolation> violation;
  bool ok() const { return !violation.has_value(); }
};

/// Unrolls the mode's rounds over [0, horizon) starting with nothing
/// pending and assigns every allocated slot to the earliest-due released
/// instance of its message. Instances due within the horizon that remain
/// unserved, or that can only be served too late, produce a violation.
MatchResult edf_match(const ModeSchedule& schedule, const SystemSpec& spec, Ticks horizon);

/// Horizon (a multiple of the hyperperiod, at least two) after which the
/// greedy matching of `edf_match` has reached its periodic steady state.
Ticks steady_state_horizon(const ModeSchedule& schedule, const SystemSpec& spec);

/// Static slot-to-instance map in periodic steady state: for every message,
/// the k-th allocated slot of a hyperperiod serves instance k - leftover
/// (negative indices belong to the previous hyperperiod). Returns nothing
/// when no rotation satisfies every release and deadline.
struct PeriodicSlot {
  std::size_t round = 0;
  Ticks instance = 0;
};
struct PeriodicAssignment {
  std::map<MessageId, Ticks> leftover;
  std::map<MessageId, std::vector<PeriodicSlot>> slots;
};
std::optional<PeriodicAssignment> periodic_assignment(const ModeSchedule& schedule,
                                                      const SystemSpec& spec);

}  // namespace ttw

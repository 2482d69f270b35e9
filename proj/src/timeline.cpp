#include "ttw/timeline.hpp"

#include <algorithm>
#include <deque>

#include "ttw/error.hpp"
#include "ttw/schedule.hpp"

namespace ttw {

Ticks floor_div(Ticks a, Ticks b) {
  Ticks q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

Ticks ceil_div(Ticks a, Ticks b) { return -floor_div(-a, b); }

Ticks arrival(const MessageTiming& mt, Ticks t) { return floor_div(t - mt.offset, mt.period) + 1; }

Ticks demand(const MessageTiming& mt, Ticks t) {
  return ceil_div(t - mt.offset - mt.deadline, mt.period);
}

Ticks service(std::span<const Ticks> allocs, std::span<const Ticks> round_ends, Ticks leftover,
              Ticks t) {
  if (allocs.size() != round_ends.size())
    fail_input("service: allocation and round-end sequences differ in length");
  Ticks served = 0;
  for (std::size_t k = 0; k < allocs.size(); ++k) {
    if (round_ends[k] < t) served += allocs[k];
  }
  return served - leftover;
}

std::vector<InstanceWindow> instance_windows(const MessageTiming& mt, Ticks horizon) {
  std::vector<InstanceWindow> out;
  for (Ticks q = 0;; ++q) {
    const Ticks release = mt.offset + q * mt.period;
    if (release >= horizon) break;
    out.push_back({q, release, release + mt.deadline});
  }
  return out;
}

std::string to_string(MatchFailure f) {
  switch (f) {
    case MatchFailure::NoSlot: return "no-slot";
    case MatchFailure::TooEarly: return "too-early";
    case MatchFailure::TooLate: return "too-late";
  }
  return "no-slot";
}

namespace {

MessageTiming timing_of(const ModeSchedule& s, const SystemSpec& spec, const MessageId& m) {
  auto o = s.msg_offsets.find(m);
  auto d = s.msg_deadlines.find(m);
  if (o == s.msg_offsets.end() || d == s.msg_deadlines.end())
    fail_input("schedule of mode '" + s.mode + "' lacks message '" + m + "'");
  return {o->second, d->second, spec.message_period(m)};
}

std::vector<std::size_t> rounds_in_order(const ModeSchedule& s) {
  std::vector<std::size_t> idx(s.rounds.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return s.rounds[a].start < s.rounds[b].start; });
  return idx;
}

}  // namespace

MatchResult edf_match(const ModeSchedule& schedule, const SystemSpec& spec, Ticks horizon) {
  const Ticks H = schedule.hyperperiod;
  const Ticks T = schedule.round_length;
  if (H <= 0 || horizon <= 0 || horizon % H != 0)
    fail_input("edf_match: horizon must be a positive multiple of the hyperperiod");
  const auto order = rounds_in_order(schedule);
  const ModeContent content = mode_content(spec, schedule.mode);

  MatchResult result;
  for (const auto& m : content.messages) {
    const MessageTiming mt = timing_of(schedule, spec, m);
    const auto windows = instance_windows(mt, horizon);
    std::size_t next_release = 0;
    std::deque<std::size_t> pending;
    std::vector<bool> served(windows.size(), false);
    std::vector<std::pair<Ticks, Ticks>> idle;  // (start, end) of unused slots

    auto fail = [&](std::size_t q, MatchFailure reason) {
      const auto& w = windows[q];
      if (reason == MatchFailure::NoSlot) {
        for (const auto& [s, e] : idle) {
          if (s < w.release && s >= w.release - mt.period && e <= w.due) {
            reason = MatchFailure::TooEarly;
            break;
          }
        }
      }
      result.violation = MatchViolation{m, w.index, reason, w.release, w.due};
    };

    for (Ticks copy = 0; copy * H < horizon && !result.violation; ++copy) {
      for (std::size_t r : order) {
        const auto& round = schedule.rounds[r];
        if (std::find(round.alloc.begin(), round.alloc.end(), m) == round.alloc.end()) continue;
        const Ticks start = copy * H + round.start;
        const Ticks end = start + T;
        while (next_release < windows.size() && windows[next_release].release <= start)
          pending.push_back(next_release++);
        // Instances already past their due before this round starts were missed.
        if (!pending.empty() && windows[pending.front()].due < end) {
          const std::size_t q = pending.front();
          const bool straddles = start < windows[q].due;
          fail(q, straddles ? MatchFailure::TooLate : MatchFailure::NoSlot);
          break;
        }
        if (pending.empty()) {
          idle.emplace_back(start, end);
          continue;
        }
        const std::size_t q = pending.front();
        pending.pop_front();
        served[q] = true;
        result.assignments.push_back({m, r, start, windows[q].index});
      }
    }
    if (result.violation) return result;
    for (std::size_t q = 0; q < windows.size(); ++q) {
      if (!served[q] && windows[q].due <= horizon) {
        fail(q, MatchFailure::NoSlot);
        return result;
      }
    }
  }
  return result;
}

Ticks steady_state_horizon(const ModeSchedule& schedule, const SystemSpec& spec) {
  const ModeContent content = mode_content(spec, schedule.mode);
  Ticks copies = 2;
  for (const auto& m : content.messages) {
    const MessageTiming mt = timing_of(schedule, spec, m);
    const Ticks span = std::max<Ticks>(0, mt.offset + mt.deadline);
    copies = std::max(copies, ceil_div(span, mt.period) + 2);
  }
  return copies * schedule.hyperperiod;
}

std::optional<PeriodicAssignment> periodic_assignment(const ModeSchedule& schedule,
                                                      const SystemSpec& spec) {
  const Ticks H = schedule.hyperperiod;
  const Ticks T = schedule.round_length;
  const auto order = rounds_in_order(schedule);
  const ModeContent content = mode_content(spec, schedule.mode);
  PeriodicAssignment out;
  for (const auto& m : content.messages) {
    const MessageTiming mt = timing_of(schedule, spec, m);
    const Ticks n = H / mt.period;
    std::vector<std::size_t> slots;
    for (std::size_t r : order) {
      const auto& alloc = schedule.rounds[r].alloc;
      if (std::count(alloc.begin(), alloc.end(), m) > 1) return std::nullopt;
      if (std::count(alloc.begin(), alloc.end(), m) == 1) slots.push_back(r);
    }
    if (static_cast<Ticks>(slots.size()) != n) return std::nullopt;
    const Ticks max_leftover = n + ceil_div(std::max<Ticks>(0, mt.offset + mt.deadline), mt.period);
    bool found = false;
    for (Ticks r0 = 0; r0 <= max_leftover && !found; ++r0) {
      bool ok = true;
      for (Ticks k = 0; k < n && ok; ++k) {
        const Ticks q = k - r0;
        const Ticks release = mt.offset + q * mt.period;
        const Ticks start = schedule.rounds[slots[k]].start;
        ok = start >= release && start + T <= release + mt.deadline;
      }
      if (!ok) continue;
      found = true;
      out.leftover[m] = r0;
      auto& v = out.slots[m];
      for (Ticks k = 0; k < n; ++k) v.push_back({slots[k], k - r0});
    }
    if (!found) return std::nullopt;
  }
  return out;
}

}  // namespace ttw

#pragma once

#include <map>
#include <string>
#include <vector>

#include "ttw/sysmodel.hpp"

namespace ttw {

struct Round {
  Ticks start = 0;
  std::vector<MessageId> alloc;
};

/// Schedule of one mode over one hyperperiod; it repeats with the
/// hyperperiod.
struct ModeSchedule {
  ModeId mode;
  Ticks hyperperiod = 0;
  Ticks round_length = 0;
  std::map<TaskId, Ticks> task_offsets;
  std::map<MessageId, Ticks> msg_offsets;
  std::map<MessageId, Ticks> msg_deadlines;
  std::vector<Round> rounds;
};

/// Schedule parameters of one application: everything continuity
/// constraints compare across modes.
struct AppSlice {
  std::map<TaskId, Ticks> task_offsets;
  std::map<MessageId, Ticks> msg_offsets;
  std::map<MessageId, Ticks> msg_deadlines;

  friend bool operator==(const AppSlice&, const AppSlice&) = default;
};

AppSlice app_slice(const ModeSchedule& sched, const SystemSpec& spec, const AppId& app);

enum class InheritancePolicy { None, Minimal, Full };

std::string to_string(InheritancePolicy p);
InheritancePolicy parse_policy(const std::string& s);

struct SystemSchedule {
  InheritancePolicy policy = InheritancePolicy::Minimal;
  std::string spec_hash;
  Ticks tick_us = 10;
  std::vector<ModeSchedule> modes;

  const ModeSchedule& mode(const ModeId& id) const;
  bool has_mode(const ModeId& id) const;
};

/// Pinned applications keep their slice exactly; reserved applications only
/// contribute their task executions as obstacles.
struct InheritanceConstraints {
  std::map<AppId, AppSlice> pinned;
  std::map<AppId, AppSlice> reserved;
};

std::string dump_mode_schedule(const ModeSchedule& s);
std::string dump_system_schedule(const SystemSchedule& s);
SystemSchedule parse_system_schedule(const std::string& text);

}  // namespace ttw

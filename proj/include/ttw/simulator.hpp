#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ttw/schedule.hpp"
#include "ttw/sysmodel.hpp"

namespace ttw {

struct Beacon {
  int round_id = 0;  // 1-based index in the executing mode's round list
  ModeId mode_id;    // the announced target during a pending mode change
  bool trigger = false;
};

struct LossModel {
  double flood_loss_prob = 0;  // per node and flood, beacons included
  std::uint64_t seed = 0;
  /// Per-node beacon loss overriding flood_loss_prob; may be 1.
  std::map<NodeId, double> beacon_loss;
};

struct ModeRequest {
  Ticks at = 0;
  ModeId target;
};

using ModeChangeScript = std::vector<ModeRequest>;

struct SimOptions {
  NodeId host;     // empty: the first node of the spec
  ModeId initial;  // empty: the highest-priority mode
  bool trace = true;
};

struct TraceEvent {
  Ticks tick = 0;
  std::string kind;
  std::string subject;
  std::string detail;
};

struct AppStats {
  std::int64_t completed = 0;
  std::int64_t missed = 0;
  std::int64_t aborted = 0;  // cut by a mode change or the end of the run
};

struct NodeStats {
  double radio_on_us = 0;
  std::int64_t beacons_missed = 0;
  std::int64_t rounds_skipped = 0;
  std::int64_t rounds_joined = 0;
};

struct RoundRecord {
  Ticks start = 0;
  ModeId mode;
  Beacon beacon;
  int slots = 0;
  double t_on_us = 0;  // radio-on of a participating node
  int participants = 0;
};

struct ModeEpoch {
  ModeId mode;
  Ticks begin = 0;
  Ticks end = 0;
};

struct SimReport {
  std::map<AppId, AppStats> apps;
  std::map<NodeId, NodeStats> nodes;
  std::vector<ModeEpoch> epochs;
  std::vector<RoundRecord> rounds;
  std::vector<TraceEvent> trace;

  std::string to_json() const;
  std::string trace_csv() const;
};

/// Runs the system schedule from tick 0 in the initial mode for
/// `duration` ticks. Rounds start with a host beacon; a node that misses it
/// sits the round out. Floods reach each node independently with
/// probability 1 - p. A task instance runs iff its node holds every
/// preceding message instance. A requested mode change is announced in
/// the next beacon, triggered in the last round before a later hyperperiod
/// boundary of the current mode, and the new mode starts at that boundary.
SimReport simulate(const SystemSpec& spec, const SystemSchedule& sched, const LossModel& loss,
                   const ModeChangeScript& script, Ticks duration, const SimOptions& opt = {});

}  // namespace ttw

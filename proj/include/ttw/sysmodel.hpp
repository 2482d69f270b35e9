#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ttw/ttnet_model.hpp"

namespace ttw {

using Ticks = std::int64_t;
using NodeId = std::string;
using TaskId = std::string;
using MessageId = std::string;
using AppId = std::string;
using ModeId = std::string;

struct NodeSpec {
  NodeId id;
  std::string name;
};

struct TaskSpec {
  TaskId id;
  NodeId host;
  Ticks wcet = 0;
  std::set<MessageId> preceding_messages;
};

struct MessageSpec {
  MessageId id;
  std::set<TaskId> preceding_tasks;
  int payload = 0;
};

/// One edge of an application's precedence graph. A null `message` with one
/// null task declares a lone source or sink vertex.
struct AppEdge {
  std::optional<TaskId> from_task;
  std::optional<TaskId> to_task;
  std::optional<MessageId> message;
};

struct ApplicationSpec {
  AppId id;
  Ticks period = 0;
  Ticks deadline = 0;
  bool persistent = true;
  std::vector<AppEdge> edges;

  std::vector<TaskId> tasks() const;       // in first-appearance order
  std::vector<MessageId> messages() const; // in first-appearance order
};

struct ModeSpec {
  ModeId id;
  int prio = 0;
  std::vector<AppId> apps;
};

struct ModeEdge {
  ModeId a;
  ModeId b;
};

/// A complete problem instance. Lookup helpers throw on unknown ids.
struct SystemSpec {
  std::vector<NodeSpec> nodes;
  std::vector<TaskSpec> tasks;
  std::vector<MessageSpec> messages;
  std::vector<ApplicationSpec> applications;
  std::vector<ModeSpec> modes;
  std::vector<ModeEdge> mode_graph;
  NetworkConfig network;
  PlatformConstants platform;
  Ticks tick_us = 10;

  const TaskSpec& task(const TaskId& id) const;
  const MessageSpec& message(const MessageId& id) const;
  const ApplicationSpec& app(const AppId& id) const;
  const ModeSpec& mode(const ModeId& id) const;
  bool has_app(const AppId& id) const;
  bool has_mode(const ModeId& id) const;

  /// Modes sorted by priority (1 = highest first).
  std::vector<ModeId> modes_by_priority() const;
  bool adjacent(const ModeId& a, const ModeId& b) const;
  bool mode_contains(const ModeId& mode, const AppId& app) const;

  /// Period of a task or message: the period of any application using it.
  Ticks task_period(const TaskId& id) const;
  Ticks message_period(const MessageId& id) const;

  /// Round length T_r(L, B_max) in ticks.
  Ticks round_ticks() const;

  /// Throws ttw::Error naming the first violated invariant.
  void validate() const;
};

/// Platform constants document; absent keys keep the fitted defaults.
PlatformConstants parse_platform(const std::string& text);

/// Parses a system spec document (JSON text).
SystemSpec parse_system_spec(const std::string& text);
std::string dump_system_spec(const SystemSpec& spec);

/// Stable 64-bit hash of the canonical document, hex encoded.
std::string spec_hash(const SystemSpec& spec);

Ticks hyperperiod(const SystemSpec& spec, const ModeId& mode);

/// Connected components of the mode graph restricted to modes containing
/// `app`, each sorted by priority, ordered by their highest-priority mode.
std::vector<std::vector<ModeId>> schedule_domains(const SystemSpec& spec, const AppId& app);

/// Replicates non-persistent multi-mode applications and persistent
/// applications with several schedule domains. A replica is named
/// "<app>.<p>" where p is the smallest priority value in its domain.
SystemSpec normalize(const SystemSpec& spec);

struct ModeSets {
  std::set<AppId> known;
  std::set<AppId> free;
  std::set<AppId> legacy;
  std::set<AppId> virtual_legacy;
};

ModeSets mode_sets(const SystemSpec& spec, const ModeId& mode);

/// Virtual-legacy applications that must be reserved when scheduling free
/// application `app` in `mode`: those sharing a lower-priority mode with it
/// in which both are legacy.
std::set<AppId> minimal_virtual_legacy(const SystemSpec& spec, const ModeId& mode, const AppId& app);

/// Tasks and messages used by the applications of one mode, in declaration
/// order of the spec.
struct ModeContent {
  std::vector<AppId> apps;
  std::vector<TaskId> tasks;
  std::vector<MessageId> messages;
  /// Predecessor relations restricted to edges of the mode's applications.
  std::map<TaskId, std::set<MessageId>> task_prec;
  std::map<MessageId, std::set<TaskId>> message_prec;
  std::map<MessageId, std::set<TaskId>> message_succ;
  /// Tightest end-to-end deadline over the mode's applications using a task.
  std::map<TaskId, Ticks> task_deadline;
};

ModeContent mode_content(const SystemSpec& spec, const ModeId& mode);

}  // namespace ttw

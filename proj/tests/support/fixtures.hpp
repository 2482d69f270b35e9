#pragma once

#include <string>
#include <vector>

#include "ttw/schedule.hpp"
#include "ttw/sysmodel.hpp"

namespace ttw::testing {

std::string read_file(const std::string& path);
std::string fixture_path(const std::string& name);
SystemSpec load_fixture(const std::string& name);

/// Two-task application src -> msg -> dst, ids "<id>_src", "<id>_m",
/// "<id>_dst".
struct ChainApp {
  std::string id;
  std::string src_host;
  std::string dst_host;
  Ticks period = 0;
  Ticks deadline = 0;
  Ticks wcet = 1;
};

struct ModeDecl {
  std::string id;
  int prio = 1;
  std::vector<std::string> apps;
};

/// Builds and parses a spec; with no modes, one mode "M1" holds every app.
SystemSpec chain_system(Ticks tick_us, const std::vector<ChainApp>& apps,
                        std::vector<ModeDecl> modes = {},
                        const std::vector<std::pair<std::string, std::string>>& edges = {},
                        int b_max = 5);

/// Checks df <= sf <= af around every round of one hyperperiod, with the
/// leftover of each message taken from the periodic slot assignment.
bool flow_functions_hold(const ModeSchedule& s, const SystemSpec& spec, std::string* why = nullptr);

}  // namespace ttw::testing

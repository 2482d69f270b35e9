#pragma once

#include <random>

#include "ttw/sysmodel.hpp"

namespace ttw::testing {

/// One mode "M1" with at most 3 applications, 5 tasks and 3 messages, a
/// hyperperiod of at most 40 ticks and 6-tick rounds. Application shapes:
/// a lone task, a chain, a two-hop chain, a fan-in pair and a multicast.
SystemSpec random_micro_instance(std::mt19937_64& rng);

/// 2-4 modes over 3-6 chain or lone applications sharing 2-3 nodes, with a
/// random connected mode graph, already normalized.
SystemSpec random_multimode_instance(std::mt19937_64& rng);

/// Five modes, 13 nodes, 15 persistent applications with 45 tasks and 30
/// messages, periods of 1-8 s at 10 ms ticks.
SystemSpec inheritance_scenario(std::uint64_t seed);

}  // namespace ttw::testing

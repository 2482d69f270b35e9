#include <doctest.h>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "ttw/error.hpp"
#include "ttw/schedule.hpp"
#include "ttw/timeline.hpp"

using namespace ttw;
using ttw::testing::chain_system;
using ttw::testing::load_fixture;

namespace {

ModeSchedule toy1_witness() {
  ModeSchedule s;
  s.mode = "M1";
  s.hyperperiod = 10000;
  s.round_length = 5252;
  s.task_offsets = {{"tau1", 0}, {"tau2", 100 + 5252}};
  s.msg_offsets = {{"m1", 100}};
  s.msg_deadlines = {{"m1", 5252}};
  s.rounds = {{100, {"m1"}}};
  return s;
}

// Hyperperiod 200 at 1 ms ticks; message a_m has two instances per
// hyperperiod, b_m one. Rounds are 53 ticks long.
SystemSpec two_rate() {
  return chain_system(1000, {{"a", "n1", "n2", 100, 100, 2}, {"b", "n3", "n4", 200, 200, 2}});
}

ModeSchedule two_rate_schedule() {
  ModeSchedule s;
  s.mode = "M1";
  s.hyperperiod = 200;
  s.round_length = 53;
  s.task_offsets = {{"a_src", 0}, {"a_dst", 98}, {"b_src", 0}, {"b_dst", 198}};
  s.msg_offsets = {{"a_m", 2}, {"b_m", 2}};
  s.msg_deadlines = {{"a_m", 96}, {"b_m", 196}};
  s.rounds = {{2, {"a_m", "b_m"}}, {102, {"a_m"}}};
  return s;
}

}  // namespace

TEST_CASE("arrival, demand and service at their boundaries") {
  const MessageTiming a{20, 0, 100};
  CHECK(arrival(a, 20) == 1);
  CHECK(arrival(a, 19) == 0);
  CHECK(arrival(a, 250) == 3);

  const MessageTiming d{20, 90, 100};
  CHECK(demand(d, 110) == 0);
  CHECK(demand(d, 111) == 1);
  CHECK(demand(d, 0) == -1);

  const std::vector<Ticks> one{1}, end40{40}, none;
  CHECK(service(one, end40, 0, 35) == 0);
  CHECK(service(one, end40, 0, 41) == 1);
  CHECK(service(one, end40, 1, 41) == 0);
  CHECK(service(none, none, 2, 1000) == -2);
  const std::vector<Ticks> two{40, 50};
  CHECK_THROWS_AS(service(one, two, 0, 0), Error);

  for (Ticks q = 0; q < 20; ++q) {
    CHECK(arrival(d, d.offset + q * d.period) == q + 1);
    CHECK(demand(d, d.offset + d.deadline + q * d.period) == q);
  }
}

TEST_CASE("instance windows") {
  const auto w = instance_windows({20, 90, 100}, 300);
  REQUIRE(w.size() == 3);
  CHECK(w[0].release == 20);
  CHECK(w[1].release == 120);
  CHECK(w[2].release == 220);
  CHECK(w[0].due == 110);
  CHECK(w[2].due == 310);
  CHECK(instance_windows({20, 90, 100}, 20).empty());
  const auto over = instance_windows({10, 250, 100}, 300);
  REQUIRE(over.size() == 3);
  CHECK(over[0].due > over[1].release);
}

TEST_CASE("closed forms equal the unique integer of the double inequalities") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<Ticks> P(1, 500);
  for (int i = 0; i < 10000; ++i) {
    const Ticks p = P(rng);
    const Ticks o = std::uniform_int_distribution<Ticks>(0, p - 1)(rng);
    const Ticks d = std::uniform_int_distribution<Ticks>(1, 3 * p)(rng);
    const Ticks t = std::uniform_int_distribution<Ticks>(-3 * p, 20 * p)(rng);
    const MessageTiming mt{o, d, p};
    int a_hits = 0, d_hits = 0;
    Ticks ka = 0, kd = 0;
    for (Ticks k = -10; k <= 30; ++k) {
      // p (k - 1) <= t - o < p k
      if (p * (k - 1) <= t - o && t - o < p * k) ++a_hits, ka = k;
      // 0 < t - o - d - (k - 1) p <= p
      const Ticks r = t - o - d - (k - 1) * p;
      if (0 < r && r <= p) ++d_hits, kd = k;
    }
    REQUIRE(a_hits == 1);
    REQUIRE(d_hits == 1);
    CHECK(arrival(mt, t) == ka);
    CHECK(demand(mt, t) == kd);
  }
}

TEST_CASE("edf matching on hand-built schedules") {
  const SystemSpec toy = load_fixture("toy1.json");
  const ModeSchedule w = toy1_witness();
  CHECK(edf_match(w, toy, 2 * w.hyperperiod).ok());
  CHECK(steady_state_horizon(w, toy) >= 2 * w.hyperperiod);

  ModeSchedule late = w;
  late.rounds[0].start = 200;  // ends at 5452 > due 5352
  auto r = edf_match(late, toy, 2 * late.hyperperiod);
  REQUIRE(!r.ok());
  CHECK(r.violation->reason == MatchFailure::TooLate);
  CHECK(r.violation->message == "m1");

  const SystemSpec spec = two_rate();
  const ModeSchedule s = two_rate_schedule();
  CHECK(edf_match(s, spec, 2 * s.hyperperiod).ok());
  ModeSchedule halved = s;
  halved.rounds[1].alloc.clear();
  r = edf_match(halved, spec, 2 * s.hyperperiod);
  REQUIRE(!r.ok());
  CHECK(r.violation->reason == MatchFailure::NoSlot);
  CHECK(r.violation->message == "a_m");

  ModeSchedule early = s;
  early.rounds = {{2, {"a_m", "b_m"}}, {60, {"a_m"}}};  // second slot before release at 102
  r = edf_match(early, spec, 4 * s.hyperperiod);
  REQUIRE(!r.ok());
  CHECK(r.violation->reason == MatchFailure::TooEarly);

  CHECK_THROWS_AS(edf_match(s, spec, 150), Error);
}

TEST_CASE("periodic assignment agrees with edf matching and the flow functions") {
  const SystemSpec spec = two_rate();
  const ModeSchedule s = two_rate_schedule();
  const auto pa = periodic_assignment(s, spec);
  REQUIRE(pa.has_value());
  CHECK(pa->leftover.at("a_m") == 0);
  CHECK(pa->slots.at("a_m").size() == 2);
  CHECK(ttw::testing::flow_functions_hold(s, spec));

  ModeSchedule leftover = s;
  leftover.msg_offsets["b_m"] = 150;
  leftover.msg_deadlines["b_m"] = 110;  // window [150, 260)
  leftover.rounds = {{2, {"a_m", "b_m"}}, {102, {"a_m"}}};
  const auto lp = periodic_assignment(leftover, spec);
  REQUIRE(lp.has_value());
  CHECK(lp->leftover.at("b_m") == 1);
  CHECK(edf_match(leftover, spec, steady_state_horizon(leftover, spec)).ok());
  CHECK(ttw::testing::flow_functions_hold(leftover, spec));
}

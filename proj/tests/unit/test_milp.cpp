#include <doctest.h>

#include <functional>
#include <random>

#include "fixtures.hpp"
#include "ttw/error.hpp"
#include "ttw/milp.hpp"
#include "ttw/validator.hpp"
#include "ttw/mode_problem.hpp"

using namespace ttw;
using ttw::testing::load_fixture;

namespace {

// Exhaustive enumeration over the box of a small problem.
struct Brute {
  bool feasible = false;
  Coef best = 0;
};

Brute brute_force(const MilpProblem& p) {
  Brute b;
  std::vector<Coef> v(p.variables.size());
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == v.size()) {
      if (!satisfies(p, v)) return;
      Coef obj = 0;
      for (const auto& t : p.objective) obj += t.coef * v[t.var];
      if (!b.feasible || obj > b.best) b.best = obj;
      b.feasible = true;
      return;
    }
    for (Coef x = p.variables[i].lower; x <= p.variables[i].upper; ++x) {
      v[i] = x;
      rec(i + 1);
    }
  };
  rec(0);
  return b;
}

}  // namespace

TEST_CASE("solver on trivial problems") {
  MilpProblem p;
  const auto x = p.add_var("x", VarKind::Binary, 0, 1);
  p.add_constraint("lo", {{x, 1}}, Sense::GreaterEq, 1);
  p.add_constraint("hi", {{x, 1}}, Sense::LessEq, 0);
  CHECK(solve(p).status == SolveStatus::Infeasible);

  MilpProblem empty;
  const auto s = solve(empty);
  CHECK(s.status == SolveStatus::Feasible);
  CHECK(s.has_assignment());

  MilpProblem inverted;
  inverted.add_var("y", VarKind::Integer, 3, 2);
  CHECK(solve(inverted).status == SolveStatus::Infeasible);
}

TEST_CASE("solver matches brute force on random small integer programs") {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 300; ++round) {
    MilpProblem p;
    const int n = std::uniform_int_distribution<int>(1, 4)(rng);
    for (int i = 0; i < n; ++i) {
      const Coef lo = std::uniform_int_distribution<Coef>(-3, 2)(rng);
      const Coef hi = lo + std::uniform_int_distribution<Coef>(0, 5)(rng);
      if (std::uniform_int_distribution<int>(0, 3)(rng) == 0)
        p.add_var("b" + std::to_string(i), VarKind::Binary, 0, 1,
                  std::uniform_int_distribution<int>(0, 1)(rng));
      else
        p.add_var("v" + std::to_string(i), VarKind::Integer, lo, hi,
                  std::uniform_int_distribution<int>(0, 1)(rng));
    }
    const int m = std::uniform_int_distribution<int>(0, 4)(rng);
    for (int c = 0; c < m; ++c) {
      std::vector<Term> terms;
      for (int i = 0; i < n; ++i) {
        const Coef a = std::uniform_int_distribution<Coef>(-4, 4)(rng);
        if (a != 0) terms.push_back({static_cast<std::size_t>(i), a});
      }
      const auto sense = static_cast<Sense>(std::uniform_int_distribution<int>(0, 2)(rng));
      p.add_constraint("c" + std::to_string(c), terms, sense,
                       std::uniform_int_distribution<Coef>(-6, 6)(rng));
    }
    if (std::uniform_int_distribution<int>(0, 1)(rng)) {
      for (int i = 0; i < n; ++i)
        p.objective.push_back(
            {static_cast<std::size_t>(i), std::uniform_int_distribution<Coef>(-3, 3)(rng)});
      std::erase_if(p.objective, [](const Term& t) { return t.coef == 0; });
    }
    const Brute b = brute_force(p);
    const MilpSolution s = solve(p);
    REQUIRE(s.status != SolveStatus::Unknown);
    CHECK((s.status == SolveStatus::Feasible) == b.feasible);
    if (b.feasible && p.has_objective()) CHECK(*s.objective_value == b.best);
  }
}

TEST_CASE("budget exhaustion is reported as unknown") {
  MilpProblem p;
  std::vector<Term> sum;
  for (int i = 0; i < 20; ++i) sum.push_back({p.add_var("x" + std::to_string(i), VarKind::Binary, 0, 1), 2});
  p.add_constraint("odd", sum, Sense::Equal, 7);  // no integer solution, needs search
  SolveBudget tiny;
  tiny.max_nodes = 10;
  CHECK(solve(p, tiny).status == SolveStatus::Unknown);
}

TEST_CASE("toy problem construction and solution") {
  const SystemSpec toy = load_fixture("toy1.json");
  const ModeProblem mp = build_mode_problem(toy, "M1", 1, {}, false);
  CHECK(mp.problem.variables.size() == 9);
  CHECK(mp.round_length == 5252);
  CHECK(mp.problem.find("x_1_m1").has_value());
  CHECK(mp.problem.find("ka_m1_1").has_value());
  CHECK(mp.problem.find("kd_m1_1").has_value());
  CHECK(mp.problem.find("r0_m1").has_value());

  const MilpSolution s = solve(mp.problem);
  REQUIRE(s.status == SolveStatus::Feasible);
  const ModeSchedule sched = decode_mode_schedule(mp, s.values);
  CHECK(sched.rounds.size() == 1);
  CHECK(sched.rounds[0].alloc == std::vector<MessageId>{"m1"});
  CHECK(sched.task_offsets.at("tau1") == 0);
  CHECK(sched.msg_offsets.at("m1") == 100);
  CHECK(sched.rounds[0].start >= 100);
  CHECK(sched.rounds[0].start + 5252 <= sched.task_offsets.at("tau2"));
  CHECK(validate_mode(toy, "M1", sched).ok());

  const ModeProblem opt = build_mode_problem(toy, "M1", 1, {}, true);
  const MilpSolution so = solve(opt.problem);
  REQUIRE(so.status == SolveStatus::Feasible);
  const ModeSchedule best = decode_mode_schedule(opt, so.values);
  CHECK(best.msg_deadlines.at("m1") == 10000 - best.msg_offsets.at("m1") - 100);
  CHECK(*so.objective_value == 9800);

  const ModeProblem zero = build_mode_problem(toy, "M1", 0, {}, false);
  CHECK(solve(zero.problem).status == SolveStatus::Infeasible);
}

TEST_CASE("two tasks exceeding their shared node's period are infeasible") {
  const SystemSpec spec = parse_system_spec(R"({
    "nodes": ["n"],
    "tasks": [{"id": "t1", "host": "n", "wcet_ticks": 40}, {"id": "t2", "host": "n", "wcet_ticks": 70}],
    "messages": [],
    "applications": [
      {"id": "a", "period_ticks": 100, "deadline_ticks": 100, "edges": [{"from_task": "t1"}]},
      {"id": "b", "period_ticks": 100, "deadline_ticks": 100, "edges": [{"from_task": "t2"}]}],
    "modes": [{"id": "M", "prio": 1, "apps": ["a", "b"]}]})");
  // Oracle: every offset pair overlaps somewhere on [0, 200).
  bool any = false;
  for (Ticks o1 = 0; o1 < 100; ++o1) {
    for (Ticks o2 = 0; o2 < 100; ++o2) {
      bool clash = false;
      for (Ticks i = 0; i < 2 && !clash; ++i)
        for (Ticks j = 0; j < 2 && !clash; ++j) {
          const Ticks s1 = o1 + 100 * i, s2 = o2 + 100 * j;
          clash = s1 < s2 + 70 && s2 < s1 + 40;
        }
      any = any || !clash;
    }
  }
  CHECK(!any);
  for (int R = 0; R <= 2; ++R)
    CHECK(solve(build_mode_problem(spec, "M", R, {}, false).problem).status ==
          SolveStatus::Infeasible);
}

TEST_CASE("build-time diagnostics") {
  const SystemSpec toy = load_fixture("toy1.json");
  InheritanceConstraints bad;
  bad.pinned["a1"].task_offsets = {{"tau1", 50}, {"tau2", 100}};
  bad.pinned["a1"].msg_offsets = {{"m1", 100}};
  bad.pinned["a1"].msg_deadlines = {{"m1", 5252}};  // tau2 starts before m1 is due
  CHECK_THROWS_AS(build_mode_problem(toy, "M1", 1, bad, false), Error);

  SystemSpec fast = toy;
  for (auto& a : fast.applications) a.period = a.deadline = 5000;  // shorter than a round
  CHECK_THROWS_AS(build_mode_problem(fast, "M1", 1, {}, false), Error);
}

TEST_CASE("lp export") {
  const SystemSpec toy = load_fixture("toy1.json");
  const std::string lp = export_lp(build_mode_problem(toy, "M1", 1, {}, true).problem);
  const auto bin = lp.find("Binaries");
  REQUIRE(bin != std::string::npos);
  CHECK(lp.find("x_1_m1", bin) != std::string::npos);
  CHECK(lp.find("Maximize") == 0);
  CHECK(lp.find("Subject To") != std::string::npos);
  CHECK(lp.find("Generals") != std::string::npos);
  CHECK(lp.rfind("End\n") == lp.size() - 4);

  const std::string r0 = export_lp(build_mode_problem(toy, "M1", 0, {}, false).problem);
  CHECK(r0.find("F7_m1: 0 ") != std::string::npos);
  CHECK(r0.find("= 1") != std::string::npos);

  const std::string empty = export_lp(MilpProblem{});
  CHECK(empty == "Maximize\n obj: 0\nSubject To\nBounds\nEnd\n");
}

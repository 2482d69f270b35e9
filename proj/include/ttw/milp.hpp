#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ttw {

using Coef = std::int64_t;

enum class VarKind { Integer, Binary };

struct Variable {
  std::string name;
  VarKind kind = VarKind::Integer;
  Coef lower = 0;
  Coef upper = 0;
  bool prefer_high = false;  // branch on the largest value first
  std::optional<Coef> hint;  // tried before any other value
};

enum class Sense { LessEq, GreaterEq, Equal };

struct Term {
  std::size_t var = 0;
  Coef coef = 0;
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;
  Sense sense = Sense::LessEq;
  Coef rhs = 0;
};

/// Pure integer linear program; the objective, when present, is maximized.
struct MilpProblem {
  std::vector<Variable> variables;
  std::vector<Constraint> constraints;
  std::vector<Term> objective;

  std::size_t add_var(std::string name, VarKind kind, Coef lower, Coef upper,
                      bool prefer_high = false);
  void add_constraint(std::string name, std::vector<Term> terms, Sense sense, Coef rhs);
  bool has_objective() const { return !objective.empty(); }
  std::optional<std::size_t> find(const std::string& name) const;
};

enum class SolveStatus { Feasible, Infeasible, Unknown };

std::string to_string(SolveStatus s);

struct SolveBudget {
  std::uint64_t max_nodes = 0;  // 0: unlimited
  double max_seconds = 0;       // <= 0: unlimited
};

struct MilpSolution {
  SolveStatus status = SolveStatus::Unknown;
  /// Best assignment found; empty when none was found. With an objective and
  /// status Unknown this is the incumbent at the time the budget ran out.
  std::vector<Coef> values;
  std::optional<Coef> objective_value;
  std::uint64_t nodes = 0;
  double seconds = 0;

  bool found = false;

  bool has_assignment() const { return found; }
};

/// Depth-first branch and bound with bound propagation. Variables are
/// branched in declaration order by halving their domain, smallest values
/// first unless flagged `prefer_high`; a hint is tried before the rest of
/// the domain. With an objective, every incumbent tightens a cut on the
/// objective until the search space is exhausted.
MilpSolution solve(const MilpProblem& problem, const SolveBudget& budget = {});

/// True when `values` satisfies every bound and constraint exactly.
bool satisfies(const MilpProblem& problem, const std::vector<Coef>& values);

std::string export_lp(const MilpProblem& problem);

}  // namespace ttw

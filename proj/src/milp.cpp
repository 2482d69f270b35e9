#include "ttw/milp.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <sstream>

#include "ttw/error.hpp"

namespace ttw {

std::size_t MilpProblem::add_var(std::string name, VarKind kind, Coef lower, Coef upper,
                                 bool prefer_high) {
  if (kind == VarKind::Binary) {
    lower = std::max<Coef>(lower, 0);
    upper = std::min<Coef>(upper, 1);
  }
  variables.push_back({std::move(name), kind, lower, upper, prefer_high, std::nullopt});
  return variables.size() - 1;
}

void MilpProblem::add_constraint(std::string name, std::vector<Term> terms, Sense sense, Coef rhs) {
  for (const auto& t : terms) {
    if (t.var >= variables.size()) fail_input("constraint '" + name + "' references unknown variable");
  }
  constraints.push_back({std::move(name), std::move(terms), sense, rhs});
}

std::optional<std::size_t> MilpProblem::find(const std::string& name) const {
  for (std::size_t i = 0; i < variables.size(); ++i)
    if (variables[i].name == name) return i;
  return std::nullopt;
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Feasible: return "feasible";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unknown: return "unknown";
  }
  return "unknown";
}

bool satisfies(const MilpProblem& p, const std::vector<Coef>& v) {
  if (v.size() != p.variables.size()) return false;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] < p.variables[i].lower || v[i] > p.variables[i].upper) return false;
  for (const auto& c : p.constraints) {
    __int128 lhs = 0;
    for (const auto& t : c.terms) lhs += static_cast<__int128>(t.coef) * v[t.var];
    const bool ok = c.sense == Sense::LessEq    ? lhs <= c.rhs
                    : c.sense == Sense::GreaterEq ? lhs >= c.rhs
                                                  : lhs == c.rhs;
    if (!ok) return false;
  }
  return true;
}

namespace {

using Wide = __int128;

// Row in the form sum(coef * x) <= rhs.
struct Row {
  std::vector<Term> terms;
  Coef rhs = 0;
};

class Search {
 public:
  Search(const MilpProblem& p, const SolveBudget& budget) : p_(p), budget_(budget) {
    const std::size_t n = p.variables.size();
    lb_.resize(n);
    ub_.resize(n);
    high_first_.resize(n);
    var_rows_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      lb_[i] = p.variables[i].lower;
      ub_[i] = p.variables[i].upper;
      high_first_[i] = p.variables[i].prefer_high;
    }
    for (const auto& c : p.constraints) {
      if (c.sense != Sense::GreaterEq) add_row(c.terms, c.rhs, false);
      if (c.sense != Sense::LessEq) add_row(c.terms, c.rhs, true);
    }
    if (p.has_objective()) {
      std::vector<Term> neg;
      for (const auto& t : p.objective) neg.push_back({t.var, -t.coef});
      objective_row_ = rows_.size();
      add_row(neg, 0, false);
      // Inactive until an incumbent exists.
      Wide loose = 0;
      for (const auto& t : neg) loose += std::max<Wide>(Wide(t.coef) * lb_[t.var], Wide(t.coef) * ub_[t.var]);
      rows_[*objective_row_].rhs = static_cast<Coef>(loose);
    }
    in_queue_.assign(rows_.size(), false);
  }

  MilpSolution run() {
    const auto t0 = std::chrono::steady_clock::now();
    MilpSolution sol;
    auto finish = [&](SolveStatus s) {
      sol.status = s;
      sol.nodes = nodes_;
      sol.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      return sol;
    };

    for (std::size_t i = 0; i < lb_.size(); ++i)
      if (lb_[i] > ub_[i]) return finish(SolveStatus::Infeasible);
    for (std::size_t r = 0; r < rows_.size(); ++r) enqueue(r);
    bool alive = propagate();

    while (true) {
      if (!alive) {
        if (!backtrack()) break;
        alive = true;
        continue;
      }
      ++nodes_;
      if (budget_.max_nodes && nodes_ > budget_.max_nodes) return finish(SolveStatus::Unknown);
      if (budget_.max_seconds > 0 && (nodes_ & 255) == 0) {
        const double el =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (el > budget_.max_seconds) return finish(SolveStatus::Unknown);
      }
      std::size_t v = frames_.empty() ? 0 : frames_.back().var;
      while (v < lb_.size() && lb_[v] == ub_[v]) ++v;
      if (v == lb_.size()) {
        sol.values = lb_;
        sol.found = true;
        if (!p_.has_objective()) return finish(SolveStatus::Feasible);
        Wide obj = 0;
        for (const auto& t : p_.objective) obj += Wide(t.coef) * lb_[t.var];
        sol.objective_value = static_cast<Coef>(obj);
        rows_[*objective_row_].rhs = static_cast<Coef>(-(obj + 1));
        alive = false;
        continue;
      }
      branch(v);
      alive = propagate();
    }
    if (sol.has_assignment()) return finish(SolveStatus::Feasible);
    return finish(SolveStatus::Infeasible);
  }

 private:
  struct Range {
    Coef lo, hi;
  };
  // Alternatives still to try for `var` once the current branch fails.
  struct Frame {
    std::size_t mark;
    std::size_t var;
    Range alt[2];
    int n_alt;
  };
  struct TrailEntry {
    std::size_t var;
    Coef lb;
    Coef ub;
  };

  void add_row(const std::vector<Term>& terms, Coef rhs, bool negate) {
    Row r;
    for (const auto& t : terms) {
      const Coef a = negate ? -t.coef : t.coef;
      auto same = std::find_if(r.terms.begin(), r.terms.end(),
                               [&](const Term& u) { return u.var == t.var; });
      if (same != r.terms.end())
        same->coef += a;
      else
        r.terms.push_back({t.var, a});
    }
    std::erase_if(r.terms, [](const Term& t) { return t.coef == 0; });
    r.rhs = negate ? -rhs : rhs;
    const std::size_t id = rows_.size();
    for (const auto& t : r.terms) var_rows_[t.var].push_back(id);
    rows_.push_back(std::move(r));
  }

  void enqueue(std::size_t r) {
    if (in_queue_[r]) return;
    in_queue_[r] = true;
    queue_.push_back(r);
  }

  void set_bounds(std::size_t v, Coef lo, Coef hi) {
    trail_.push_back({v, lb_[v], ub_[v]});
    lb_[v] = lo;
    ub_[v] = hi;
    for (std::size_t r : var_rows_[v]) enqueue(r);
  }

  bool propagate() {
    if (objective_row_ && incumbent_rhs_seen_ != rows_[*objective_row_].rhs) {
      incumbent_rhs_seen_ = rows_[*objective_row_].rhs;
      enqueue(*objective_row_);
    }
    std::size_t head = 0;
    bool ok = true;
    while (head < queue_.size()) {
      const std::size_t r = queue_[head++];
      in_queue_[r] = false;
      if (ok && !propagate_row(rows_[r])) ok = false;
    }
    for (std::size_t i = head; i < queue_.size(); ++i) in_queue_[queue_[i]] = false;
    queue_.clear();
    return ok;
  }

  bool propagate_row(const Row& row) {
    Wide minact = 0;
    for (const auto& t : row.terms)
      minact += t.coef > 0 ? Wide(t.coef) * lb_[t.var] : Wide(t.coef) * ub_[t.var];
    const Wide slack = Wide(row.rhs) - minact;
    if (slack < 0) return false;
    for (const auto& t : row.terms) {
      const std::size_t v = t.var;
      if (t.coef > 0) {
        const Wide cap = Wide(lb_[v]) + slack / t.coef;
        if (cap < ub_[v]) set_bounds(v, lb_[v], static_cast<Coef>(cap));
      } else {
        const Wide floor = Wide(ub_[v]) - slack / (-Wide(t.coef));
        if (floor > lb_[v]) set_bounds(v, static_cast<Coef>(floor), ub_[v]);
      }
    }
    return true;
  }

  void undo_to(std::size_t mark) {
    while (trail_.size() > mark) {
      const auto& e = trail_.back();
      lb_[e.var] = e.lb;
      ub_[e.var] = e.ub;
      trail_.pop_back();
    }
  }

  // A hint inside the domain is tried alone first. Otherwise the domain is
  // halved, so leaves are still visited in lexicographic order of the
  // declared variables.
  void branch(std::size_t v) {
    Frame f{trail_.size(), v, {}, 0};
    const Coef lo = lb_[v], hi = ub_[v];
    const auto& h = p_.variables[v].hint;
    Range first;
    if (h && *h >= lo && *h <= hi) {
      first = {*h, *h};
      Range below{lo, *h - 1}, above{*h + 1, hi};
      if (high_first_[v]) std::swap(below, above);
      for (const Range& r : {below, above})
        if (r.lo <= r.hi) f.alt[f.n_alt++] = r;
    } else {
      const Coef mid = lo + (hi - lo) / 2;
      Range low{lo, mid}, high{mid + 1, hi};
      if (high_first_[v]) std::swap(low, high);
      first = low;
      f.alt[f.n_alt++] = high;
    }
    std::reverse(f.alt, f.alt + f.n_alt);  // popped from the back
    frames_.push_back(f);
    set_bounds(v, first.lo, first.hi);
  }

  bool backtrack() {
    while (!frames_.empty()) {
      Frame& f = frames_.back();
      undo_to(f.mark);
      if (f.n_alt == 0) {
        frames_.pop_back();
        continue;
      }
      const Range r = f.alt[--f.n_alt];
      const std::size_t v = f.var;
      if (f.n_alt == 0) frames_.pop_back();
      set_bounds(v, r.lo, r.hi);
      if (propagate()) return true;
    }
    return false;
  }

  const MilpProblem& p_;
  SolveBudget budget_;
  std::vector<Coef> lb_, ub_;
  std::vector<bool> high_first_;
  std::vector<Row> rows_;
  std::vector<std::vector<std::size_t>> var_rows_;
  std::vector<bool> in_queue_;
  std::vector<std::size_t> queue_;
  std::vector<TrailEntry> trail_;
  std::vector<Frame> frames_;
  std::optional<std::size_t> objective_row_;
  Coef incumbent_rhs_seen_ = 0;
  std::uint64_t nodes_ = 0;
};

std::string lp_name(const std::string& s) {
  std::string out;
  for (char c : s) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
    out.push_back(ok ? c : '_');
  }
  if (out.empty() || std::isdigit(static_cast<unsigned char>(out[0])) || out[0] == '.')
    out.insert(out.begin(), '_');
  return out;
}

void write_terms(std::ostringstream& os, const MilpProblem& p, const std::vector<Term>& terms) {
  int on_line = 0;
  bool first = true;
  for (const auto& t : terms) {
    if (t.coef == 0) continue;
    if (on_line == 8) {
      os << "\n   ";
      on_line = 0;
    }
    const Coef a = t.coef < 0 ? -t.coef : t.coef;
    if (first)
      os << (t.coef < 0 ? "- " : "");
    else
      os << (t.coef < 0 ? " - " : " + ");
    if (a != 1) os << a << ' ';
    os << lp_name(p.variables[t.var].name);
    first = false;
    ++on_line;
  }
  if (first) {
    if (p.variables.empty())
      os << "0";
    else
      os << "0 " << lp_name(p.variables.front().name);
  }
}

}  // namespace

MilpSolution solve(const MilpProblem& problem, const SolveBudget& budget) {
  Search s(problem, budget);
  MilpSolution sol = s.run();
  if (sol.has_assignment() && !satisfies(problem, sol.values))
    throw std::logic_error("solver produced an assignment violating the problem");
  return sol;
}

std::string export_lp(const MilpProblem& p) {
  std::ostringstream os;
  os << "Maximize\n obj: ";
  write_terms(os, p, p.objective);
  os << "\nSubject To\n";
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    const auto& c = p.constraints[i];
    os << ' ' << lp_name(c.name.empty() ? "c" + std::to_string(i) : c.name) << ": ";
    write_terms(os, p, c.terms);
    os << (c.sense == Sense::LessEq ? " <= " : c.sense == Sense::GreaterEq ? " >= " : " = ")
       << c.rhs << '\n';
  }
  os << "Bounds\n";
  for (const auto& v : p.variables) {
    if (v.kind == VarKind::Binary) continue;
    if (v.lower == v.upper)
      os << ' ' << lp_name(v.name) << " = " << v.lower << '\n';
    else
      os << ' ' << v.lower << " <= " << lp_name(v.name) << " <= " << v.upper << '\n';
  }
  bool any = false;
  for (const auto& v : p.variables) {
    if (v.kind != VarKind::Integer) continue;
    if (!any) os << "Generals\n";
    any = true;
    os << ' ' << lp_name(v.name) << '\n';
  }
  any = false;
  for (const auto& v : p.variables) {
    if (v.kind != VarKind::Binary) continue;
    if (!any) os << "Binaries\n";
    any = true;
    os << ' ' << lp_name(v.name) << '\n';
  }
  os << "End\n";
  return os.str();
}

}  // namespace ttw

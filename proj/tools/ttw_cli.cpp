#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "ttw/error.hpp"
#include "ttw/milp.hpp"
#include "ttw/mode_problem.hpp"
#include "ttw/simulator.hpp"
#include "ttw/synth.hpp"
#include "ttw/ttnet_model.hpp"
#include "ttw/validator.hpp"

using namespace ttw;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kInfeasible = 1, kInvalid = 2, kRejected = 3, kBudget = 4 };

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_input("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_out(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) fail_input("cannot write '" + path + "'");
  out << text;
}

SystemSpec load_spec(const std::string& path) { return normalize(parse_system_spec(read_file(path))); }

SystemSchedule load_schedule(const SystemSpec& spec, const std::string& path) {
  SystemSchedule s = parse_system_schedule(read_file(path));
  if (!s.spec_hash.empty() && s.spec_hash != spec_hash(spec))
    std::cerr << "warning: schedule was synthesized for a different spec (hash " << s.spec_hash
              << ", spec " << spec_hash(spec) << ")\n";
  return s;
}

std::vector<int> int_list(const std::string& text, const std::string& flag, int lo) {
  std::vector<int> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || item.empty()) fail_input(flag + ": '" + item + "' is not an integer");
    if (v < lo) fail_input(flag + ": " + item + " must be at least " + std::to_string(lo));
    out.push_back(v);
  }
  if (out.empty()) fail_input(flag + ": empty list");
  return out;
}

// "<n>h" counts hyperperiods; "<x>ms", "<x>s", "<x>us" are times; a bare
// integer is ticks.
Ticks parse_duration(const std::string& text, Ticks hyperperiod, Ticks tick_us) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    fail_input("bad duration '" + text + "'");
  }
  const std::string unit = text.substr(used);
  double ticks;
  if (unit.empty())
    ticks = v;
  else if (unit == "h")
    ticks = v * static_cast<double>(hyperperiod);
  else if (unit == "s")
    ticks = v * 1e6 / static_cast<double>(tick_us);
  else if (unit == "ms")
    ticks = v * 1e3 / static_cast<double>(tick_us);
  else if (unit == "us")
    ticks = v / static_cast<double>(tick_us);
  else
    fail_input("bad duration unit in '" + text + "' (use h, s, ms, us or plain ticks)");
  if (ticks < 0 || std::abs(ticks - std::round(ticks)) > 1e-9)
    fail_input("duration '" + text + "' is not a whole number of ticks");
  return static_cast<Ticks>(std::llround(ticks));
}

PlatformConstants platform_from(const std::string& file, const std::vector<std::string>& sets) {
  json doc = file.empty() ? json::object() : json::parse(read_file(file), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) fail_input("malformed platform file '" + file + "'");
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) fail_input("--const expects key=value, got '" + kv + "'");
    try {
      doc[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    } catch (const std::exception&) {
      fail_input("--const " + kv + ": value is not a number");
    }
  }
  return parse_platform(doc.dump());
}

std::string fmt(double v, int digits) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(digits) << v;
  return o.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Schedule synthesis, validation and simulation for time-triggered wireless systems"};
  app.require_subcommand(1);
  std::function<int()> action;

  // model
  auto* model = app.add_subcommand("model", "Round length and energy savings of the TTnet model");
  std::string payloads = "16", slots = "5", hops = "4", platform_file, csv_out;
  int ntx = 2, lmax = 64;
  std::vector<std::string> consts;
  model->add_option("--payload", payloads, "Payload bytes, comma separated");
  model->add_option("--slots", slots, "Slots per round, comma separated");
  model->add_option("--hops", hops, "Network diameter, comma separated");
  model->add_option("--ntx", ntx, "Transmissions per flood");
  model->add_option("--lmax", lmax, "Largest payload");
  model->add_option("--platform", platform_file, "Platform constants document");
  model->add_option("--const", consts, "Override one platform constant, key=value");
  model->add_option("--csv", csv_out, "Write the table as CSV");
  model->callback([&] {
    action = [&] {
      const auto L = int_list(payloads, "--payload", 0);
      const auto B = int_list(slots, "--slots", 0);
      const auto Hs = int_list(hops, "--hops", 1);
      if (ntx < 1) fail_input("--ntx must be positive");
      NetworkConfig net;
      net.n_tx = ntx;
      net.l_max = lmax;
      const PlatformConstants c = platform_from(platform_file, consts);
      for (int l : L)
        if (l > lmax) fail_input("payload " + std::to_string(l) + " exceeds L_max " + std::to_string(lmax));
      const auto rows = model_table(c, net, L, B, Hs);
      if (!csv_out.empty()) write_out(csv_out, model_table_csv(rows));
      for (const auto& r : rows)
        std::cout << "L=" << r.payload << " B=" << r.slots << " H=" << r.hops << " N=" << r.n_tx
                  << "  T_round " << fmt(r.t_round_us / 1000.0, 2) << " ms  radio-on "
                  << fmt(r.t_on_us / 1000.0, 2) << " ms  savings " << fmt(r.savings_pct, 1)
                  << "%\n";
      return kOk;
    };
  });

  // synth
  auto* synth = app.add_subcommand("synth", "Synthesize all modes in priority order");
  std::string spec_file, policy = "minimal", out_file;
  std::uint64_t budget_nodes = SynthOptions{}.budget.max_nodes;
  double budget_seconds = SynthOptions{}.budget.max_seconds;
  bool no_objective = false;
  synth->add_option("spec", spec_file, "System spec document")->required();
  synth->add_option("--policy", policy, "Inheritance policy")
      ->check(CLI::IsMember({"none", "minimal", "full"}));
  synth->add_option("--budget", budget_nodes, "Search nodes per feasibility solve (0: unlimited)");
  synth->add_option("--time-limit", budget_seconds, "Seconds per feasibility solve (0: unlimited)");
  synth->add_flag("--no-objective", no_objective, "Skip deadline maximization");
  synth->add_option("-o,--out", out_file, "Schedule output (default stdout)");
  synth->callback([&] {
    action = [&] {
      const SystemSpec spec = load_spec(spec_file);
      SynthOptions opt;
      opt.budget = {budget_nodes, budget_seconds};
      opt.maximize_deadlines = !no_objective;
      const SystemSynthesis ss = synthesize_system(spec, parse_policy(policy), opt);
      for (const auto& m : ss.modes)
        std::cerr << m.schedule.mode << ": " << m.rounds << " rounds, " << m.nodes << " nodes, "
                  << fmt(m.seconds, 2) << " s" << (m.objective_proven ? "" : ", objective unproven")
                  << "\n";
      write_out(out_file, dump_system_schedule(ss.schedule) + "\n");
      return kOk;
    };
  });

  // validate
  auto* validate = app.add_subcommand("validate", "Check a schedule against its spec");
  std::string sched_file;
  validate->add_option("spec", spec_file, "System spec document")->required();
  validate->add_option("schedule", sched_file, "Schedule document")->required();
  validate->callback([&] {
    action = [&] {
      const SystemSpec spec = load_spec(spec_file);
      const SystemSchedule s = load_schedule(spec, sched_file);
      const ValidationReport r = validate_system(spec, s);
      std::cout << r.to_json() << "\n";
      return r.ok() ? kOk : kRejected;
    };
  });

  // simulate
  auto* simulate_cmd = app.add_subcommand("simulate", "Run a schedule on a simulated network");
  double loss_p = 0;
  std::uint64_t seed = 0;
  std::string duration = "3h", script_file, trace_out, host, initial;
  simulate_cmd->add_option("spec", spec_file, "System spec document")->required();
  simulate_cmd->add_option("schedule", sched_file, "Schedule document")->required();
  simulate_cmd->add_option("--loss", loss_p, "Per-node flood loss probability");
  simulate_cmd->add_option("--seed", seed, "Loss seed");
  simulate_cmd->add_option("--duration", duration, "<n>h hyperperiods, <x>s, <x>ms or ticks");
  simulate_cmd->add_option("--script", script_file,
                           "Mode changes: [{\"at\": duration, \"target\": mode}, ...]");
  simulate_cmd->add_option("--trace", trace_out, "Write the event trace as CSV");
  simulate_cmd->add_option("--host", host, "Host node (default: first node)");
  simulate_cmd->add_option("--initial", initial, "Initial mode (default: highest priority)");
  simulate_cmd->add_option("-o,--out", out_file, "Report output (default stdout)");
  simulate_cmd->callback([&] {
    action = [&] {
      const SystemSpec spec = load_spec(spec_file);
      const SystemSchedule s = load_schedule(spec, sched_file);
      const ValidationReport r = validate_system(spec, s);
      if (!r.ok()) {
        std::cerr << r.to_json() << "\n";
        return kRejected;
      }
      const ModeId first = initial.empty() ? spec.modes_by_priority().front() : initial;
      if (!spec.has_mode(first)) fail_input("unknown mode '" + first + "'");
      const Ticks H = s.mode(first).hyperperiod;
      ModeChangeScript script;
      if (!script_file.empty()) {
        const json doc = json::parse(read_file(script_file), nullptr, false);
        if (doc.is_discarded() || !doc.is_array()) fail_input("script must be a JSON array");
        for (const auto& e : doc) {
          if (!e.is_object() || !e.contains("at") || !e.contains("target"))
            fail_input("script entries need 'at' and 'target'");
          const auto& at = e.at("at");
          const Ticks t = at.is_string() ? parse_duration(at.get<std::string>(), H, spec.tick_us)
                                         : at.get<Ticks>();
          script.push_back({t, e.at("target").get<std::string>()});
        }
      }
      SimOptions opt;
      opt.host = host;
      opt.initial = initial;
      opt.trace = !trace_out.empty();
      const SimReport rep = ttw::simulate(spec, s, {loss_p, seed, {}}, script,
                                          parse_duration(duration, H, spec.tick_us), opt);
      if (!trace_out.empty()) write_out(trace_out, rep.trace_csv());
      write_out(out_file, rep.to_json() + "\n");
      return kOk;
    };
  });

  // export-lp
  auto* export_cmd = app.add_subcommand("export-lp", "Write one mode's integer program in LP format");
  std::string mode;
  int rounds = 0;
  std::string lp_policy = "none";
  bool objective = false;
  export_cmd->add_option("spec", spec_file, "System spec document")->required();
  export_cmd->add_option("--mode", mode, "Mode id")->required();
  export_cmd->add_option("--rounds", rounds, "Round count")->required();
  export_cmd->add_option("--policy", lp_policy,
                         "Inherit from higher-priority modes synthesized under this policy")
      ->check(CLI::IsMember({"none", "minimal", "full"}));
  export_cmd->add_flag("--objective", objective, "Include deadline maximization");
  export_cmd->add_option("-o,--out", out_file, "LP output (default stdout)");
  export_cmd->callback([&] {
    action = [&] {
      const SystemSpec spec = load_spec(spec_file);
      if (!spec.has_mode(mode)) fail_input("unknown mode '" + mode + "'");
      if (rounds < 0) fail_input("--rounds must be non-negative");
      InheritanceConstraints ic;
      const InheritancePolicy pol = parse_policy(lp_policy);
      if (pol != InheritancePolicy::None) {
        std::map<AppId, AppSlice> fixed;
        for (const auto& m : spec.modes_by_priority()) {
          if (m == mode) break;
          const ModeSynthesis ms = synthesize_mode(spec, m, inheritance_for(spec, m, pol, fixed));
          for (const auto& a : spec.mode(m).apps)
            if (!fixed.count(a)) fixed[a] = app_slice(ms.schedule, spec, a);
        }
        ic = inheritance_for(spec, mode, pol, fixed);
      }
      const ModeProblem mp = build_mode_problem(spec, mode, rounds, ic, objective);
      write_out(out_file, export_lp(mp.problem));
      return kOk;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }
  try {
    return action();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::Infeasible: return kInfeasible;
      case ErrorKind::BudgetExhausted: return kBudget;
      default: return kInvalid;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  }
}

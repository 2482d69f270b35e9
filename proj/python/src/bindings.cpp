#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ttw/error.hpp"
#include "ttw/mode_problem.hpp"
#include "ttw/simulator.hpp"
#include "ttw/synth.hpp"
#include "ttw/ttnet_model.hpp"
#include "ttw/validator.hpp"

namespace py = pybind11;
using namespace ttw;

namespace {

SystemSpec load(const std::string& spec) { return normalize(parse_system_spec(spec)); }

py::dict round_timing(int payload, int slots, int hops, int ntx) {
  NetworkConfig net;
  net.hops = hops;
  net.n_tx = ntx;
  net.b_max = std::max(net.b_max, slots);
  net.l_max = std::max(net.l_max, payload);
  const RoundTiming rt = round_length(PlatformConstants{}, net, payload, slots);
  py::dict d;
  d["t_round_us"] = rt.t_round;
  d["t_on_us"] = rt.t_on_total;
  d["savings"] = rt.savings;
  return d;
}

py::dict synthesize(const std::string& spec_text, const std::string& policy, bool objective) {
  const SystemSpec spec = load(spec_text);
  SynthOptions opt;
  opt.maximize_deadlines = objective;
  SystemSynthesis ss;
  {
    py::gil_scoped_release release;
    ss = synthesize_system(spec, parse_policy(policy), opt);
  }
  py::dict rounds;
  for (const auto& m : ss.modes) rounds[py::str(m.schedule.mode)] = m.rounds;
  py::dict d;
  d["schedule"] = dump_system_schedule(ss.schedule);
  d["rounds"] = rounds;
  return d;
}

std::string validate(const std::string& spec_text, const std::string& sched_text) {
  return validate_system(load(spec_text), parse_system_schedule(sched_text)).to_json();
}

py::dict simulate_run(const std::string& spec_text, const std::string& sched_text, Ticks duration,
                      double loss, std::uint64_t seed,
                      const std::vector<std::pair<Ticks, std::string>>& script) {
  const SystemSpec spec = load(spec_text);
  const SystemSchedule sched = parse_system_schedule(sched_text);
  ModeChangeScript s;
  for (const auto& [at, target] : script) s.push_back({at, target});
  const SimReport r = simulate(spec, sched, {loss, seed, {}}, s, duration);
  py::dict d;
  d["report"] = r.to_json();
  d["trace"] = r.trace_csv();
  return d;
}

std::string lp(const std::string& spec_text, const std::string& mode, int rounds) {
  const SystemSpec spec = load(spec_text);
  return export_lp(build_mode_problem(spec, mode, rounds, {}, false).problem);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Schedule synthesis, validation and simulation core";
  static py::exception<Error> base(m, "TtwError");
  static py::exception<Error> infeasible(m, "InfeasibleError", base.ptr());
  static py::exception<Error> budget(m, "BudgetExhaustedError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      switch (e.kind()) {
        case ErrorKind::Infeasible: py::set_error(infeasible, e.what()); break;
        case ErrorKind::BudgetExhausted: py::set_error(budget, e.what()); break;
        default: py::set_error(PyExc_ValueError, e.what());
      }
    }
  });

  m.def("round_timing", &round_timing, py::arg("payload"), py::arg("slots"), py::arg("hops") = 4,
        py::arg("ntx") = 2);
  m.def("normalize", [](const std::string& s) { return dump_system_spec(load(s)); });
  m.def("hyperperiod", [](const std::string& s, const std::string& mode) {
    return hyperperiod(load(s), mode);
  });
  m.def("synthesize", &synthesize, py::arg("spec"), py::arg("policy") = "minimal",
        py::arg("objective") = true);
  m.def("validate", &validate, py::arg("spec"), py::arg("schedule"));
  m.def("simulate", &simulate_run, py::arg("spec"), py::arg("schedule"), py::arg("duration"),
        py::arg("loss") = 0.0, py::arg("seed") = 0,
        py::arg("script") = std::vector<std::pair<Ticks, std::string>>{});
  m.def("export_lp", &lp, py::arg("spec"), py::arg("mode"), py::arg("rounds"));
}

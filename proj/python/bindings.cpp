#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <string>

#include "epon/experiment.hpp"
#include "epon/simulation.hpp"
#include "epon/validate.hpp"

namespace py = pybind11;
namespace ex = epon::experiment;
using epon::SimTime;

namespace {

ex::Overrides to_overrides(const py::dict& settings) {
  ex::Overrides o;
  for (const auto& [k, v] : settings) o.emplace_back(py::str(k), py::str(v));
  return o;
}

py::dict summary_dict(const epon::metrics::MetricsSummary& s) {
  py::dict d;
  d["load"] = s.load;
  d["q_w"] = s.q_w;
  if (s.seed) d["seed"] = *s.seed;
  d["t_off_s"] = s.t_off_s;
  d["t_wait_s"] = s.t_wait_s;
  d["t_trans_s"] = s.t_trans_s;
  d["t_on_s"] = s.t_on_s;
  d["power_pct"] = s.power_pct;
  d["mean_delay_s"] = s.mean_delay_s;
  d["p95_delay_s"] = s.p95_delay_s;
  d["frames_in"] = s.frames_in;
  d["frames_out"] = s.frames_out;
  if (s.ci95_power) d["ci95_power"] = *s.ci95_power;
  if (s.ci95_delay_s) d["ci95_delay_s"] = *s.ci95_delay_s;
  return d;
}

py::dict simulate(double load, std::int64_t q_w, std::uint64_t seed, double duration_s, const py::dict& settings,
                  bool trace) {
  ex::Overrides o = to_overrides(settings);
  o.emplace_back("run.duration_s", std::to_string(duration_s));
  const ex::ExperimentPlan plan = ex::parse_config(o);
  const epon::SimulationConfig cfg = plan.run_config(load, q_w, seed);

  std::string text;
  std::optional<epon::trace::TraceWriter> writer;
  if (trace) writer.emplace(epon::trace::string_sink(text));
  epon::RunResult run;
  {
    py::gil_scoped_release release;
    run = epon::simulate(cfg, writer ? &*writer : nullptr);
  }
  py::dict d = summary_dict(epon::summarize(cfg, run, seed));
  d["final_queue_frames"] = run.final_queue_frames;
  d["delivered_bytes"] = run.delivered_bytes;
  d["protocol_violations"] = run.protocol_violations;
  if (trace) d["trace"] = text;
  return d;
}

std::string sweep_csv(const py::dict& settings, unsigned jobs) {
  const ex::ExperimentPlan plan = ex::parse_config(to_overrides(settings));
  ex::RunOptions opts;
  opts.jobs = jobs;
  ex::ExperimentResult r;
  {
    py::gil_scoped_release release;
    r = ex::run_experiment(plan, opts);
  }
  std::ostringstream os;
  ex::write_csv(os, r);
  return os.str();
}

py::list validate_trace(const std::string& text) {
  py::list out;
  for (const auto& v : epon::validate::validate_text(text)) {
    out.append(py::make_tuple(v.time.count(), std::string(epon::validate::rule_id(v.rule)), v.detail));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "EPON upstream packet-coalescing simulator";

  py::register_exception<ex::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<epon::validate::TraceFormatError>(m, "TraceFormatError", PyExc_ValueError);

  m.def("calibrate_scale", py::overload_cast<double, std::int64_t, double, double>(&epon::traffic::calibrate_scale),
        py::arg("alpha") = 2.5, py::arg("frame_bytes") = 1500, py::arg("load") = 0.5, py::arg("rate_bps") = 200e6,
        "Pareto scale x_m in ns for the given offered load.");

  m.def(
      "wait_poweron_time",
      [](std::int64_t now_ns, std::int64_t delta_on_ns, std::int64_t cycle_len_ns) {
        epon::olt::DbaConfig dba;
        dba.cycle_len = SimTime{cycle_len_ns};
        return epon::onu::wait_poweron_time(SimTime{now_ns}, SimTime{delta_on_ns}, dba).count();
      },
      py::arg("now_ns"), py::arg("delta_on_ns") = 2'000'000, py::arg("cycle_len_ns") = 1'500'000,
      "Power-on instant (ns) for a WAIT state entered at now_ns.");

  m.def("should_sleep", &epon::onu::should_sleep, py::arg("queue_frames"), py::arg("q_w"));

  m.def(
      "transmission_time_ns",
      [](std::int64_t bytes, double rate_bps) { return epon::olt::transmission_time(bytes, rate_bps).count(); },
      py::arg("bytes"), py::arg("rate_bps") = 10e9);

  m.def(
      "grant_bytes",
      [](std::int64_t reported_bytes, std::int64_t cap_bytes) {
        epon::olt::DbaConfig dba;
        dba.cap_bytes = cap_bytes;
        const epon::olt::Olt olt(dba);
        return olt.make_gate(1, epon::olt::ReportMessage{SimTime{0}, reported_bytes}).data_grant_bytes;
      },
      py::arg("reported_bytes"), py::arg("cap_bytes") = 37'500);

  m.def(
      "power_fraction",
      [](double t_off, double t_wait, double t_trans, double t_on, double ratio) {
        auto ns = [](double s) { return SimTime{std::llround(s * 1e9)}; };
        epon::metrics::StateTimes t{ns(t_off), ns(t_wait), ns(t_trans), ns(t_on)};
        return epon::metrics::power_fraction(t, {1.0, 1.0 / ratio});
      },
      py::arg("t_off"), py::arg("t_wait"), py::arg("t_trans"), py::arg("t_on"), py::arg("ratio") = 10.0,
      "Percent of always-on consumption for state times in seconds.");

  m.def(
      "ideal_power_pct", [](double load, double ratio) { return epon::metrics::ideal_power_pct(load, {1.0, 1.0 / ratio}); },
      py::arg("load"), py::arg("ratio") = 10.0);

  m.def("simulate", &simulate, py::arg("load") = 0.5, py::arg("q_w") = 10, py::arg("seed") = 1,
        py::arg("duration_s") = 100.0, py::arg("settings") = py::dict(), py::arg("trace") = false,
        "Run one sweep point; `settings` takes any configuration key.");

  m.def("sweep_csv", &sweep_csv, py::arg("settings") = py::dict(), py::arg("jobs") = 1,
        "Run a sweep described by configuration keys and return the results CSV.");

  m.def("validate_trace", &validate_trace, py::arg("text"),
        "List of (time_ns, rule, detail) violations found in a serialized trace.");

  m.def("config_keys", &ex::known_keys);
  m.attr("CSV_HEADER") = std::string(ex::kCsvHeader);
}

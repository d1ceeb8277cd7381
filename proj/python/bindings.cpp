// Copyright 2026 The coexist Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <utility>
#include <vector>

#include "coexist/config.hpp"
#include "coexist/experiments.hpp"
#include "coexist/fl.hpp"
#include "coexist/metrics.hpp"
#include "coexist/scenario.hpp"

namespace py = pybind11;
using namespace coexist;

namespace {

py::dict counters(const urllc::PacketCounters& c) {
  py::dict d;
  d["generated"] = c.generated;
  d["on_time"] = c.on_time;
  d["late"] = c.late;
  d["failed"] = c.failed;
  return d;
}

py::dict to_dict(const RunResult& r) {
  py::dict out;
  out["run_id"] = r.run_id;
  out["seed"] = r.seed;
  out["n_devices"] = r.n_devices;
  out["eta"] = r.eta;
  out["n_required"] = r.n_required;
  out["model_bytes"] = r.model_bytes;
  out["config_hash"] = r.config_hash;

  py::list urllc;
  for (const UrllcDeviceResult& d : r.urllc) {
    py::dict e;
    e["device_id"] = d.device_id;
    e["cell"] = d.cell;
    e["avail_ul"] = d.avail_ul;
    e["avail_dl"] = d.avail_dl;
    e["avail_combined"] = d.avail_combined;
    e["ul"] = counters(d.ul);
    e["dl"] = counters(d.dl);
    urllc.append(e);
  }
  out["urllc"] = urllc;

  py::list rounds;
  for (const fl::RoundRecord& k : r.rounds) {
    py::dict e;
    e["k"] = k.k;
    e["d_k_ai_s"] = k.d_k_ai_s;
    e["n_received_at_update"] = k.n_received_at_update;
    e["dist_to_wstar"] = k.dist_to_wstar;
    rounds.append(e);
  }
  out["rounds"] = rounds;

  const RunDiagnostics& g = r.diag;
  py::dict diag;
  diag["events"] = g.events;
  diag["ttis"] = g.ttis;
  diag["priority_violations"] = g.priority_violations;
  diag["prb_violations"] = g.prb_violations;
  diag["invariant_checks"] = g.invariant_checks;
  diag["invariant_failures"] = g.invariant_failures;
  diag["ai_duplicate_deliveries"] = g.ai_duplicate_deliveries;
  diag["ai_dl_out_of_order"] = g.ai_dl_out_of_order;
  diag["tb_urllc"] = g.tb_urllc;
  diag["tb_urllc_failed"] = g.tb_urllc_failed;
  diag["tb_ai"] = g.tb_ai;
  diag["tb_ai_failed"] = g.tb_ai_failed;
  diag["ai_prb_share_dl"] = g.ai_prb_share_dl;
  diag["ai_prb_share_ul"] = g.ai_prb_share_ul;
  out["diag"] = diag;
  return out;
}

// transitions given as (time_ns, value) pairs
metrics::StateTrace make_trace(const std::vector<std::pair<int64_t, int>>& tr, int64_t horizon_ns) {
  metrics::TraceBuilder b;
  for (const auto& [t, v] : tr) b.set(SimTime::from_ns(t), static_cast<uint8_t>(v != 0));
  return b.finish(SimTime::from_ns(horizon_ns));
}

std::vector<std::pair<int64_t, int>> pairs(const metrics::StateTrace& s) {
  std::vector<std::pair<int64_t, int>> out;
  for (const metrics::Transition& t : s.transitions) out.emplace_back(t.time.ns(), t.value);
  return out;
}

py::dict summary_dict(const experiments::PointSummary& p) {
  py::dict d;
  d["n_devices"] = p.n_devices;
  d["eta"] = p.eta;
  d["n_required"] = p.n_required;
  d["model_bytes"] = p.model_bytes;
  d["runs"] = p.runs;
  d["avail_samples"] = p.avail_samples;
  d["avail_median"] = p.avail_median;
  d["avail_p01"] = p.avail_p01;
  d["requirement_met"] = p.requirement.pass;
  d["rounds"] = p.rounds;
  d["delay_median"] = p.delay.median;
  return d;
}

}  // namespace

PYBIND11_MODULE(_coexist, m) {
  m.doc() = "URLLC and federated-learning coexistence simulator";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<fl::NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<experiments::OutputError>(m, "OutputError", PyExc_OSError);

  py::class_<ScenarioConfig>(m, "Config")
      .def(py::init([](const std::string& profile) { return ScenarioConfig::defaults(profile); }),
           py::arg("profile") = "full")
      .def_static("parse", [](const std::string& text, const std::string& profile) {
            return parse_config_text(text, profile);
          }, py::arg("text"), py::arg("profile") = "")
      .def_static("load", [](const std::filesystem::path& p, const std::string& profile) {
            return parse_config(p, profile);
          }, py::arg("path"), py::arg("profile") = "")
      .def("to_text", &ScenarioConfig::to_text)
      .def("hash_hex", &ScenarioConfig::hash_hex)
      .def_property_readonly("duration_s", [](const ScenarioConfig& c) { return c.sim.duration_s; })
      .def_property_readonly("seed", [](const ScenarioConfig& c) { return c.sim.seed; })
      .def_property_readonly("n_devices", [](const ScenarioConfig& c) { return c.fl.n_devices; })
      .def_property_readonly("n_required", [](const ScenarioConfig& c) { return c.fl.n_required; })
      .def_property_readonly("eta", [](const ScenarioConfig& c) { return c.eta; })
      .def("__eq__", [](const ScenarioConfig& a, const ScenarioConfig& b) { return a == b; })
      .def("__repr__", [](const ScenarioConfig& c) { return "<Config " + c.hash_hex() + ">"; });

  m.def("config_keys", &config_keys);
  m.def("required_uploads", &required_uploads, py::arg("eta"), py::arg("n_devices"));

  m.def("run_scenario", [](const ScenarioConfig& cfg, uint64_t seed) {
          RunResult r;
          {
            py::gil_scoped_release nogil;
            r = run_scenario(cfg, seed);
          }
          return to_dict(r);
        }, py::arg("config"), py::arg("seed"));

  m.def("iteration_delay", [](const std::vector<double>& c, int n, double d_pr) {
          return fl::iteration_delay(c, n, d_pr);
        }, py::arg("completion_s"), py::arg("n"), py::arg("master_compute_s") = 0.0);

  m.def("survival", [](const std::vector<std::pair<int64_t, int>>& x, int64_t horizon_ns, int64_t survival_ns) {
          return pairs(metrics::apply_survival(make_trace(x, horizon_ns), SimTime::from_ns(survival_ns)));
        }, py::arg("transitions"), py::arg("horizon_ns"), py::arg("survival_ns"));

  m.def("availability", [](const std::vector<std::pair<int64_t, int>>& x, int64_t horizon_ns, int64_t survival_ns) {
          const SimTime h = SimTime::from_ns(horizon_ns);
          return metrics::availability(metrics::apply_survival(make_trace(x, horizon_ns), SimTime::from_ns(survival_ns)), h);
        }, py::arg("transitions"), py::arg("horizon_ns"), py::arg("survival_ns") = 0);

  m.def("percentile", [](const std::vector<double>& s, double p) { return metrics::percentile(s, p); },
        py::arg("samples"), py::arg("p"));

  m.def("sweep_eval1", [](const ScenarioConfig& base, int n_devices, const std::vector<double>& etas, int seeds,
                          unsigned threads) {
          const auto specs = experiments::plan_eval1(base, n_devices, etas, seeds);
          std::vector<experiments::PointSummary> pts;
          {
            py::gil_scoped_release nogil;
            const auto results = experiments::execute(specs, threads);
            pts = experiments::summarize(experiments::urllc_rows(results), experiments::ai_rows(results),
                                         base.metrics.a_req, base.metrics.gamma);
          }
          py::list out;
          for (const auto& p : pts) out.append(summary_dict(p));
          return out;
        }, py::arg("base"), py::arg("n_devices"), py::arg("etas"), py::arg("seeds") = 1, py::arg("threads") = 1);
}

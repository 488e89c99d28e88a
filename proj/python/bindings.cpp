#include "ergcount/harness.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace ergcount;

namespace {

// levels: [[value, [[a, b], ...]], ...] with exact rationals as strings
StepFunction step_from_json(const std::string& text) {
  json j = json::parse(text);
  std::vector<std::pair<Scaled, IntervalSet>> levels;
  for (const json& lv : j) {
    std::vector<std::pair<Scaled, Scaled>> ivs;
    for (const json& iv : lv.at(1)) {
      ivs.emplace_back(parse_scaled(iv.at(0).get<std::string>()), parse_scaled(iv.at(1).get<std::string>()));
    }
    levels.emplace_back(parse_scaled(lv.at(0).get<std::string>()), IntervalSet::of(ivs));
  }
  return StepFunction::from_levels(levels);
}

}  // namespace

PYBIND11_MODULE(_ergcount, m) {
  m.doc() = "exact counting constructions";
  m.attr("schema_version") = kSchemaVersion;

  py::register_exception<SchemaError>(m, "SchemaError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<BudgetError>(m, "BudgetError", PyExc_RuntimeError);
  py::register_exception<CapExceeded>(m, "CapExceeded", PyExc_RuntimeError);

  m.def(
      "run",
      [](const std::string& config) {
        RunConfig cfg = RunConfig::from_json(json::parse(config));
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run(cfg);
        }
        py::object artifact = r.artifact ? py::object(py::str(*r.artifact)) : py::object(py::none());
        return py::make_tuple(report_document(cfg, r.report).dump(), artifact, r.estimate.dump());
      },
      py::arg("config"));

  m.def(
      "count_N",
      [](const std::string& levels, uint64_t J, bool wrap, const std::string& x, const std::string& n) {
        return count_N(step_from_json(levels), OrbitSpec{J, wrap}, parse_scaled(x), parse_scaled(n)).get_str();
      },
      py::arg("levels"), py::arg("J"), py::arg("wrap"), py::arg("x"), py::arg("n"));
  m.def(
      "brute_force_N",
      [](const std::string& levels, uint64_t J, bool wrap, const std::string& x, const std::string& n,
         const std::string& cap) {
        return brute_force_N(step_from_json(levels), OrbitSpec{J, wrap}, parse_scaled(x), parse_scaled(n), Int(cap))
            .get_str();
      },
      py::arg("levels"), py::arg("J"), py::arg("wrap"), py::arg("x"), py::arg("n"), py::arg("cap"));

  m.def("m_p", [](long p) { return m_p(Int(p)); }, py::arg("p"));
  m.def(
      "life_tower",
      [](int M, int k_max) {
        LifeTower t(M, k_max);
        std::vector<std::string> out;
        for (int k = 1; k <= k_max; ++k) out.push_back(t.c(k).get_str());
        return out;
      },
      py::arg("M"), py::arg("k_max"));
  m.def(
      "nu_compositional", [](int M, int k, const std::string& N) { return nu_compositional(M, k, Int(N)).get_str(); },
      py::arg("M"), py::arg("k"), py::arg("N"));

  m.def(
      "save_base", [](const std::string& params) { return save_base(build_base(BaseParams::from_json(json::parse(params)))).dump(); },
      py::arg("params"));
  // returns the system's JSON form after validation
  m.def(
      "load_base", [](const std::string& doc) { return base_to_json(load_base(json::parse(doc))).dump(); },
      py::arg("doc"));
}

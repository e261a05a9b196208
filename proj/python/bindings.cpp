#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "invcarson/study.hpp"

namespace py = pybind11;
using namespace invcarson;

namespace {

const Catalog& catalog_or_default(const Catalog* c) { return c ? *c : default_catalog(); }

SolverOptions solver_options(int starts, std::uint64_t seed, int workers) {
  SolverOptions s;
  s.starts = starts;
  s.seed = seed;
  s.workers = workers > 0 ? workers : default_workers();
  return s;
}

ModelOptions model_options(std::optional<double> temperature) {
  ModelOptions m;
  m.known_temperature = temperature;
  return m;
}

Combination combination(const Catalog& cat, const std::string& config, const std::string& material) {
  return {cat.config(config), cat.material(material)};
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Forward and inverse Carson line-parameter calculations";

  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, (std::string(to_string(e.kind())) + ": " + e.what()).c_str());
    }
  });

  py::enum_<LineKind>(m, "LineKind").value("OVERHEAD", LineKind::Overhead).value("CABLE", LineKind::Cable);
  py::enum_<ModelVar>(m, "Var")
      .value("R", ModelVar::R)
      .value("T", ModelVar::T)
      .value("U1", ModelVar::U1)
      .value("U2", ModelVar::U2)
      .value("V1", ModelVar::V1)
      .value("V_REF", ModelVar::VRef)
      .value("T_NOM", ModelVar::TNom);

  py::class_<Catalog>(m, "Catalog")
      .def_static("load", &load_catalog, py::arg("path"))
      .def_static("default", &default_catalog, py::return_value_policy::reference)
      .def("configs", [](const Catalog& c) {
        std::vector<std::string> out;
        for (const auto& x : c.configs) out.push_back(x.name);
        return out;
      })
      .def("conductors", [](const Catalog& c) {
        std::vector<std::string> out;
        for (const auto& x : c.conductors) out.push_back(x.code);
        return out;
      })
      .def("materials", [](const Catalog& c) {
        std::vector<std::string> out;
        for (const auto& x : c.materials) out.push_back(x.name);
        return out;
      });

  py::class_<SequenceComponents>(m, "SequenceComponents")
      .def(py::init<>())
      .def_readwrite("R00", &SequenceComponents::R00)
      .def_readwrite("X00", &SequenceComponents::X00)
      .def_readwrite("R11", &SequenceComponents::R11)
      .def_readwrite("X11", &SequenceComponents::X11)
      .def_readwrite("B00", &SequenceComponents::B00)
      .def_readwrite("B11", &SequenceComponents::B11)
      .def("__repr__", [](const SequenceComponents& s) {
        return py::str("SequenceComponents(R00={}, X00={}, R11={}, X11={})").format(s.R00, s.X00, s.R11, s.X11);
      });

  py::class_<SequenceReference>(m, "SequenceReference")
      .def(py::init([](double R11, double X11, std::optional<double> R00, std::optional<double> X00,
                       std::optional<double> B00, std::optional<double> B11, LineKind kind) {
             SequenceReference r;
             r.R00 = R00;
             r.X00 = X00;
             r.R11 = R11;
             r.X11 = X11;
             r.B00 = B00;
             r.B11 = B11;
             r.kind = kind;
             r.check();
             return r;
           }),
           py::arg("R11"), py::arg("X11"), py::arg("R00") = py::none(), py::arg("X00") = py::none(),
           py::arg("B00") = py::none(), py::arg("B11") = py::none(), py::arg("kind") = LineKind::Overhead)
      .def_static("from_components", &SequenceReference::from, py::arg("components"), py::arg("kind"))
      .def_readwrite("R00", &SequenceReference::R00)
      .def_readwrite("X00", &SequenceReference::X00)
      .def_readwrite("R11", &SequenceReference::R11)
      .def_readwrite("X11", &SequenceReference::X11)
      .def_readwrite("B00", &SequenceReference::B00)
      .def_readwrite("B11", &SequenceReference::B11)
      .def_readwrite("kind", &SequenceReference::kind);

  py::class_<FeasibilityResult>(m, "FeasibilityResult")
      .def_property_readonly("config", [](const FeasibilityResult& r) { return r.combination.config.name; })
      .def_property_readonly("material", [](const FeasibilityResult& r) { return r.combination.material.name; })
      .def_readonly("z_diff", &FeasibilityResult::z_diff)
      .def_readonly("fitted", &FeasibilityResult::fitted)
      .def_property_readonly("status", [](const FeasibilityResult& r) { return std::string(to_string(r.status)); })
      .def_property_readonly("variables", [](const FeasibilityResult& r) {
        py::dict d;
        for (const auto& v : r.variables) d[py::str(std::string(to_string(v.var)))] = v.value;
        return d;
      });

  py::class_<BoundEntry>(m, "BoundEntry")
      .def_property_readonly("var", [](const BoundEntry& b) { return std::string(to_string(b.var)); })
      .def_readonly("min", &BoundEntry::min)
      .def_readonly("max", &BoundEntry::max)
      .def_property_readonly("gap", &BoundEntry::gap);

  py::class_<SlackResult>(m, "SlackResult")
      .def_readonly("beta", &SlackResult::beta)
      .def_readonly("feasible", &SlackResult::feasible)
      .def_readonly("min_deviation", &SlackResult::min_deviation)
      .def_readonly("ranges", &SlackResult::ranges);

  py::class_<CandidateMismatch>(m, "CandidateMismatch")
      .def_readonly("candidate", &CandidateMismatch::candidate)
      .def_readonly("z_diff", &CandidateMismatch::z_diff)
      .def_readonly("eliminated", &CandidateMismatch::eliminated)
      .def_readonly("recovered", &CandidateMismatch::recovered)
      .def_readonly("standard", &CandidateMismatch::standard)
      .def_readonly("percent", &CandidateMismatch::percent);

  py::class_<ValidationReport>(m, "ValidationReport")
      .def_property_readonly("flags",
                             [](const ValidationReport& r) {
                               std::vector<std::string> out;
                               for (auto f : r.flags) out.emplace_back(to_string(f));
                               return out;
                             })
      .def_readonly("min_zdiff_full", &ValidationReport::min_zdiff_full)
      .def_readonly("zero_sequence_dropped", &ValidationReport::zero_sequence_dropped)
      .def_readonly("ranking", &ValidationReport::ranking)
      .def_readonly("candidates", &ValidationReport::candidates)
      .def_readonly("best", &ValidationReport::best);

  m.def(
      "forward",
      [](const std::string& config, std::optional<std::string> conductor, std::optional<std::string> material,
         std::optional<double> area, double temperature, std::optional<double> t_nom, bool include_shunt,
         const Catalog* cat_in) {
        const Catalog& cat = catalog_or_default(cat_in);
        const auto& c = cat.config(config);
        LineInput in;
        std::string mat = material.value_or("");
        if (conductor) {
          const auto& e = cat.conductor(*conductor);
          in = standard_line_input(cat, c, e, temperature);
          if (mat.empty()) mat = e.material;
        } else {
          const auto* sg = cat.standard_geometry(c.name);
          if (!sg) throw Error(ErrorKind::Contract, "no standard geometry for " + c.name);
          in.T = temperature;
          in.geometry = {sg->u1, sg->u2, sg->v1, sg->v_ref};
          if (c.is_cable() && !c.is_sector()) in.geometry.u1.reset();
        }
        if (area) in.r = radius_for_area(c.strand.N, *area);
        if (t_nom) in.t_nom = *t_nom;
        if (mat.empty() || in.r <= 0) throw Error(ErrorKind::Contract, "give a conductor, or a material and an area");
        ForwardOptions fo;
        fo.include_shunt = include_shunt && !c.is_sector();
        fo.bounds = &cat.bounds;
        return forward_pipeline(c, cat.material(mat), in, fo);
      },
      "Sequence components of a line on its configuration's standard geometry.", py::arg("config"),
      py::arg("conductor") = py::none(), py::arg("material") = py::none(), py::arg("area") = py::none(),
      py::arg("temperature") = 20.0, py::arg("t_nom") = py::none(), py::arg("include_shunt") = true,
      py::arg("catalog") = nullptr);

  m.def("zdiff", &zdiff, py::arg("fitted"), py::arg("ref"));

  m.def(
      "recover",
      [](const SequenceReference& ref, std::optional<int> n_cond, std::optional<bool> buried,
         std::optional<double> temperature, int starts, std::uint64_t seed, int workers, const Catalog* cat) {
        RecoverOptions ro;
        ro.solver = solver_options(starts, seed, workers);
        ro.n_cond = n_cond;
        ro.buried = buried;
        ro.model = model_options(temperature);
        py::gil_scoped_release release;
        return recover(ref, catalog_or_default(cat), ro);
      },
      "Feasibility for every candidate combination, best first.", py::arg("ref"), py::arg("n_cond") = py::none(),
      py::arg("buried") = py::none(), py::arg("temperature") = py::none(), py::arg("starts") = 16,
      py::arg("seed") = SolverOptions{}.seed, py::arg("workers") = 0, py::arg("catalog") = nullptr);

  m.def(
      "tighten_bounds",
      [](const std::string& config, const std::string& material, const SequenceComponents& starred,
         std::optional<double> temperature, int starts, std::uint64_t seed, int workers, const Catalog* cat_in) {
        const Catalog& cat = catalog_or_default(cat_in);
        py::gil_scoped_release release;
        return tighten_bounds(cat, combination(cat, config, material), starred, solver_options(starts, seed, workers),
                              model_options(temperature))
            .entries;
      },
      "Min and max of every variable with the diagonal sequence values held fixed.", py::arg("config"),
      py::arg("material"), py::arg("starred"), py::arg("temperature") = py::none(), py::arg("starts") = 16,
      py::arg("seed") = SolverOptions{}.seed, py::arg("workers") = 0, py::arg("catalog") = nullptr);

  m.def(
      "slack_analysis",
      [](const std::string& config, const std::string& material, const SequenceReference& ref, double beta,
         std::vector<ModelVar> vars, std::optional<double> temperature, int starts, std::uint64_t seed, int workers,
         const Catalog* cat_in) {
        const Catalog& cat = catalog_or_default(cat_in);
        py::gil_scoped_release release;
        return slack_analysis(cat, combination(cat, config, material), ref, beta, vars,
                              solver_options(starts, seed, workers), model_options(temperature));
      },
      "Feasibility and variable ranges when every component may deviate by beta.", py::arg("config"),
      py::arg("material"), py::arg("ref"), py::arg("beta"), py::arg("vars") = std::vector<ModelVar>{},
      py::arg("temperature") = py::none(), py::arg("starts") = 16, py::arg("seed") = SolverOptions{}.seed,
      py::arg("workers") = 0, py::arg("catalog") = nullptr);

  m.def(
      "validate",
      [](const SequenceReference& ref, std::optional<int> n_cond, std::optional<bool> buried,
         std::optional<double> temperature, int starts, std::uint64_t seed, int workers, const Catalog* cat) {
        ValidationOptions vo;
        vo.recover.solver = solver_options(starts, seed, workers);
        vo.recover.n_cond = n_cond;
        vo.recover.buried = buried;
        vo.recover.model = model_options(temperature);
        py::gil_scoped_release release;
        return validate_record(ref, catalog_or_default(cat), vo);
      },
      "Screen a record and report the % mismatch of each standard candidate.", py::arg("ref"),
      py::arg("n_cond") = py::none(), py::arg("buried") = py::none(), py::arg("temperature") = py::none(),
      py::arg("starts") = 16, py::arg("seed") = SolverOptions{}.seed, py::arg("workers") = 0,
      py::arg("catalog") = nullptr);
}

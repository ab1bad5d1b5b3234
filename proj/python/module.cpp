#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "curvscan/report.hpp"

namespace py = pybind11;
using namespace curvscan;

namespace {

py::object json_to_py(const ojson& j) {
  switch (j.type()) {
    case ojson::value_t::object: {
      py::dict d;
      for (auto it = j.begin(); it != j.end(); ++it)
        d[py::str(it.key())] = json_to_py(it.value());
      return d;
    }
    case ojson::value_t::array: {
      py::list l;
      for (const auto& v : j) l.append(json_to_py(v));
      return l;
    }
    case ojson::value_t::string:
      return py::str(j.get<std::string>());
    case ojson::value_t::boolean:
      return py::bool_(j.get<bool>());
    case ojson::value_t::number_integer:
      return py::int_(j.get<long long>());
    case ojson::value_t::number_unsigned:
      return py::int_(j.get<unsigned long long>());
    case ojson::value_t::number_float:
      return py::float_(j.get<double>());
    default:
      return py::none();
  }
}

ClassifyConfig make_config(int points, std::uint64_t seed, double abs_tol,
                           double rel_tol, const std::string& label) {
  ClassifyConfig c;
  c.points = points;
  c.seed = seed;
  c.tol.abs_tol = abs_tol;
  c.tol.rel_tol = rel_tol;
  c.input_label = label;
  return c;
}

py::list matrix_to_py(const Matrix& m) {
  py::list rows;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    py::list row;
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.append(m(i, j));
    rows.append(row);
  }
  return rows;
}

py::dict curvature_at(const MetricChart& chart, const std::map<std::string, double>& pt) {
  PointSample p;
  p.values.reserve(chart.coords().size());
  for (const auto& c : chart.coords()) {
    auto it = pt.find(c);
    if (it == pt.end()) throw std::invalid_argument("point misses coordinate " + c);
    p.values.push_back(it->second);
  }
  CurvatureEngine engine(chart);
  CurvatureSample s = engine.sample(p);

  py::dict out;
  out["g"] = matrix_to_py(s.g);
  out["g_inv"] = matrix_to_py(s.g_inv);
  const int n = s.n;
  py::list riem;
  for (int i = 0; i < n; ++i) {
    py::list li;
    for (int j = 0; j < n; ++j) {
      py::list lj;
      for (int k = 0; k < n; ++k) {
        py::list lk;
        for (int l = 0; l < n; ++l) lk.append(s.riemann(i, j, k, l));
        lj.append(lk);
      }
      li.append(lj);
    }
    riem.append(li);
  }
  out["riemann"] = riem;
  out["ricci"] = matrix_to_py(s.ricci);
  out["ricci2"] = matrix_to_py(s.ricci2);
  out["ricci3"] = matrix_to_py(s.ricci3);
  out["ricci4"] = matrix_to_py(s.ricci4);
  out["kappa"] = s.kappa;
  out["kappa2"] = s.kappa2;
  if (s.weyl) {
    double w = s.weyl->max_abs();
    out["weyl_max_abs"] = w;
  } else {
    out["weyl_max_abs"] = py::none();
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(curvscan, m) {
  m.doc() = "symbolic-numeric curvature analysis of coordinate metrics";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ChartError>(m, "ChartError", PyExc_ValueError);
  py::register_exception<EvalError>(m, "EvalError", PyExc_ArithmeticError);
  py::register_exception<SamplingError>(m, "SamplingError", PyExc_RuntimeError);

  py::class_<Expr>(m, "Expr")
      .def("__str__", [](const Expr& e) { return to_string(e); })
      .def("__repr__",
           [](const Expr& e) { return "Expr(\"" + to_string(e) + "\")"; })
      .def("diff",
           [](const Expr& e, const std::string& var) { return differentiate(e, var); },
           py::arg("var"))
      .def("simplify", [](const Expr& e) { return simplify_basic(e); })
      .def("__call__",
           [](const Expr& e, const Env& env) { return evaluate(e, env); },
           py::arg("env"));

  m.def(
      "parse_expr",
      [](const std::string& src, const std::vector<std::string>& coords,
         const std::vector<std::string>& params) { return parse_expr(src, coords, params); },
      py::arg("source"), py::arg("coords"),
      py::arg("params") = std::vector<std::string>{});

  py::class_<MetricChart>(m, "MetricChart")
      .def_static("load", &MetricChart::load, py::arg("path"))
      .def_static("from_string", &MetricChart::from_string, py::arg("text"))
      .def_property_readonly("dim", &MetricChart::dim)
      .def_property_readonly("coords", &MetricChart::coords)
      .def("to_file_string", &MetricChart::to_file_string)
      .def("scaled", &MetricChart::scaled, py::arg("factor"))
      .def("curvature_at", &curvature_at, py::arg("point"),
           "All curvature objects at one chart point, as plain lists.");

  m.def(
      "classify",
      [](const MetricChart& chart, int points, std::uint64_t seed, double abs_tol,
         double rel_tol, const std::string& label) {
        return json_to_py(
            to_json(classify(chart, make_config(points, seed, abs_tol, rel_tol, label))));
      },
      py::arg("chart"), py::arg("points") = 25, py::arg("seed") = 42,
      py::arg("abs_tol") = 1e-12, py::arg("rel_tol") = 1e-8,
      py::arg("label") = "<chart>",
      "Classify the curvature structure; returns the JSON report as a dict.");

  py::class_<WarpedSpec>(m, "WarpedSpec")
      .def(py::init<MetricChart, MetricChart, const std::string&>(), py::arg("base"),
           py::arg("fiber"), py::arg("warp"))
      .def_static("load", &WarpedSpec::load, py::arg("path"))
      .def_property_readonly("base", [](const WarpedSpec& s) { return s.base; })
      .def_property_readonly("fiber", [](const WarpedSpec& s) { return s.fiber; })
      .def("assemble", &WarpedSpec::assemble);

  m.def(
      "verify_warped",
      [](const WarpedSpec& spec, int points, std::uint64_t seed, double abs_tol,
         double rel_tol) {
        WarpedAnalyzer analyzer(spec);
        return json_to_py(to_json(analyzer.verify_assembly(
            make_config(points, seed, abs_tol, rel_tol, "<spec>"))));
      },
      py::arg("spec"), py::arg("points") = 20, py::arg("seed") = 42,
      py::arg("abs_tol") = 1e-12, py::arg("rel_tol") = 1e-8,
      "Verify the blockwise warped-product formulas against direct computation.");

  m.def("corpus_cases", []() {
    std::vector<std::string> names;
    for (const auto& c : builtin_cases()) names.push_back(c.name);
    return names;
  });
  m.def(
      "run_case",
      [](const std::string& name, int points, std::uint64_t seed) {
        return json_to_py(to_json(run_case(name, make_config(points, seed, 1e-12, 1e-8, name))));
      },
      py::arg("name"), py::arg("points") = 25, py::arg("seed") = 42);
  m.def("export_corpus", &export_corpus, py::arg("dir"));
  m.def(
      "verify_paper_text",
      [](int points, std::uint64_t seed) {
        ClassifyConfig config = make_config(points, seed, 1e-12, 1e-8, "verify-paper");
        std::vector<CaseReport> reports;
        for (const auto& c : builtin_cases()) reports.push_back(run_case(c.name, config));
        return dump_stable(verify_paper_json(reports, config));
      },
      py::arg("points") = 25, py::arg("seed") = 42,
      "The verify-paper JSON document as a string (stable byte-for-byte).");
}

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qsum/config.hpp"
#include "qsum/qkernels.hpp"
#include "qsum/report.hpp"

namespace py = pybind11;
using namespace qsum;

namespace {

py::dict report_dict(const ValidationReport& rep) {
  py::list v;
  for (const auto& x : rep.violations) {
    py::dict d;
    d["clause"] = x.clause;
    d["detail"] = x.detail;
    v.append(d);
  }
  py::dict out;
  out["ok"] = rep.ok();
  out["violations"] = v;
  return out;
}

py::array_t<cplx> series_array(const FormalSeries& U) {
  const int rows = U.size(), cols = rows > 0 ? U[0].size() : 0;
  py::array_t<cplx> a({rows, cols});
  auto m = a.mutable_unchecked<2>();
  for (int n = 0; n < rows; ++n)
    for (int i = 0; i < cols; ++i) m(n, i) = U[n][i];
  return a;
}

py::dict solve_dict(const SolveReport& r) {
  py::dict d;
  d["sector"] = r.index;
  d["eps"] = r.eps;
  d["contraction_k1"] = r.w_k1.contraction_ratio;
  d["contraction_k2"] = r.w_k2.contraction_ratio;
  d["residual_k1"] = r.residual_k1;
  d["residual_k2"] = r.residual_k2;
  d["uniqueness_gap_k1"] = r.uniqueness_gap_k1;
  d["uniqueness_gap_k2"] = r.uniqueness_gap_k2;
  d["acceleration_sup_rel_diff"] = r.acceleration.sup_rel_diff;
  d["pde_max_rel"] = r.pde.max_rel;
  d["pde_per_point"] = r.pde.per_point;
  d["seconds"] = r.seconds;
  return d;
}

}  // namespace

PYBIND11_MODULE(_qsum, m) {
  m.doc() = "q-Borel/q-Laplace summation pipeline";

  // Translators run newest first, so the base class goes first.
  py::register_exception<Error>(m, "QsumError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

  m.def(
      "theta", [](cplx x, double q, double k) { return theta(ThetaParams{q, k}, x); },
      py::arg("x"), py::arg("q") = 2.0, py::arg("k") = 1.0, "Jacobi theta of order k");
  m.def(
      "theta_reciprocal",
      [](cplx x, double q, double k) { return theta_reciprocal(ThetaParams{q, k}, x); },
      py::arg("x"), py::arg("q") = 2.0, py::arg("k") = 1.0);
  m.def("pi_q_k", &pi_q_k, py::arg("q"), py::arg("k"));
  m.def("kappa", &kappa_of, py::arg("k1"), py::arg("k2"));
  m.def("format_double", &format_double);

  m.def("example_config", &example_config_text, py::arg("A") = 10.0,
        "scenario file text of the built-in example");
  m.def(
      "validate",
      [](const std::string& text) { return report_dict(validate_scenario(parse_config(text))); },
      py::arg("config"), "hypothesis report of a scenario file text");
  m.def(
      "formal",
      [](const std::string& text, int N, cplx eps) {
        const ScenarioConfig cfg = parse_config(text);
        const ValidationReport rep = validate_problem(cfg.problem);
        if (!rep.ok()) throw DomainError("problem fails validation: " + rep.violations[0].clause);
        return series_array(formal_coefficients(cfg.problem, N, eps));
      },
      py::arg("config"), py::arg("N"), py::arg("eps"),
      "formal coefficients U_n on the m grid, shape (N + 1, n_points)");
  m.def(
      "solve",
      [](const std::string& text, int sector, std::uint64_t seed) {
        ScenarioConfig cfg = parse_config(text);
        cfg.seed = seed;
        const ValidationReport rep = validate_scenario(cfg);
        if (!rep.ok()) throw DomainError("scenario fails validation: " + rep.violations[0].clause);
        SolveReport r;
        {
          py::gil_scoped_release release;
          r = solve_single(cfg, sector);
        }
        return solve_dict(r);
      },
      py::arg("config"), py::arg("sector") = 0, py::arg("seed") = 0,
      "single-sample pipeline on one sector");
}

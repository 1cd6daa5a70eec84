#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "casimir/casimir.hpp"
#include "casimir/cli.hpp"
#include "casimir/errors.hpp"
#include "casimir/io.hpp"
#include "casimir/materials.hpp"
#include "casimir/roundtrip.hpp"

namespace py = pybind11;
using namespace casimir;

namespace {

// Own type so that pybind11's std::variant caster does not intercept the model.
struct Material {
  DielectricModel model;
};

Material perfect() { return {PerfectReflector{}}; }

py::object to_python(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

Backend parse_backend(const std::string& s) {
  if (s == "cholesky") return Backend::Cholesky;
  if (s == "hodlr") return Backend::Hodlr;
  throw DomainError("backend must be 'cholesky' or 'hodlr'");
}

ZeroFrequencyPolicy parse_policy(const std::string& s) {
  ZeroFrequencyPolicy p;
  if (s == "auto") return p;
  if (s == "drude") {
    p.kind = ZeroFrequencyPolicy::Kind::Drude;
  } else if (s == "perfect") {
    p.kind = ZeroFrequencyPolicy::Kind::Perfect;
  } else if (s.rfind("plasma:", 0) == 0) {
    p.kind = ZeroFrequencyPolicy::Kind::Plasma;
    p.omega_p = std::stod(s.substr(7));
  } else {
    throw DomainError("zero_frequency must be auto, drude, perfect or plasma:WP");
  }
  return p;
}

RoundTripParams block_params(double R, double L, double xi, int m, int ell_dim,
                             const Material& plane, const Material& sphere) {
  RoundTripParams p;
  p.R = R;
  p.L = L;
  p.xi = xi;
  p.m = m;
  p.ell_dim = ell_dim > 0 ? ell_dim : default_ell_dim(R, L);
  p.plane_model = plane.model;
  p.sphere_model = sphere.model;
  return p;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Sphere-plane Casimir interaction in the scattering approach";

  py::register_exception<DomainError>(mod, "DomainError", PyExc_ValueError);
  py::register_exception<ConvergenceError>(mod, "ConvergenceError", PyExc_RuntimeError);
  py::register_exception<NotPositiveDefinite>(mod, "NotPositiveDefinite", PyExc_RuntimeError);
  py::register_exception<ParseError>(mod, "ParseError", PyExc_ValueError);

  py::class_<Material>(mod, "Material")
      .def_static("perfect", &perfect)
      .def_static("constant", [](double eps) { return Material{Constant{eps}}; }, py::arg("epsilon"))
      .def_static("plasma", [](double wp) { return Material{materials::make_plasma(wp)}; },
                  py::arg("omega_p"))
      .def_static("drude",
                  [](double wp, double g) { return Material{materials::make_drude(wp, g)}; },
                  py::arg("omega_p"), py::arg("gamma"))
      .def_static("tabulated",
                  [](std::vector<double> xi, std::vector<double> eps, bool extrapolate) {
                    return Material{materials::make_tabulated(std::move(xi), std::move(eps), extrapolate)};
                  },
                  py::arg("xi"), py::arg("epsilon"), py::arg("extrapolate") = false)
      .def_static("gold_drude", [] { return Material{materials::gold_drude()}; })
      .def_static("gold_plasma", [] { return Material{materials::gold_plasma()}; })
      .def_static("parse",
                  [](const std::string& text, bool extrapolate) {
                    return Material{materials::parse_model(text, extrapolate)};
                  },
                  py::arg("text"), py::arg("extrapolate") = false)
      .def("epsilon", [](const Material& m, double xi) { return materials::epsilon(m.model, xi); },
           py::arg("xi"))
      .def("__repr__",
           [](const Material& m) { return "Material(" + materials::describe(m.model) + ")"; });

  py::class_<JobSpec>(mod, "JobSpec")
      .def(py::init([](double R, double L, double T, const Material& plane,
                       const Material& sphere, int ell_dim, const std::string& backend,
                       const std::string& zero_frequency, int jobs) {
             JobSpec s;
             s.R = R;
             s.L = L;
             s.T = T;
             s.plane = plane.model;
             s.sphere = sphere.model;
             s.ell_dim = ell_dim;
             s.backend = parse_backend(backend);
             s.zero_frequency = parse_policy(zero_frequency);
             s.jobs = jobs;
             return s;
           }),
           py::arg("R"), py::arg("L"), py::arg("T") = 0.0, py::arg("plane") = perfect(),
           py::arg("sphere") = perfect(), py::arg("ell_dim") = 0,
           py::arg("backend") = "hodlr", py::arg("zero_frequency") = "auto", py::arg("jobs") = 1)
      .def_readwrite("R", &JobSpec::R)
      .def_readwrite("L", &JobSpec::L)
      .def_readwrite("T", &JobSpec::T)
      .def_property("plane", [](const JobSpec& s) { return Material{s.plane}; },
                    [](JobSpec& s, const Material& m) { s.plane = m.model; })
      .def_property("sphere", [](const JobSpec& s) { return Material{s.sphere}; },
                    [](JobSpec& s, const Material& m) { s.sphere = m.model; })
      .def_readwrite("ell_dim", &JobSpec::ell_dim)
      .def_readwrite("jobs", &JobSpec::jobs)
      .def_property("backend", [](const JobSpec& s) { return to_string(s.backend); },
                    [](JobSpec& s, const std::string& b) { s.backend = parse_backend(b); })
      .def_property("zero_frequency", [](const JobSpec& s) { return to_string(s.zero_frequency); },
                    [](JobSpec& s, const std::string& z) { s.zero_frequency = parse_policy(z); })
      .def_property("matsubara_tol", [](const JobSpec& s) { return s.tol.matsubara_rel; },
                    [](JobSpec& s, double v) { s.tol.matsubara_rel = v; })
      .def_property("m_tol", [](const JobSpec& s) { return s.tol.m_sum_rel; },
                    [](JobSpec& s, double v) { s.tol.m_sum_rel = v; })
      .def_property("quad_tol", [](const JobSpec& s) { return s.tol.quad_rel; },
                    [](JobSpec& s, double v) { s.tol.quad_rel = v; })
      .def_property("xi_tol", [](const JobSpec& s) { return s.tol.xi_quad_rel; },
                    [](JobSpec& s, double v) { s.tol.xi_quad_rel = v; })
      .def_property("leaf_size", [](const JobSpec& s) { return s.hodlr.leaf_size; },
                    [](JobSpec& s, int v) { s.hodlr.leaf_size = v; })
      .def_property("hodlr_tol", [](const JobSpec& s) { return s.hodlr.tol; },
                    [](JobSpec& s, double v) { s.hodlr.tol = v; })
      .def("validate", &JobSpec::validate)
      .def("resolved_ell_dim", &JobSpec::resolved_ell_dim)
      .def("to_dict", [](const JobSpec& s) { return to_python(io::spec_json(s)); });

  mod.def("free_energy",
          [](const JobSpec& s) { return to_python(io::result_json(s, compute_free_energy(s))); },
          py::arg("spec"), "Free energy (J) with ledger and diagnostics, as a dict.");
  mod.def("force", [](const JobSpec& s) { return to_python(io::result_json(s, force(s))); },
          py::arg("spec"), "Force (N), PFA reference and correction, as a dict.");
  mod.def("pfa_force", &pfa_force, py::arg("spec"));
  mod.def("plane_plane_free_energy", &plane_plane_free_energy, py::arg("spec"), py::arg("L"));

  mod.def(
      "block_logdet",
      [](double R, double L, double xi, int m, int ell_dim, const Material& plane,
         const Material& sphere, const std::string& backend) {
        return block_logdet(block_params(R, L, xi, m, ell_dim, plane, sphere), parse_backend(backend));
      },
      py::arg("R"), py::arg("L"), py::arg("xi"), py::arg("m"), py::arg("ell_dim") = 0,
      py::arg("plane") = perfect(), py::arg("sphere") = perfect(), py::arg("backend") = "hodlr");
  mod.def(
      "scattering_matrix",
      [](double R, double L, double xi, int m, int ell_dim, const Material& plane,
         const Material& sphere) {
        return roundtrip::scattering_matrix(block_params(R, L, xi, m, ell_dim, plane, sphere));
      },
      py::arg("R"), py::arg("L"), py::arg("xi"), py::arg("m"), py::arg("ell_dim") = 0,
      py::arg("plane") = perfect(), py::arg("sphere") = perfect(),
      "1 - M in interleaved (ell, polarization) ordering.");

  mod.def(
      "pfa_correction_sweep",
      [](const JobSpec& base, const std::vector<double>& radii, const std::vector<double>& gaps) {
        py::list out;
        for (const auto& r : pfa_correction_sweep(base, radii, gaps)) {
          py::dict d;
          d["R"] = r.R;
          d["L"] = r.L;
          d["T"] = r.T;
          d["correction"] = r.correction;
          d["free_energy"] = r.free_energy;
          d["force"] = r.force;
          d["f_pfa"] = r.f_pfa;
          d["ok"] = r.ok;
          d["error"] = r.error;
          out.append(d);
        }
        return out;
      },
      py::arg("spec"), py::arg("radii"), py::arg("gaps"));

  mod.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line interface; returns (exit code, stdout, stderr).");
}

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include <json.hpp>

#include "ckn/analysis.hpp"
#include "ckn/commands.hpp"
#include "ckn/continuation.hpp"
#include "ckn/error.hpp"
#include "ckn/gn_ground_state.hpp"
#include "ckn/io.hpp"
#include "ckn/symmetric.hpp"

namespace py = pybind11;
using namespace ckn;

namespace {

py::array_t<double> field_array(const Field& u) {
  const auto& g = u.grid();
  py::array_t<double> a({g.n_s(), g.n_phi()});
  std::copy(u.values().begin(), u.values().end(), a.mutable_data());
  return a;
}

Field field_from(const GridPtr& grid, py::array_t<double, py::array::c_style | py::array::forcecast> a) {
  if (a.ndim() != 2 || a.shape(0) != grid->n_s() || a.shape(1) != grid->n_phi())
    throw InvalidSizeError("array shape must be (n_s, n_phi)");
  return Field(grid, std::vector<double>(a.data(), a.data() + a.size()));
}

py::dict norms_dict(const Norms& n) { return py::dict(py::arg("X") = n.X, py::arg("Y") = n.Y, py::arg("Z") = n.Z); }

py::dict point_dict(const BranchPoint& b) {
  return py::dict(py::arg("kappa") = b.kappa, py::arg("mu") = b.mu, py::arg("X") = b.X, py::arg("Y") = b.Y,
                  py::arg("Z") = b.Z, py::arg("t") = b.t, py::arg("asymmetry") = b.asymmetry,
                  py::arg("closed_form") = b.closed_form);
}

RunConfig config_from(const std::string& text) { return config_from_json(nlohmann::json::parse(text)); }

// Logs of the commands go to a string returned to Python.
template <class F>
auto logged(F&& f) {
  std::ostringstream log;
  auto r = f(log);
  return std::make_pair(std::move(r), log.str());
}

}  // namespace

PYBIND11_MODULE(_ckn, m) {
  m.doc() = "Symmetric and non-symmetric critical points of the CKN quotient on the cylinder";
  m.attr("__version__") = std::string(kVersion);

  auto base = py::register_exception<Error>(m, "CknError", PyExc_RuntimeError);
  py::register_exception<SolverError>(m, "SolverError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<InvalidSizeError>(m, "InvalidSizeError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<FellBackToSymmetricError>(m, "FellBackToSymmetricError", base.ptr());

  py::enum_<MeasureMode>(m, "MeasureMode")
      .value("probability", MeasureMode::probability)
      .value("surface", MeasureMode::surface);

  m.def("theta_critical", &theta_critical, py::arg("p"), py::arg("d"));
  m.def("mu_FS", &mu_FS, py::arg("p"), py::arg("d"));
  m.def("lambda1_H", &lambda1_H, py::arg("mu"), py::arg("p"), py::arg("d"));
  m.def("lambda_FS", &lambda_FS, py::arg("p"), py::arg("theta"), py::arg("d"));
  m.def("best_constant", &best_constant, py::arg("J"));
  m.def("sphere_area", &sphere_area, py::arg("d"));
  m.def(
      "soliton_norms",
      [](double mu, double p, int d, MeasureMode mode) { return norms_dict(soliton_norms(mu, p, d, mode)); },
      py::arg("mu"), py::arg("p"), py::arg("d") = 5, py::arg("measure_mode") = MeasureMode::surface);
  m.def(
      "symmetric_curve",
      [](std::vector<double> mus, double theta, int d, double p, MeasureMode mode) {
        std::vector<std::tuple<double, double, double, double>> out;
        for (const auto& q : symmetric_curve(mus, theta, make_params(d, p, theta, mode)))
          out.emplace_back(q.mu, q.Lambda, q.J, q.t);
        return out;
      },
      py::arg("mus"), py::arg("theta"), py::arg("d") = 5, py::arg("p") = 2.8,
      py::arg("measure_mode") = MeasureMode::surface, "List of (mu, Lambda, J, t) from closed-form norms.");

  py::class_<CylinderGrid, std::shared_ptr<CylinderGrid>>(m, "Grid")
      .def_property_readonly("L", &CylinderGrid::half_length)
      .def_property_readonly("n_s", &CylinderGrid::n_s)
      .def_property_readonly("n_phi", &CylinderGrid::n_phi)
      .def_property_readonly("d", [](const CylinderGrid& g) { return g.params().d; })
      .def_property_readonly("p", [](const CylinderGrid& g) { return g.params().p; })
      .def_property_readonly("s_nodes", [](const CylinderGrid& g) { return std::vector<double>(g.s_nodes().begin(), g.s_nodes().end()); })
      .def_property_readonly("phi_nodes", [](const CylinderGrid& g) { return std::vector<double>(g.phi_nodes().begin(), g.phi_nodes().end()); });

  m.def(
      "build_grid",
      [](double L, int n_s, int n_phi, int d, double p, MeasureMode mode) {
        return std::const_pointer_cast<CylinderGrid>(build_grid(L, n_s, n_phi, make_params(d, p, 1.0, mode)));
      },
      py::arg("L") = 10.0, py::arg("n_s") = 241, py::arg("n_phi") = 49, py::arg("d") = 5, py::arg("p") = 2.8,
      py::arg("measure_mode") = MeasureMode::surface);

  // Fields cross the boundary as (n_s, n_phi) arrays together with their grid.
  m.def(
      "sample_soliton", [](double mu, std::shared_ptr<CylinderGrid> g) { return field_array(sample_soliton(mu, g)); },
      py::arg("mu"), py::arg("grid"));
  m.def(
      "discrete_soliton", [](double mu, std::shared_ptr<CylinderGrid> g) { return field_array(discrete_soliton(mu, g)); },
      py::arg("mu"), py::arg("grid"));
  m.def(
      "evaluate_norms",
      [](std::shared_ptr<CylinderGrid> g, py::array_t<double> u) { return norms_dict(evaluate_norms(field_from(g, u))); },
      py::arg("grid"), py::arg("u"));
  m.def(
      "evaluate_Q",
      [](std::shared_ptr<CylinderGrid> g, py::array_t<double> u, double Lambda, double theta) {
        return evaluate_Q(field_from(g, u), Lambda, theta);
      },
      py::arg("grid"), py::arg("u"), py::arg("Lambda"), py::arg("theta"));
  m.def(
      "asymmetry", [](std::shared_ptr<CylinderGrid> g, py::array_t<double> u) { return asymmetry(field_from(g, u)); },
      py::arg("grid"), py::arg("u"));
  m.def(
      "lowest_eigenpair",
      [](std::shared_ptr<CylinderGrid> g, double kappa, py::array_t<double> V) {
        auto r = lowest_eigenpair(kappa, field_from(g, V));
        return py::make_tuple(r.lambda, field_array(r.u));
      },
      py::arg("grid"), py::arg("kappa"), py::arg("V"), "(lambda, u) for -Delta - kappa V.");
  m.def(
      "potential_from", [](std::shared_ptr<CylinderGrid> g, py::array_t<double> u) { return field_array(potential_from(field_from(g, u))); },
      py::arg("grid"), py::arg("u"));
  m.def(
      "critical_value", [](std::shared_ptr<CylinderGrid> g, py::array_t<double> u) { return critical_value(field_from(g, u)); },
      py::arg("grid"), py::arg("u"));
  m.def(
      "roothan_solve",
      [](std::shared_ptr<CylinderGrid> g, double kappa, py::array_t<double> V0) {
        auto r = roothan_solve(kappa, field_from(g, V0));
        return py::dict(py::arg("kappa") = r.kappa, py::arg("mu") = r.mu, py::arg("u_eq") = field_array(r.u_eq),
                        py::arg("V") = field_array(r.V), py::arg("lambda_history") = r.lambda_history,
                        py::arg("converged") = r.converged, py::arg("residual") = r.residual);
      },
      py::arg("grid"), py::arg("kappa"), py::arg("V0"));

  m.def(
      "compute_branch",
      [](std::shared_ptr<CylinderGrid> g, double mu0, double kappa_stop) {
        py::gil_scoped_release release;
        auto seed = initialize(mu0, -1.0, g);
        const double eta = seed.point.kappa / 200.0;
        auto down = continue_branch(seed, eta, Direction::down, 0.0);
        auto up = continue_branch(seed, eta, Direction::up, kappa_stop);
        return merge_branches(seed, down, up);
      },
      py::arg("grid"), py::arg("mu0"), py::arg("kappa_stop"),
      "Initialization at mu0 and continuation in both directions; returns a Branch.");

  py::class_<Branch>(m, "Branch")
      .def_property_readonly("points", [](const Branch& b) {
        py::list out;
        for (const auto& pt : b.points) out.append(point_dict(pt));
        return out;
      })
      .def_property_readonly("eta_halvings", [](const Branch& b) { return b.stats.eta_halvings; })
      .def(
          "theta_curve",
          [](const Branch& b, double theta) {
            std::vector<std::tuple<double, double, double, bool>> out;
            for (const auto& q : map_to_theta(b, theta).points) out.emplace_back(q.mu, q.Lambda, q.J, q.symmetric);
            return out;
          },
          py::arg("theta"), "List of (mu, Lambda, J, symmetric).");

  m.def(
      "radial_ground_state",
      [](double p, int d) {
        auto r = radial_ground_state(p, d);
        return py::dict(py::arg("u0") = r.u0, py::arg("r") = r.r_nodes, py::arg("u") = r.u_values,
                        py::arg("pohozaev_residual") = r.pohozaev_residual(),
                        py::arg("norms") = norms_dict(r.norms(MeasureMode::surface)));
      },
      py::arg("p"), py::arg("d"));
  m.def("J_infinity", py::overload_cast<double, int, MeasureMode>(&J_infinity), py::arg("p"), py::arg("d"),
        py::arg("measure_mode") = MeasureMode::surface);
  m.def(
      "lambda_GN",
      [](double p, int d, double J_inf, MeasureMode mode) {
        auto r = lambda_GN(p, d, J_inf, mode);
        return py::dict(py::arg("Lambda") = r.Lambda, py::arg("mu") = r.mu, py::arg("residual") = r.residual);
      },
      py::arg("p"), py::arg("d"), py::arg("J_inf"), py::arg("measure_mode") = MeasureMode::surface);

  // Commands take the JSON text of a run configuration and return the log.
  m.def("default_config", [] { return to_json(RunConfig{}).dump(); });
  m.def("cmd_symmetric_curve", [](const std::string& cfg) {
    return logged([&](std::ostream& log) { cmd_symmetric_curve(config_from(cfg), log); return 0; }).second;
  });
  m.def("cmd_branch", [](const std::string& cfg) {
    py::gil_scoped_release release;
    return logged([&](std::ostream& log) { cmd_branch(config_from(cfg), log); return 0; }).second;
  });
  m.def("cmd_analyze", [](const std::string& cfg) {
    py::gil_scoped_release release;
    return logged([&](std::ostream& log) { cmd_analyze(config_from(cfg), log); return 0; }).second;
  });
  m.def("cmd_gn_limit", [](const std::string& cfg) {
    return logged([&](std::ostream& log) { cmd_gn_limit(config_from(cfg), log); return 0; }).second;
  });
}

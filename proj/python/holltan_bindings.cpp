#include <string>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "holltan/agestructure.hpp"
#include "holltan/coexist.hpp"
#include "holltan/eigen.hpp"
#include "holltan/errors.hpp"
#include "holltan/grid.hpp"
#include "holltan/scenario.hpp"
#include "holltan/semitrivial.hpp"

namespace py = pybind11;
using namespace holltan;

namespace {

using Vec = Eigen::VectorXd;

Field as_field(const Grid& g, const Vec& v) { return Field(g, v); }

std::optional<Field> optional_field(const Grid& g, const std::optional<Vec>& v) {
  if (!v) return std::nullopt;
  return Field(g, *v);
}

ContinuationParameter parse_parameter(const std::string& name) {
  if (name == "xi") return ContinuationParameter::xi;
  if (name == "eta") return ContinuationParameter::eta;
  throw ValidationError("parameter must be 'xi' or 'eta'");
}

}  // namespace

PYBIND11_MODULE(holltan, m) {
  m.doc() = "Steady states and bifurcations of a diffusive age-structured predator-prey model";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", error.ptr());
  py::register_exception<SolverError>(m, "SolverError", error.ptr());

  py::class_<Grid>(m, "Grid")
      .def_property_readonly("dimension", &Grid::dimension)
      .def_property_readonly("size", &Grid::size)
      .def_property_readonly("cell_volume", &Grid::cell_volume)
      .def("n", &Grid::n, py::arg("axis") = 0)
      .def("h", &Grid::h, py::arg("axis") = 0)
      .def("bounds", [](const Grid& g, int axis) {
        const auto b = g.bounds(axis);
        return std::pair{b.lo, b.hi};
      }, py::arg("axis") = 0)
      .def("coordinates", [](const Grid& g, int axis) {
        Vec x(g.size());
        for (Eigen::Index i = 0; i < g.size(); ++i) x[i] = g.coordinate(i, axis);
        return x;
      }, py::arg("axis") = 0)
      .def("__eq__", [](const Grid& a, const Grid& b) { return a == b; })
      .def("__repr__", [](const Grid& g) {
        std::string s = "Grid(dimension=" + std::to_string(g.dimension()) + ", n=";
        for (int a = 0; a < g.dimension(); ++a) s += (a ? "x" : "") + std::to_string(g.n(a));
        return s + ")";
      });

  m.def("build_grid_1d", &build_grid_1d, py::arg("lo"), py::arg("hi"), py::arg("n"));
  m.def("build_grid_2d",
        [](std::pair<double, double> x, std::pair<double, double> y, int nx, int ny) {
          return build_grid_2d({x.first, x.second}, {y.first, y.second}, nx, ny);
        },
        py::arg("x"), py::arg("y"), py::arg("nx"), py::arg("ny"));
  m.def("laplacian", [](const Grid& g) { return dirichlet_laplacian(g).matrix; },
        "Sparse -Laplacian with homogeneous Dirichlet data (scipy.sparse).");
  m.def("integrate", [](const Grid& g, const Vec& v) { return integrate(g, v); });

  py::class_<EigenPair>(m, "EigenPair")
      .def_readonly("eigenvalue", &EigenPair::lambda)
      .def_property_readonly("phi", [](const EigenPair& e) { return e.phi.values(); })
      .def_readonly("residual", &EigenPair::residual)
      .def_readonly("iterations", &EigenPair::iterations);

  m.def("principal_eigenpair",
        [](const Grid& g, const std::optional<Vec>& potential, double tol) {
          return principal_eigenpair(g, potential ? Field(g, *potential) : Field::zeros(g), tol);
        },
        py::arg("grid"), py::arg("potential") = py::none(), py::arg("tol") = kEigenTolerance);
  m.def("discrete_dirichlet_eigenvalue", &discrete_dirichlet_eigenvalue);
  m.def("resolvent_apply",
        [](const Grid& g, double shift, const Vec& f) {
          return resolvent_apply(g, shift, as_field(g, f)).values();
        },
        py::arg("grid"), py::arg("shift"), py::arg("f"));

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init([](double alpha1, double alpha2, double beta1, double beta2, double mm,
                       double r, double s, double eta, double xi) {
             return ModelParams{alpha1, alpha2, beta1, beta2, mm, r, s, eta, xi};
           }),
           py::arg("alpha1") = 1.0, py::arg("alpha2") = 1.0, py::arg("beta1") = 1.0,
           py::arg("beta2") = 0.5, py::arg("m") = 2.0, py::arg("r") = 1.0, py::arg("s") = 1.0,
           py::arg("eta") = 0.0, py::arg("xi") = 0.0)
      .def_readwrite("alpha1", &ModelParams::alpha1)
      .def_readwrite("alpha2", &ModelParams::alpha2)
      .def_readwrite("beta1", &ModelParams::beta1)
      .def_readwrite("beta2", &ModelParams::beta2)
      .def_readwrite("m", &ModelParams::m)
      .def_readwrite("r", &ModelParams::r)
      .def_readwrite("s", &ModelParams::s)
      .def_readwrite("eta", &ModelParams::eta)
      .def_readwrite("xi", &ModelParams::xi)
      .def("validate", &ModelParams::validate);

  m.def("solve_logistic",
        [](const Grid& g, double growth, double crowding, double tol,
           const std::optional<Vec>& initial) {
          return solve_logistic(g, growth, crowding, tol, optional_field(g, initial)).values();
        },
        py::arg("grid"), py::arg("growth"), py::arg("crowding"),
        py::arg("tol") = kNewtonTolerance, py::arg("initial") = py::none());
  m.def("prey_state", [](const Grid& g, const ModelParams& p) {
    return prey_state(g, p).profile.values();
  });
  m.def("predator_state", [](const Grid& g, const ModelParams& p) {
    return predator_state(g, p).profile.values();
  });
  m.def("holling_saturation", [](const Grid& g, const Vec& u, double mm) {
    return holling_saturation(as_field(g, u), mm).values();
  });
  m.def("bifurcation_point_xi0", [](const Grid& g, const ModelParams& p, const Vec& u_eta) {
    return bifurcation_point_xi0(g, p, as_field(g, u_eta));
  });
  m.def("bifurcation_point_eta0", [](const Grid& g, const ModelParams& p, const Vec& v_xi) {
    return bifurcation_point_eta0(g, p, as_field(g, v_xi));
  });
  m.def("smallness_condition", [](const ModelParams& p, double lambda1) {
    const SmallnessCondition c = smallness_condition(p, lambda1);
    return py::dict(py::arg("value") = c.value, py::arg("threshold") = c.threshold,
                    py::arg("ok") = c.ok);
  });

  m.def("residual",
        [](const Grid& g, const ModelParams& p, const Vec& u, const Vec& v, double eta,
           double xi) {
          const StateResidual r = residual({as_field(g, u), as_field(g, v), eta, xi}, p);
          return std::pair{r.u.values(), r.v.values()};
        },
        py::arg("grid"), py::arg("params"), py::arg("u"), py::arg("v"), py::arg("eta"),
        py::arg("xi"));
  m.def("jacobian",
        [](const Grid& g, const ModelParams& p, const Vec& u, const Vec& v, double eta,
           double xi) { return jacobian({as_field(g, u), as_field(g, v), eta, xi}, p).matrix; },
        py::arg("grid"), py::arg("params"), py::arg("u"), py::arg("v"), py::arg("eta"),
        py::arg("xi"));
  m.def("newton_solve",
        [](const Grid& g, const ModelParams& p, const Vec& u, const Vec& v, double eta, double xi,
           double tol, int max_iterations) {
          NewtonOptions o;
          o.tol = tol;
          o.max_iterations = max_iterations;
          const SteadyState s = newton_solve({as_field(g, u), as_field(g, v), eta, xi}, p, o);
          return std::pair{s.u.values(), s.v.values()};
        },
        py::arg("grid"), py::arg("params"), py::arg("u"), py::arg("v"), py::arg("eta"),
        py::arg("xi"), py::arg("tol") = kNewtonTolerance,
        py::arg("max_iterations") = kNewtonMaxIterations);

  py::class_<KernelTangent>(m, "KernelTangent")
      .def_property_readonly("parameter", [](const KernelTangent& k) { return to_string(k.parameter); })
      .def_property_readonly("phi", [](const KernelTangent& k) { return k.phi.values(); })
      .def_property_readonly("psi", [](const KernelTangent& k) { return k.psi.values(); })
      .def_readonly("critical_param", &KernelTangent::critical_param)
      .def_readonly("prey_residual", &KernelTangent::prey_residual)
      .def_readonly("predator_residual", &KernelTangent::predator_residual);

  m.def("kernel_tangent_xi", [](const Grid& g, const ModelParams& p, const Vec& u_eta) {
    return kernel_tangent_xi(g, p, as_field(g, u_eta));
  });
  m.def("kernel_tangent_eta", [](const Grid& g, const ModelParams& p, const Vec& v_xi) {
    return kernel_tangent_eta(g, p, as_field(g, v_xi));
  });
  m.def("detect_bifurcation",
        [](const Grid& g, const ModelParams& p, const Vec& u_eta, double lo, double hi,
           double tol) { return detect_bifurcation(g, p, as_field(g, u_eta), {lo, hi}, tol); },
        py::arg("grid"), py::arg("params"), py::arg("u_eta"), py::arg("lo"), py::arg("hi"),
        py::arg("tol") = kBisectionTolerance);

  py::class_<Branch>(m, "Branch")
      .def_property_readonly("parameter", [](const Branch& b) { return to_string(b.parameter); })
      .def_property_readonly("stop", [](const Branch& b) { return to_string(b.stop); })
      .def("__len__", [](const Branch& b) { return b.points.size(); })
      .def_property_readonly("params", [](const Branch& b) {
        std::vector<double> out;
        for (const auto& p : b.points) out.push_back(p.param(b.parameter));
        return out;
      })
      .def_property_readonly("amp_u", [](const Branch& b) {
        std::vector<double> out;
        for (const auto& p : b.points) out.push_back(p.state.u.max_norm());
        return out;
      })
      .def_property_readonly("amp_v", [](const Branch& b) {
        std::vector<double> out;
        for (const auto& p : b.points) out.push_back(p.state.v.max_norm());
        return out;
      })
      .def_property_readonly("residuals", [](const Branch& b) {
        std::vector<double> out;
        for (const auto& p : b.points) out.push_back(p.residual);
        return out;
      })
      .def("state", [](const Branch& b, std::size_t i) {
        const SteadyState& s = b.points.at(i).state;
        return py::make_tuple(s.u.values(), s.v.values(), s.eta, s.xi);
      });

  m.def("trace_coexistence",
        [](const Grid& g, const ModelParams& p, const std::string& parameter, double window,
           double initial_step, double max_step, int max_points) {
          const ContinuationParameter which = parse_parameter(parameter);
          const bool on_xi = which == ContinuationParameter::xi;
          const Field base = on_xi ? prey_state(g, p).profile : predator_state(g, p).profile;
          const KernelTangent k = on_xi ? kernel_tangent_xi(g, p, base) : kernel_tangent_eta(g, p, base);
          ContinuationOptions o;
          o.parameter = which;
          o.initial_step = initial_step;
          o.max_step = max_step;
          o.max_points = max_points;
          o.window = {k.critical_param - window, k.critical_param + window};
          Branch b = on_xi ? trace_coexistence_xi(p, base, k, o) : trace_coexistence_eta(p, base, k, o);
          return py::make_tuple(std::move(b), k, base.values());
        },
        py::arg("grid"), py::arg("params"), py::arg("parameter") = "xi",
        py::arg("window") = 1.0, py::arg("initial_step") = 1e-3, py::arg("max_step") = 0.05,
        py::arg("max_points") = 40,
        "Traces the coexistence branch; returns (branch, kernel tangent, semi-trivial base).");
  m.def("tangent_alignment",
        [](const Branch& b, const KernelTangent& k, const Vec& base, double amplitude) {
          const Grid& g = k.phi.grid();
          const Alignment a = tangent_alignment(b, k, as_field(g, base), amplitude);
          return py::dict(py::arg("angle_deg") = a.angle_deg, py::arg("amplitude") = a.amplitude,
                          py::arg("shape_deviation") = a.shape_deviation,
                          py::arg("param") = a.param);
        });

  py::class_<AgeProfile>(m, "AgeProfile")
      .def_readonly("ages", &AgeProfile::ages)
      .def_property_readonly("slices", [](const AgeProfile& p) {
        Eigen::MatrixXd out(p.slices.size(), p.slices.empty() ? 0 : p.slices.front().size());
        for (std::size_t k = 0; k < p.slices.size(); ++k) out.row(k) = p.slices[k].values();
        return out;
      })
      .def_readonly("decay_rate", &AgeProfile::decay_rate)
      .def_readonly("fertility", &AgeProfile::fertility)
      .def_readonly("tail_estimate", &AgeProfile::tail_estimate)
      .def_readonly("truncated", &AgeProfile::truncated)
      .def_readonly("resolved_age", &AgeProfile::resolved_age);

  m.def("reconstruct_age_profile",
        [](const Grid& g, const Vec& mortality, const Vec& boundary, double fertility,
           double decay_rate, double a_max, int n_ages) {
          return reconstruct_age_profile(g, as_field(g, mortality), as_field(g, boundary),
                                         fertility, decay_rate, a_max, n_ages);
        },
        py::arg("grid"), py::arg("mortality"), py::arg("boundary"), py::arg("fertility"),
        py::arg("decay_rate"), py::arg("a_max"), py::arg("n_ages"));
  m.def("age_integral", [](const AgeProfile& p) { return age_integral(p).value.values(); });
  m.def("consistency_check",
        [](const AgeProfile& p, const Vec& target, std::optional<double> fertility) {
          const Field t(p.slices.front().grid(), target);
          const Consistency c = fertility ? consistency_check(p, t, *fertility) : consistency_check(p, t);
          return py::dict(py::arg("integral_residual") = c.integral_residual,
                          py::arg("renewal_residual") = c.renewal_residual);
        },
        py::arg("profile"), py::arg("target"), py::arg("fertility") = py::none());
  m.def("lemma1_witness",
        [](const AgeProfile& p, double offset) {
          const Lemma1Witness w = lemma1_witness(p, offset);
          return py::dict(py::arg("z") = w.z, py::arg("bound") = w.bound,
                          py::arg("holds") = w.holds, py::arg("worst_excess") = w.worst_excess);
        },
        py::arg("profile"), py::arg("growth_offset") = 0.0);

  m.def("validate_scenario", [](const std::filesystem::path& path) {
    parse_scenario(path);
    return true;
  });
  m.def("run_scenario",
        [](const std::filesystem::path& path, const std::filesystem::path& out_dir,
           bool dump_fields) {
          const RunResult r = run(parse_scenario(path), {out_dir, dump_fields});
          return py::make_tuple(r.exit_code, r.report);
        },
        py::arg("path"), py::arg("out_dir") = ".", py::arg("dump_fields") = false,
        "Runs a scenario file; returns (exit_code, report JSON text).");
}

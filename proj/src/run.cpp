#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <string>

#include <json.hpp>

#include "holltan/agestructure.hpp"
#include "holltan/coexist.hpp"
#include "holltan/eigen.hpp"
#include "holltan/errors.hpp"
#include "holltan/scenario.hpp"
#include "holltan/semitrivial.hpp"

namespace holltan {

using nlohmann::json;

namespace {

constexpr const char* kReportFormat = "holltan-report/1";

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json field_json(const Field& f) {
  return json(std::vector<double>(f.values().data(), f.values().data() + f.size()));
}

class Context {
 public:
  Context(const Scenario& sc, const RunOptions& opts)
      : sc_(sc), opts_(opts), grid_(sc.grid.build()) {
    base_ = principal_eigenpair(grid_, Field::zeros(grid_), sc.eigen_tol);
    params_ = resolve_params(sc, base_->lambda);
    params_.validate();
  }

  const Scenario& sc() const { return sc_; }
  const Grid& grid() const { return grid_; }
  const ModelParams& params() const { return params_; }
  double lambda1() const { return base_->lambda; }
  const EigenPair& base() const { return *base_; }
  json& results() { return results_; }
  json& checks() { return checks_; }
  std::vector<std::filesystem::path>& files() { return files_; }

  void check(const std::string& name, double value, double bound, double tolerance,
             bool pass, const std::string& relation) {
    checks_.push_back({{"name", name},
                       {"value", value},
                       {"bound", bound},
                       {"relation", relation},
                       {"tolerance", tolerance},
                       {"pass", pass}});
  }
  // value <= bound + tolerance
  void check_le(const std::string& name, double value, double bound, double tolerance) {
    check(name, value, bound, tolerance, value <= bound + tolerance, "<=");
  }
  void check_ge(const std::string& name, double value, double bound, double tolerance) {
    check(name, value, bound, tolerance, value >= bound - tolerance, ">=");
  }

  void field(const std::string& name, const Field& f) {
    if (opts_.dump_fields) fields_[name] = field_json(f);
  }
  const json& fields() const { return fields_; }

  std::ofstream open(const std::string& filename) {
    const auto path = opts_.out_dir / filename;
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path.string());
    files_.push_back(path);
    return out;
  }

  Field prey() const {
    const Field u = solve_logistic(grid_, params_.eta - params_.r, params_.alpha1, sc_.tol);
    if (u.max_norm() == 0.0) {
      throw ValidationError("field 'eta': eta = " + fmt17(params_.eta) +
                            " does not exceed lambda_1 + r, no prey state exists");
    }
    return u;
  }
  Field predator() const {
    const Field v = solve_logistic(grid_, params_.xi - params_.s, params_.beta1, sc_.tol);
    if (v.max_norm() == 0.0) {
      throw ValidationError("field 'xi': xi = " + fmt17(params_.xi) +
                            " does not exceed lambda_1 + s, no predator state exists");
    }
    return v;
  }

 private:
  const Scenario& sc_;
  const RunOptions& opts_;
  Grid grid_;
  std::optional<EigenPair> base_;
  ModelParams params_;
  json results_ = json::object();
  json checks_ = json::array();
  json fields_ = json::object();
  std::vector<std::filesystem::path> files_;
};

json bounds_json(const SemiTrivialBounds& b) {
  return {{"species", to_string(b.which)}, {"param", b.param},       {"min", b.min},
          {"max", b.max},                 {"bound", b.bound},       {"threshold", b.threshold},
          {"trivial", b.trivial},         {"positive", b.positive}, {"pass", b.pass}};
}

void run_eig(Context& cx) {
  const Grid& g = cx.grid();
  double continuum = 0.0;
  for (int axis = 0; axis < g.dimension(); ++axis) {
    const auto [lo, hi] = g.bounds(axis);
    continuum += std::numbers::pi * std::numbers::pi / ((hi - lo) * (hi - lo));
  }
  const double closed = discrete_dirichlet_eigenvalue(g);
  json& r = cx.results();
  r["lambda1"] = cx.lambda1();
  r["lambda1_closed_form"] = closed;
  r["lambda1_continuum"] = continuum;
  r["residual"] = cx.base().residual;
  r["iterations"] = cx.base().iterations;
  cx.check_le("lambda1_matches_closed_form", std::abs(cx.lambda1() - closed), 0.0,
              1e-8 * closed);
  cx.check_le("eigen_residual", cx.base().residual, cx.sc().eigen_tol, 0.0);
  cx.check("eigenfunction_positive", cx.base().phi.min(), 0.0, 0.0,
           cx.base().phi.min() > 0.0, ">");
  cx.field("phi1", cx.base().phi);
}

void run_semitrivial(Context& cx) {
  const ModelParams& p = cx.params();
  const SemiTrivialState prey{Species::prey,
                              solve_logistic(cx.grid(), p.eta - p.r, p.alpha1, cx.sc().tol),
                              p.eta};
  const SemiTrivialState pred{Species::predator,
                              solve_logistic(cx.grid(), p.xi - p.s, p.beta1, cx.sc().tol),
                              p.xi};
  const auto bp = check_semitrivial_bounds(prey, p, cx.sc().tol);
  const auto bv = check_semitrivial_bounds(pred, p, cx.sc().tol);
  cx.results()["prey"] = bounds_json(bp);
  cx.results()["predator"] = bounds_json(bv);
  cx.check_le("prey_upper_bound", bp.max, bp.bound, bp.tolerance);
  cx.check_le("predator_upper_bound", bv.max, bv.bound, bv.tolerance);
  cx.check("prey_state_consistent", bp.pass ? 1.0 : 0.0, 1.0, 0.0, bp.pass, "==");
  cx.check("predator_state_consistent", bv.pass ? 1.0 : 0.0, 1.0, 0.0, bv.pass, "==");
  cx.field("U_eta", prey.profile);
  cx.field("V_xi", pred.profile);
}

void run_bifurcate_xi(Context& cx) {
  const ModelParams& p = cx.params();
  const double lambda1 = cx.lambda1();
  const Field u_eta = cx.prey();
  const SmallnessCondition small = smallness_condition(p, lambda1);
  const double xi0 = bifurcation_point_xi0(cx.grid(), p, u_eta);
  const ParameterWindow window{
      cx.sc().xi_min.value_or(lambda1 + p.s - p.beta2 / p.m - 0.05),
      cx.sc().xi_max.value_or(lambda1 + p.s + 0.05)};
  const double crossing = detect_bifurcation(cx.grid(), p, u_eta, window, cx.sc().bisection_tol);
  const KernelTangent k = kernel_tangent_xi(cx.grid(), p, u_eta);

  json& r = cx.results();
  r["lambda1"] = lambda1;
  r["U_eta_amplitude"] = u_eta.max_norm();
  r["xi0"] = xi0;
  r["xi0_crossing"] = crossing;
  r["window"] = {window.lo, window.hi};
  r["smallness"] = {{"value", small.value}, {"threshold", small.threshold}, {"ok", small.ok}};
  r["kernel"] = {{"prey_residual", k.prey_residual},
                 {"predator_residual", k.predator_residual},
                 {"phi_amplitude", k.phi.max_norm()}};

  cx.check_le("xi0_matches_crossing", std::abs(xi0 - crossing), 0.0, 1e-6);
  cx.check_ge("xi0_lower_bound", xi0, lambda1 + p.s - p.beta2 / p.m, 1e-10);
  cx.check_le("xi0_upper_bound", xi0, lambda1 + p.s, 1e-10);
  cx.check("smallness_condition", small.value, small.threshold, 0.0, small.ok, "<");
  cx.check_le("kernel_prey_residual", k.prey_residual, 0.0, 1e-8);
  cx.check_le("kernel_predator_residual", k.predator_residual, 0.0, 1e-8);
  cx.field("U_eta", u_eta);
  cx.field("P_eta", holling_saturation(u_eta, p.m));
  cx.field("Phi1", k.phi);
  cx.field("Psi1", k.psi);
}

void run_bifurcate_eta(Context& cx) {
  const ModelParams& p = cx.params();
  const double lambda1 = cx.lambda1();
  const Field v_xi = cx.predator();
  const double eta0 = bifurcation_point_eta0(cx.grid(), p, v_xi);
  const KernelTangent k = kernel_tangent_eta(cx.grid(), p, v_xi);
  json& r = cx.results();
  r["lambda1"] = lambda1;
  r["V_xi_amplitude"] = v_xi.max_norm();
  r["eta0"] = eta0;
  r["kernel"] = {{"prey_residual", k.prey_residual},
                 {"predator_residual", k.predator_residual},
                 {"psi_amplitude", k.psi.max_norm()}};
  cx.check_ge("eta0_lower_bound", eta0, lambda1 + p.r, 1e-10);
  cx.check_le("kernel_prey_residual", k.prey_residual, 0.0, 1e-8);
  cx.check_le("kernel_predator_residual", k.predator_residual, 0.0, 1e-8);
  cx.field("V_xi", v_xi);
  cx.field("Phi1", k.phi);
  cx.field("Psi1", k.psi);
}

void write_branch_csv(Context& cx, const Branch& branch) {
  auto out = cx.open("branch.csv");
  out << "param,ampU,ampV,residual\n";
  for (const auto& pt : branch.points) {
    out << fmt17(pt.param(branch.parameter)) << ',' << fmt17(pt.state.u.max_norm()) << ','
        << fmt17(pt.state.v.max_norm()) << ',' << fmt17(pt.residual) << '\n';
  }
}

json branch_summary(const Branch& b) {
  json s = {{"kind", to_string(b.kind)},
            {"parameter", to_string(b.parameter)},
            {"points", b.points.size()},
            {"stop", to_string(b.stop)}};
  if (!b.points.empty()) {
    s["param_first"] = b.points.front().param(b.parameter);
    s["param_last"] = b.points.back().param(b.parameter);
  }
  return s;
}

ContinuationOptions continuation_options(const Scenario& sc, ParameterWindow window) {
  ContinuationOptions o;
  o.initial_step = sc.initial_step;
  o.min_step = sc.min_step;
  o.max_step = sc.max_step;
  o.max_points = sc.max_points;
  o.newton_tol = sc.tol;
  o.window = window;
  return o;
}

void run_continuation(Context& cx) {
  const ModelParams& p = cx.params();
  const bool on_xi = cx.sc().parameter == ContinuationParameter::xi;
  const Field base = on_xi ? cx.prey() : cx.predator();
  const KernelTangent k = on_xi ? kernel_tangent_xi(cx.grid(), p, base)
                                : kernel_tangent_eta(cx.grid(), p, base);
  const double c = k.critical_param;
  const ParameterWindow window =
      on_xi ? ParameterWindow{cx.sc().xi_min.value_or(c - 1.0), cx.sc().xi_max.value_or(c + 1.0)}
            : ParameterWindow{cx.sc().eta_min.value_or(c - 1.0), cx.sc().eta_max.value_or(c + 1.0)};
  const ContinuationOptions opts = continuation_options(cx.sc(), window);

  Branch branch;
  try {
    branch = on_xi ? trace_coexistence_xi(p, base, k, opts) : trace_coexistence_eta(p, base, k, opts);
  } catch (const ContinuationError& e) {
    write_branch_csv(cx, e.partial());
    cx.results()["branch"] = branch_summary(e.partial());
    throw;
  }
  write_branch_csv(cx, branch);

  json& r = cx.results();
  r["critical_param"] = c;
  r["branch"] = branch_summary(branch);

  double min_v = std::numeric_limits<double>::infinity();
  double min_u = std::numeric_limits<double>::infinity();
  double min_gap = std::numeric_limits<double>::infinity();
  double max_excess = -std::numeric_limits<double>::infinity();
  int coexisting = 0;
  for (const auto& pt : branch.points) {
    if (pt.state.u.min() > 0.0 && pt.state.v.min() > 0.0) ++coexisting;
    min_u = std::min(min_u, pt.state.u.min());
    min_v = std::min(min_v, pt.state.v.min());
    min_gap = std::min(min_gap, pt.param(branch.parameter) - c);
    if (on_xi) {
      max_excess = std::max(max_excess, (pt.state.u.values() - base.values()).maxCoeff());
    }
  }
  // points where a species touches zero within the positivity monitor's slack
  // mark the branch reaching a semi-trivial state
  cx.check_ge("prey_nonnegative", min_u, 0.0, opts.negative_tolerance);
  cx.check_ge("predator_nonnegative", min_v, 0.0, opts.negative_tolerance);
  r["coexistence_points"] = coexisting;
  if (on_xi) {
    cx.check("supercritical", min_gap, 0.0, 0.0, min_gap > 0.0, ">");
    cx.check_le("prey_below_semitrivial", max_excess, 0.0, 1e-8);
  } else {
    r["direction"] = min_gap > 0.0 ? "supercritical" : "subcritical_or_mixed";
  }
  if (!branch.points.empty()) {
    const Alignment a = tangent_alignment(branch.points.front().state, k, base);
    r["alignment_first_point"] = {{"angle_deg", a.angle_deg},
                                  {"amplitude", a.amplitude},
                                  {"shape_deviation", a.shape_deviation},
                                  {"param", a.param}};
  }
  cx.field(on_xi ? "U_eta" : "V_xi", base);
  cx.field("Phi1", k.phi);
  cx.field("Psi1", k.psi);
  if (!branch.points.empty()) {
    cx.field("U_last", branch.points.back().state.u);
    cx.field("V_last", branch.points.back().state.v);
  }
}

void run_age_profile(Context& cx) {
  const ModelParams& p = cx.params();
  const bool prey = cx.sc().species == Species::prey;
  const Field target = prey ? cx.prey() : cx.predator();
  const Field mortality(cx.grid(), (prey ? p.alpha1 : p.beta1) * target.values());
  const double fertility = prey ? p.eta : p.xi;
  const double decay = prey ? p.r : p.s;
  const double a_max = cx.sc().a_max.value_or(40.0 / decay);

  const AgeProfile profile = reconstruct_age_profile(cx.grid(), mortality, target, fertility,
                                                     decay, a_max, cx.sc().n_ages);
  const Consistency c = consistency_check(profile, target);
  const Lemma1Witness w = lemma1_witness(profile, prey ? 0.0 : p.beta2 / p.m);

  json& r = cx.results();
  r["species"] = to_string(cx.sc().species);
  r["a_max"] = a_max;
  r["n_ages"] = cx.sc().n_ages;
  r["tail_estimate"] = profile.tail_estimate;
  r["resolved_age"] = profile.resolved_age;
  r["integral_residual"] = c.integral_residual;
  r["renewal_residual"] = c.renewal_residual;
  r["phi1_moment_worst_excess"] = w.worst_excess;

  cx.check_le("age_integral_consistency", c.integral_residual, 0.0, 1e-6);
  cx.check_le("renewal_condition", c.renewal_residual, 0.0, 0.0);
  cx.check("phi1_moment_decay", w.worst_excess, 0.0, 1e-10, w.holds, "<=");
  cx.check_le("truncation_tail", profile.tail_estimate, 0.0, kDefaultTailTolerance);

  auto out = cx.open("profile.csv");
  out << "age,node,value\n";
  for (std::size_t k = 0; k < profile.slices.size(); k += cx.sc().age_stride) {
    const Field& slice = profile.slices[k];
    for (Eigen::Index i = 0; i < slice.size(); ++i) {
      out << fmt17(profile.ages[k]) << ',' << i << ',' << fmt17(slice[i]) << '\n';
    }
  }
  cx.field(prey ? "U_eta" : "V_xi", target);
}

void run_verify(Context& cx) {
  const ModelParams& p = cx.params();
  const Grid& g = cx.grid();
  const double lambda1 = cx.lambda1();
  const double tol = cx.sc().tol;

  const Field below = solve_logistic(g, lambda1 - 0.05, p.alpha1, tol);
  cx.check_le("no_prey_below_threshold", below.max_norm(), 0.0, 0.0);

  const SemiTrivialState prey{Species::prey, cx.prey(), p.eta};
  const auto bp = check_semitrivial_bounds(prey, p, tol);
  cx.check_le("prey_upper_bound", bp.max, bp.bound, bp.tolerance);
  cx.check("prey_positive", bp.min, 0.0, 0.0, bp.positive, ">");

  const Field sat = holling_saturation(prey.profile, p.m);
  const double excess = p.eta - p.r;
  cx.check_le("saturation_bound", p.beta2 * sat.max_norm(),
              p.beta2 * excess / (p.alpha1 + p.m * excess), 1e-12);

  const SmallnessCondition small = smallness_condition(p, lambda1);
  cx.check("smallness_condition", small.value, small.threshold, 0.0, small.ok, "<");

  const double xi0 = bifurcation_point_xi0(g, p, prey.profile);
  cx.check_ge("xi0_lower_bound", xi0, lambda1 + p.s - p.beta2 / p.m, 1e-10);
  cx.check_le("xi0_upper_bound", xi0, lambda1 + p.s, 1e-10);

  const Field q = resolvent_apply(g, p.s, cx.base().phi);
  const double resolvent_gap =
      (q.values() - cx.base().phi.values() / (p.s + lambda1)).lpNorm<Eigen::Infinity>();
  cx.check_le("resolvent_spectral_radius", resolvent_gap, 0.0, 1e-8);

  const SemiTrivialState pred{Species::predator,
                              solve_logistic(g, p.xi - p.s, p.beta1, tol), p.xi};
  const auto bv = check_semitrivial_bounds(pred, p, tol);
  cx.check("predator_state_consistent", bv.pass ? 1.0 : 0.0, 1.0, 0.0, bv.pass, "==");

  json& r = cx.results();
  r["lambda1"] = lambda1;
  r["prey"] = bounds_json(bp);
  r["predator"] = bounds_json(bv);
  r["xi0"] = xi0;
  r["smallness"] = {{"value", small.value}, {"threshold", small.threshold}, {"ok", small.ok}};
  cx.field("U_eta", prey.profile);
}

json scenario_echo(const Scenario& sc) {
  json g = {{"dimension", sc.grid.dimension}, {"n", sc.grid.n}};
  json b = json::array();
  for (const auto& iv : sc.grid.bounds) b.push_back({iv.lo, iv.hi});
  g["bounds"] = b;
  json e = {{"task", to_string(sc.task)},
            {"name", sc.name},
            {"grid", g},
            {"tol", sc.tol},
            {"eigen_tol", sc.eigen_tol},
            {"bisection_tol", sc.bisection_tol},
            {"parameter", to_string(sc.parameter)},
            {"initial_step", sc.initial_step},
            {"min_step", sc.min_step},
            {"max_step", sc.max_step},
            {"max_points", sc.max_points},
            {"species", to_string(sc.species)},
            {"n_ages", sc.n_ages},
            {"age_stride", sc.age_stride}};
  const auto opt = [&](const char* key, const std::optional<double>& v) {
    e[key] = v ? json(*v) : json(nullptr);
  };
  opt("xi_min", sc.xi_min);
  opt("xi_max", sc.xi_max);
  opt("eta_min", sc.eta_min);
  opt("eta_max", sc.eta_max);
  opt("a_max", sc.a_max);
  return e;
}

json params_json(const ModelParams& p) {
  return {{"alpha1", p.alpha1}, {"alpha2", p.alpha2}, {"beta1", p.beta1},
          {"beta2", p.beta2},   {"m", p.m},           {"r", p.r},
          {"s", p.s},           {"eta", p.eta},       {"xi", p.xi}};
}

}  // namespace

RunResult run(const Scenario& sc, const RunOptions& opts) {
  std::filesystem::create_directories(opts.out_dir);
  json report = {{"format", kReportFormat}, {"scenario", scenario_echo(sc)}};
  RunResult result;
  std::optional<Context> cx;
  try {
    cx.emplace(sc, opts);
    report["scenario"]["params"] = params_json(cx->params());
    report["scenario"]["lambda1"] = cx->lambda1();
    switch (sc.task) {
      case Task::eig: run_eig(*cx); break;
      case Task::semitrivial: run_semitrivial(*cx); break;
      case Task::bifurcate_xi: run_bifurcate_xi(*cx); break;
      case Task::bifurcate_eta: run_bifurcate_eta(*cx); break;
      case Task::continuation: run_continuation(*cx); break;
      case Task::age_profile: run_age_profile(*cx); break;
      case Task::verify: run_verify(*cx); break;
    }
  } catch (const ValidationError& e) {
    result.exit_code = kExitValidation;
    report["error"] = {{"kind", "validation"}, {"message", e.what()}};
  } catch (const SolverError& e) {
    result.exit_code = kExitSolver;
    report["error"] = {{"kind", to_string(e.kind())},
                       {"message", e.what()},
                       {"last_residual", e.last_residual()},
                       {"trace", e.trace()}};
  }

  bool all_pass = true;
  if (cx) {
    report["results"] = cx->results();
    report["checks"] = cx->checks();
    for (const auto& c : cx->checks()) all_pass = all_pass && c.at("pass").get<bool>();
    if (opts.dump_fields) report["fields"] = cx->fields();
    result.files = cx->files();
  }
  report["status"] = result.exit_code == kExitOk ? "ok" : "error";
  report["all_checks_pass"] = result.exit_code == kExitOk && all_pass;
  json outputs = json::array();
  for (const auto& f : result.files) outputs.push_back(f.filename().string());
  report["outputs"] = outputs;

  result.report = report.dump(2) + "\n";
  const auto path = opts.out_dir / "report.json";
  std::ofstream(path) << result.report;
  result.files.push_back(path);
  return result;
}

}  // namespace holltan

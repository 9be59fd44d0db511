// Acceptance suite: one line per criterion, nonzero exit if any fails.
// Standard scenario: (0,1), n = 199, alpha1 = alpha2 = beta1 = 1, m = 2,
// beta2 = 0.5, r = s = 1, eta = lambda_1 + r + 0.3.
//
// Criterion 4 checks the a priori bound (eta - r)/alpha1. The tighter reading
// ||U|| <= delta/alpha1 (delta = eta - r - lambda_1) cannot hold: the
// phi_1-weighted mean of U equals delta/alpha1 exactly, so the maximum exceeds
// it (by about 3 pi / 8 near onset). That figure is printed for reference.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "holltan/agestructure.hpp"
#include "holltan/coexist.hpp"
#include "holltan/eigen.hpp"
#include "holltan/errors.hpp"
#include "holltan/semitrivial.hpp"
#include "oracles.hpp"

using namespace holltan;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Detail {
 public:
  template <class T>
  Detail& operator()(const char* key, const T& value) {
    if (!first_) out_ << ", ";
    first_ = false;
    out_ << key << '=' << value;
    return *this;
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
  bool first_ = true;
};

double inf_norm(const Eigen::VectorXd& v) { return v.lpNorm<Eigen::Infinity>(); }

struct Standard {
  Grid grid = build_grid_1d(0, 1, 199);
  double lambda1 = principal_eigenpair(grid, Field::zeros(grid)).lambda;
  ModelParams params = [this] {
    ModelParams p;
    p.eta = lambda1 + p.r + 0.3;
    p.xi = lambda1 + p.s + 0.05;
    return p;
  }();
  Field u_eta = prey_state(grid, params).profile;
};

const Standard& standard() {
  static const Standard sc;
  return sc;
}

Outcome eigenvalue_ground_truth() {
  const Grid g1 = build_grid_1d(0, 1, 199);
  const double l1 = principal_eigenpair(g1, Field::zeros(g1)).lambda;
  const Grid g2 = build_grid_2d({0, 1}, {0, 1}, 49, 49);
  const double l2 = principal_eigenpair(g2, Field::zeros(g2)).lambda;
  const double e1 = std::abs(l1 - pi * pi) / (pi * pi);
  const double e2 = std::abs(l2 - 2 * pi * pi) / (2 * pi * pi);
  return {e1 <= 1e-3 && e2 <= 3e-3, Detail()("rel_err_1d", e1)("rel_err_2d", e2).str()};
}

Outcome shift_and_monotonicity() {
  const Grid& g = standard().grid;
  std::mt19937 rng(20240601);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const Field p(g, oracle::random_field(rng, g.size(), -2.0, 5.0));
    const double base = principal_eigenpair(g, p).lambda;
    for (double c : {-1.0, 0.5, 3.0}) {
      const double shifted = principal_eigenpair(g, Field(g, p.values().array() + c)).lambda;
      worst = std::max(worst, std::abs(shifted - base - c));
    }
  }
  int ordered = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd lo = oracle::random_field(rng, g.size(), -2.0, 5.0);
    const Eigen::VectorXd hi = lo + oracle::random_field(rng, g.size(), 0.0, 1.0);
    if (principal_eigenpair(g, Field(g, lo)).lambda < principal_eigenpair(g, Field(g, hi)).lambda)
      ++ordered;
  }
  return {worst <= 1e-8 && ordered == 10,
          Detail()("max_shift_err", worst)("monotone_pairs", ordered).str()};
}

Outcome resolvent_identity() {
  const Standard& sc = standard();
  const EigenPair e = principal_eigenpair(sc.grid, Field::zeros(sc.grid));
  const double s = sc.params.s;
  const double err =
      inf_norm(resolvent_apply(sc.grid, s, e.phi).values() - e.phi.values() / (s + e.lambda));
  return {err <= 1e-8, Detail()("s", s)("err", err).str()};
}

Outcome logistic_thresholds() {
  const Standard& sc = standard();
  ModelParams p = sc.params;
  p.eta = sc.lambda1 + p.r - 0.05;
  const double below = prey_state(sc.grid, p).profile.max_norm();

  p.eta = sc.lambda1 + p.r + 0.05;
  const Field u = prey_state(sc.grid, p).profile;
  const double amp = u.max_norm();
  const double bound = (p.eta - p.r) / p.alpha1;
  // exact phi_1-weighted mean: alpha1 <phi,U^2> = delta <phi,U>
  const EigenPair e = principal_eigenpair(sc.grid, Field::zeros(sc.grid));
  const double weighted = e.phi.values().dot(u.values().cwiseAbs2()) / e.phi.values().dot(u.values());
  const double weighted_err = std::abs(weighted - 0.05 / p.alpha1);

  bool monotone = true;
  double previous = amp;
  for (double delta : {0.0375, 0.025, 0.0125}) {
    p.eta = sc.lambda1 + p.r + delta;
    const double a = prey_state(sc.grid, p).profile.max_norm();
    monotone = monotone && a < previous && a > 0.0;
    previous = a;
  }
  const bool pass = below == 0.0 && u.min() > 0.0 && amp <= bound + 1e-6 &&
                    weighted_err <= 1e-8 && monotone;
  return {pass, Detail()("below_max", below)("amp", amp)("bound_(eta-r)/alpha1", bound)(
                    "weighted_mean_err", weighted_err)("monotone", monotone)(
                    "literal_delta/alpha1_bound_holds", amp <= 0.05 / p.alpha1 + 1e-6)(
                    "amp/delta", amp / 0.05)
                    .str()};
}

Outcome logistic_oracle() {
  const Standard& sc = standard();
  const double growth = sc.params.eta - sc.params.r;
  const Field u = solve_logistic(sc.grid, growth, sc.params.alpha1);
  const Eigen::VectorXd marched =
      oracle::march_logistic(sc.grid, growth, sc.params.alpha1, 1.0, 1e-13);
  const double err = inf_norm(u.values() - marched);
  return {err <= 1e-6, Detail()("max_diff", err).str()};
}

Outcome bifurcation_consistency() {
  const Standard& sc = standard();
  const ModelParams& p = sc.params;
  const double xi0 = bifurcation_point_xi0(sc.grid, p, sc.u_eta);
  const ParameterWindow w{sc.lambda1 + p.s - p.beta2 / p.m - 0.05, sc.lambda1 + p.s + 0.05};
  const double crossing = detect_bifurcation(sc.grid, p, sc.u_eta, w);
  ModelParams control = p;
  control.beta2 = 0.0;
  const double control_xi0 = bifurcation_point_xi0(sc.grid, control, sc.u_eta);
  const double control_err = std::abs(control_xi0 - (sc.lambda1 + p.s));
  const bool bracket = sc.lambda1 + p.s - p.beta2 / p.m <= xi0 && xi0 <= sc.lambda1 + p.s;
  const double gap = std::abs(xi0 - crossing);
  return {gap <= 1e-6 && control_err <= 1e-6 && bracket,
          Detail()("xi0", xi0)("crossing_gap", gap)("beta2=0_err", control_err)(
              "in_bracket", bracket)
              .str()};
}

Outcome kernel_residuals() {
  const Standard& sc = standard();
  const ModelParams& p = sc.params;
  const Eigen::MatrixXd a = oracle::dense_laplacian(sc.grid);

  const KernelTangent t = kernel_tangent_xi(sc.grid, p, sc.u_eta);
  const Eigen::ArrayXd u = sc.u_eta.values().array();
  const Eigen::ArrayXd sat = u / (1 + p.m * u);
  const double r_psi = inf_norm(a * t.psi.values() +
                                ((p.s - t.critical_param) - p.beta2 * sat).matrix().cwiseProduct(t.psi.values()));
  const double r_phi = inf_norm(a * t.phi.values() +
                                ((p.r - p.eta) + 2 * p.alpha1 * u).matrix().cwiseProduct(t.phi.values()) -
                                p.alpha2 * (sat * t.psi.values().array()).matrix());

  const Field v_xi = predator_state(sc.grid, p).profile;
  const KernelTangent te = kernel_tangent_eta(sc.grid, p, v_xi);
  const Eigen::ArrayXd v = v_xi.values().array();
  const double r_phit = inf_norm(a * te.phi.values() +
                                 ((p.r - te.critical_param) + p.alpha2 * v).matrix().cwiseProduct(te.phi.values()));
  const double r_psit = inf_norm(a * te.psi.values() +
                                 ((p.s - p.xi) + 2 * p.beta1 * v).matrix().cwiseProduct(te.psi.values()) -
                                 p.beta2 * (v * te.phi.values().array()).matrix());
  const double worst = std::max({r_psi, r_phi, r_phit, r_psit});
  return {worst <= 1e-8, Detail()("xi_psi", r_psi)("xi_phi", r_phi)("eta_phi", r_phit)(
                             "eta_psi", r_psit)
                             .str()};
}

Outcome supercritical_branch() {
  const Standard& sc = standard();
  const ModelParams& p = sc.params;
  const KernelTangent t = kernel_tangent_xi(sc.grid, p, sc.u_eta);
  ContinuationOptions o;
  o.window = {t.critical_param - 1.0, t.critical_param + 1.0};
  const Branch b = trace_coexistence_xi(p, sc.u_eta, t, o);

  int coexisting = 0;
  bool all_ok = true;
  for (const BranchPoint& q : b.points) {
    const bool above = q.state.xi > t.critical_param;
    const bool v_pos = q.state.v.min() > 0.0;
    const bool below_u = (q.state.u.values() - sc.u_eta.values()).maxCoeff() <= 1e-8;
    all_ok = all_ok && above && v_pos && below_u;
    if (q.state.u.min() > 0.0 && v_pos) ++coexisting;
  }

  std::mt19937 rng(4242);
  const double v_bound = (t.critical_param - p.s) / p.beta1;
  int found = 0, converged = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const SteadyState start{
        Field(sc.grid, 1.5 * oracle::random_field(rng, sc.grid.size(), 0, 1).cwiseProduct(sc.u_eta.values())),
        Field(sc.grid, v_bound * oracle::random_field(rng, sc.grid.size(), 0, 1)), p.eta,
        t.critical_param - 0.05};
    try {
      const SteadyState s = newton_solve(start, p);
      ++converged;
      if (s.u.min() > 0.0 && s.v.min() > 0.0 && s.v.max_norm() > 1e-6) ++found;
    } catch (const SolverError&) {
    }
  }
  return {coexisting >= 20 && all_ok && found == 0,
          Detail()("coexistence_points", coexisting)("all_supercritical_positive_below_U", all_ok)(
              "random_starts_converged", converged)("coexistence_below_xi0", found)
              .str()};
}

Outcome tangent_alignment_check() {
  const Standard& sc = standard();
  const KernelTangent t = kernel_tangent_xi(sc.grid, sc.params, sc.u_eta);
  ContinuationOptions o;
  o.window = {t.critical_param - 1.0, t.critical_param + 1.0};
  const Branch b = trace_coexistence_xi(sc.params, sc.u_eta, t, o);
  const Alignment at = tangent_alignment(b, t, sc.u_eta, 1e-2);
  bool decreasing = true;
  double previous = 90.0;
  Detail d;
  d("amp", at.amplitude)("angle_deg", at.angle_deg);
  for (double amplitude : {1e-1, 3e-2, 1e-2, 3e-3}) {
    const double angle = tangent_alignment(b, t, sc.u_eta, amplitude).angle_deg;
    decreasing = decreasing && angle < previous;
    previous = angle;
  }
  d("decreasing", decreasing)("angle_at_3e-3", previous);
  return {at.angle_deg <= 5.0 && decreasing, d.str()};
}

Outcome age_consistency() {
  const Standard& sc = standard();
  const ModelParams& p = sc.params;
  const Field mortality(sc.grid, p.alpha1 * sc.u_eta.values());
  const AgeProfile prof =
      reconstruct_age_profile(sc.grid, mortality, sc.u_eta, p.eta, p.r, 40.0 / p.r, 2000);
  const Consistency c = consistency_check(prof, sc.u_eta, p.eta);
  const Lemma1Witness w = lemma1_witness(prof);
  return {c.integral_residual <= 1e-6 && c.renewal_residual == 0.0 && w.holds,
          Detail()("integral_residual", c.integral_residual)("renewal_residual",
                                                              c.renewal_residual)(
              "witness_worst_excess", w.worst_excess)
              .str()};
}

Outcome eta_mirror() {
  const Standard& sc = standard();
  ModelParams p = sc.params;
  const double eta0_zero = bifurcation_point_eta0(sc.grid, p, Field::zeros(sc.grid));
  const double zero_err = std::abs(eta0_zero - (sc.lambda1 + p.r));

  p.xi = sc.lambda1 + p.s + 0.05;
  const Field v_xi = predator_state(sc.grid, p).profile;
  const KernelTangent t = kernel_tangent_eta(sc.grid, p, v_xi);
  ContinuationOptions o;
  o.parameter = ContinuationParameter::eta;
  o.window = {t.critical_param - 1.0, t.critical_param + 1.0};
  const Branch b = trace_coexistence_eta(p, v_xi, t, o);
  int positive = 0;
  const std::size_t near = std::min<std::size_t>(b.points.size(), 5);
  for (std::size_t i = 0; i < near; ++i)
    if (b.points[i].state.u.min() > 0.0 && b.points[i].state.v.min() > 0.0) ++positive;
  return {zero_err <= 1e-6 && near == 5 && positive == 5,
          Detail()("eta0(V=0)_err", zero_err)("eta0", t.critical_param)(
              "positive_near_onset", positive)("branch_points", b.points.size())
              .str()};
}

Outcome jacobian_fd() {
  const Standard& sc = standard();
  std::mt19937 rng(12);
  const double h = 1e-6;
  int passed = 0;
  double worst = 0.0;
  const auto stack = [](const StateResidual& r) {
    Eigen::VectorXd out(r.u.size() + r.v.size());
    out << r.u.values(), r.v.values();
    return out;
  };
  for (int probe = 0; probe < 50; ++probe) {
    const Eigen::VectorXd u = oracle::random_field(rng, sc.grid.size(), 0, 2);
    const Eigen::VectorXd v = oracle::random_field(rng, sc.grid.size(), 0, 2);
    const Eigen::VectorXd du = oracle::random_field(rng, sc.grid.size(), -1, 1);
    const Eigen::VectorXd dv = oracle::random_field(rng, sc.grid.size(), -1, 1);
    const double eta = sc.params.eta, xi = sc.params.xi;
    const SteadyState s{Field(sc.grid, u), Field(sc.grid, v), eta, xi};
    const SteadyState plus{Field(sc.grid, u + h * du), Field(sc.grid, v + h * dv), eta, xi};
    const SteadyState minus{Field(sc.grid, u - h * du), Field(sc.grid, v - h * dv), eta, xi};
    Eigen::VectorXd d(2 * sc.grid.size());
    d << du, dv;
    const Eigen::VectorXd jd = jacobian(s, sc.params).matrix * d;
    const Eigen::VectorXd fd =
        (stack(residual(plus, sc.params)) - stack(residual(minus, sc.params))) / (2 * h);
    const double rel = (fd - jd).norm() / jd.norm();
    worst = std::max(worst, rel);
    if (rel <= 1e-5) ++passed;
  }
  return {passed == 50, Detail()("passed", passed)("worst_rel", worst).str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"eigenvalue ground truth", eigenvalue_ground_truth},
      {"shift and monotonicity", shift_and_monotonicity},
      {"resolvent identity", resolvent_identity},
      {"logistic thresholds and bound", logistic_thresholds},
      {"logistic time-marching oracle", logistic_oracle},
      {"bifurcation point consistency", bifurcation_consistency},
      {"kernel residuals", kernel_residuals},
      {"supercritical branch", supercritical_branch},
      {"tangent alignment", tangent_alignment_check},
      {"age consistency", age_consistency},
      {"eta-side mirror", eta_mirror},
      {"jacobian finite differences", jacobian_fd},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::printf("%s %2zu %-32s %6.2fs  %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                seconds, o.detail.c_str());
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}

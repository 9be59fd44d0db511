#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "holltan/coexist.hpp"
#include "holltan/eigen.hpp"
#include "holltan/errors.hpp"
#include "holltan/semitrivial.hpp"

using namespace holltan;

namespace {

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
  KernelTangent tangent = kernel_tangent_xi(grid, params, u_eta);

  ContinuationOptions xi_options(double initial_step = 1e-3) const {
    ContinuationOptions o;
    o.initial_step = initial_step;
    o.window = {tangent.critical_param - 1.0, tangent.critical_param + 1.0};
    return o;
  }
};

bool strictly_positive(const SteadyState& s) { return s.u.min() > 0.0 && s.v.min() > 0.0; }

}  // namespace

TEST_CASE("coexistence branch in xi is supercritical and stays below U_eta") {
  Standard sc;
  const Branch b = trace_coexistence_xi(sc.params, sc.u_eta, sc.tangent, sc.xi_options());
  CHECK(b.kind == BranchKind::coexistence);
  CHECK(b.parameter == ContinuationParameter::xi);

  int positive = 0;
  for (const BranchPoint& p : b.points) {
    CHECK(p.state.xi > sc.tangent.critical_param);
    CHECK(p.state.eta == sc.params.eta);
    CHECK(p.residual <= kNewtonTolerance);
    CHECK((p.state.u.values() - sc.u_eta.values()).maxCoeff() <= 1e-8);
    CHECK(p.state.v.min() > 0.0);
    if (strictly_positive(p.state)) ++positive;
  }
  CHECK(positive >= 20);
}

TEST_CASE("xi branch ends where the prey dies out") {
  // Followed far enough, the coexistence branch reaches the predator-only
  // state (0, V_xi) at the xi where eta_0(xi) equals the fixed eta.
  Standard sc;
  const Branch b = trace_coexistence_xi(sc.params, sc.u_eta, sc.tangent, sc.xi_options());
  REQUIRE(b.stop == StopReason::positivity_lost);
  const BranchPoint& last = b.points.back();
  CHECK(last.state.u.max_norm() < 1e-6);

  ModelParams at = sc.params;
  at.xi = last.state.xi;
  const Field v_xi = predator_state(sc.grid, at).profile;
  CHECK((last.state.v.values() - v_xi.values()).lpNorm<Eigen::Infinity>() <= 1e-5);
  CHECK(bifurcation_point_eta0(sc.grid, at, v_xi) == doctest::Approx(sc.params.eta).epsilon(1e-6));
}

TEST_CASE("halving the initial step reproduces the branch") {
  Standard sc;
  const Branch a = trace_coexistence_xi(sc.params, sc.u_eta, sc.tangent, sc.xi_options(1e-3));
  const Branch b = trace_coexistence_xi(sc.params, sc.u_eta, sc.tangent, sc.xi_options(5e-4));
  int compared = 0;
  for (const BranchPoint& p : a.points) {
    if (!strictly_positive(p.state) || p.state.u.min() < 1e-6) continue;
    // nearest point of the other run, corrected to this xi at fixed parameter
    const auto nearest = std::min_element(b.points.begin(), b.points.end(),
                                          [&](const BranchPoint& x, const BranchPoint& y) {
                                            return std::abs(x.state.xi - p.state.xi) <
                                                   std::abs(y.state.xi - p.state.xi);
                                          });
    SteadyState start = nearest->state;
    start.xi = p.state.xi;
    const SteadyState s = newton_solve(start, sc.params);
    CHECK((s.u.values() - p.state.u.values()).lpNorm<Eigen::Infinity>() <= 1e-6);
    CHECK((s.v.values() - p.state.v.values()).lpNorm<Eigen::Infinity>() <= 1e-6);
    ++compared;
  }
  CHECK(compared >= 20);
}

TEST_CASE("branch secant aligns with the kernel tangent near onset") {
  Standard sc;
  const Branch b = trace_coexistence_xi(sc.params, sc.u_eta, sc.tangent, sc.xi_options());
  const Alignment at2 = tangent_alignment(b, sc.tangent, sc.u_eta, 1e-2);
  CHECK(at2.amplitude == doctest::Approx(1e-2).epsilon(0.5));
  CHECK(at2.angle_deg <= 5.0);

  double previous = 90.0;
  for (double amplitude : {1e-1, 3e-2, 1e-2, 3e-3}) {
    const Alignment al = tangent_alignment(b, sc.tangent, sc.u_eta, amplitude);
    CHECK(al.angle_deg < previous);
    CHECK(al.param > sc.tangent.critical_param);
    previous = al.angle_deg;
  }
  CHECK(tangent_alignment(b, sc.tangent, sc.u_eta, 3e-3).shape_deviation <= 1e-2);
}

TEST_CASE("decoupled limit aligns with (0, phi_1)") {
  Standard sc;
  ModelParams p = sc.params;
  p.alpha2 = 0.0;
  p.beta2 = 0.0;
  const KernelTangent t = kernel_tangent_xi(sc.grid, p, sc.u_eta);
  const EigenPair e = principal_eigenpair(sc.grid, Field::zeros(sc.grid));
  CHECK(t.phi.max_norm() == 0.0);
  CHECK((t.psi.values() - e.phi.values()).lpNorm<Eigen::Infinity>() <= 1e-8);
  CHECK(t.critical_param == doctest::Approx(sc.lambda1 + p.s).epsilon(1e-10));

  const Branch b = trace_coexistence_xi(p, sc.u_eta, t, sc.xi_options());
  const Alignment al = tangent_alignment(b, t, sc.u_eta, 1e-2);
  CHECK(al.angle_deg <= 5.0);
  for (const BranchPoint& q : b.points)
    CHECK((q.state.u.values() - sc.u_eta.values()).lpNorm<Eigen::Infinity>() <= 1e-9);
}

TEST_CASE("predator semi-trivial branch vanishes at lambda_1 + s") {
  Standard sc;
  ModelParams p = sc.params;
  p.xi = sc.lambda1 + p.s + 0.2;
  const SteadyState start{Field::zeros(sc.grid), predator_state(sc.grid, p).profile, p.eta, p.xi};
  ContinuationOptions o;
  o.kind = BranchKind::semitrivial_predator;
  o.initial_step = 1e-2;
  o.max_points = 200;
  o.window = {sc.lambda1 + p.s - 0.1, p.xi + 1.0};
  const Direction down{Field::zeros(sc.grid), Field::zeros(sc.grid), -1.0};
  const Branch b = continue_branch(start, p, down, o);
  REQUIRE(b.points.size() >= 5);
  CHECK(b.points.front().state.xi == p.xi);

  double previous = b.points.front().state.v.max_norm();
  for (std::size_t i = 1; i < b.points.size(); ++i) {
    const SteadyState& s = b.points[i].state;
    CHECK(s.u.max_norm() == 0.0);
    // past the threshold the corrector sits on the trivial state up to roundoff
    if (previous > 1e-6) CHECK(s.v.max_norm() <= previous + 1e-12);
    previous = s.v.max_norm();
  }
  // the amplitude dies out once xi reaches the threshold
  bool reached = false;
  for (const BranchPoint& q : b.points)
    if (q.state.xi <= sc.lambda1 + p.s + 1e-3) {
      CHECK(q.state.v.max_norm() <= 1e-2);
      reached = true;
    }
  CHECK(reached);
}

TEST_CASE("coexistence branch in eta emerges with both species positive") {
  Standard sc;
  const Field v_xi = predator_state(sc.grid, sc.params).profile;
  const KernelTangent t = kernel_tangent_eta(sc.grid, sc.params, v_xi);
  CHECK(t.critical_param > sc.lambda1 + sc.params.r);

  ContinuationOptions o;
  o.parameter = ContinuationParameter::eta;
  o.window = {t.critical_param - 1.0, t.critical_param + 1.0};
  const Branch b = trace_coexistence_eta(sc.params, v_xi, t, o);
  REQUIRE(b.points.size() >= 5);
  for (std::size_t i = 0; i < 5; ++i) {
    const SteadyState& s = b.points[i].state;
    CHECK(strictly_positive(s));
    CHECK(s.xi == sc.params.xi);
    CHECK(s.eta > t.critical_param);
  }
  CHECK(tangent_alignment(b, t, v_xi, 1e-2).angle_deg <= 5.0);
}

TEST_CASE("window edge and max_points stop reasons") {
  Standard sc;
  ContinuationOptions o = sc.xi_options();
  o.max_points = 7;
  const Branch capped = trace_coexistence_xi(sc.params, sc.u_eta, sc.tangent, o);
  CHECK(capped.stop == StopReason::max_points);
  CHECK(capped.points.size() == 7);

  o = sc.xi_options();
  o.window.hi = sc.tangent.critical_param + 0.05;
  const Branch windowed = trace_coexistence_xi(sc.params, sc.u_eta, sc.tangent, o);
  CHECK(windowed.stop == StopReason::window_edge);
  for (const BranchPoint& p : windowed.points) CHECK(o.window.contains(p.state.xi));
}

TEST_CASE("step collapse reports the points accepted so far") {
  Standard sc;
  const SteadyState start{sc.u_eta, Field::zeros(sc.grid), sc.params.eta, sc.params.xi};
  ContinuationOptions o;
  o.kind = BranchKind::semitrivial_prey;
  o.parameter = ContinuationParameter::eta;
  o.max_newton_iterations = 0;
  o.min_step = 1e-4;
  const Direction up{Field::zeros(sc.grid), Field::zeros(sc.grid), 1.0};
  try {
    continue_branch(start, sc.params, up, o);
    FAIL("expected ContinuationError");
  } catch (const ContinuationError& e) {
    CHECK(e.kind() == SolverFailure::step_collapse);
    REQUIRE(e.partial().points.size() == 1);
    CHECK(e.partial().points.front().state.eta == sc.params.eta);
  }
}

TEST_CASE("alignment needs a nonempty branch") {
  Standard sc;
  CHECK_THROWS_AS(tangent_alignment(Branch{}, sc.tangent, sc.u_eta, 1e-2), ValidationError);
}

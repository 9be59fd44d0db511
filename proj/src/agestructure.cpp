#include "holltan/agestructure.hpp"

#include <cmath>
#include <optional>
#include <string>

#include "holltan/eigen.hpp"
#include "holltan/errors.hpp"
#include "spd.hpp"

namespace holltan {

AgeProfile reconstruct_age_profile(const Grid& grid, const Field& mortality,
                                   const Field& boundary, double fertility,
                                   double decay_rate, double a_max, int n_ages,
                                   double tail_tolerance) {
  if (!(mortality.grid() == grid) || !(boundary.grid() == grid)) {
    throw ValidationError("age profile fields live on different grids");
  }
  if (boundary.min() < 0.0) throw ValidationError("boundary field must be nonnegative");
  if (!(decay_rate > 0.0)) throw ValidationError("decay rate must be positive");
  if (!(a_max > 0.0) || !std::isfinite(a_max)) throw ValidationError("A_max must be positive");
  if (n_ages < 1) throw ValidationError("n_ages must be at least 1");
  if (!std::isfinite(fertility) || fertility < 0.0) {
    throw ValidationError("fertility must be nonnegative");
  }

  const double da = a_max / n_ages;
  Eigen::SparseMatrix<double> generator = dirichlet_laplacian(grid).matrix;
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    generator.coeffRef(i, i) += mortality[i] + decay_rate;
  }
  Eigen::SparseMatrix<double> identity(grid.size(), grid.size());
  identity.setIdentity();
  const Eigen::SparseMatrix<double> implicit_side = identity + 0.5 * da * generator;
  const Eigen::SparseMatrix<double> explicit_side = identity - 0.5 * da * generator;

  std::optional<detail::SpdFactor> factor;
  try {
    factor.emplace(implicit_side, "Crank-Nicolson age step");
  } catch (const SolverError&) {
    throw SolverError(SolverFailure::step_instability,
                      "age step " + std::to_string(da) +
                          " is too large for the negative part of the mortality");
  }

  AgeProfile profile;
  profile.decay_rate = decay_rate;
  profile.fertility = fertility;
  profile.ages.reserve(n_ages + 1);
  profile.slices.reserve(n_ages + 1);

  // Crank-Nicolson does not damp the highest spatial modes, so roundoff in the
  // weighted profile stays near eps * |u(0)| while the profile itself decays.
  // Below that floor the slices carry no information and are stored as zero.
  Eigen::VectorXd weighted = fertility * boundary.values();
  const double floor = kAgeResolutionFloor * weighted.lpNorm<Eigen::Infinity>();
  bool resolved = true;
  profile.resolved_age = a_max;
  for (int k = 0; k <= n_ages; ++k) {
    const double a = k * da;
    if (k > 0 && resolved) {
      weighted = factor->solve(explicit_side * weighted);
      if (weighted.lpNorm<Eigen::Infinity>() <= floor) {
        resolved = false;
        profile.resolved_age = a;
        profile.tail_estimate = weighted.lpNorm<Eigen::Infinity>() / decay_rate;
        weighted.setZero();
      }
    }
    profile.ages.push_back(a);
    profile.slices.emplace_back(grid, std::exp(decay_rate * a) * weighted);
  }
  if (resolved) profile.tail_estimate = weighted.lpNorm<Eigen::Infinity>() / decay_rate;
  profile.truncated = profile.tail_estimate > tail_tolerance;
  return profile;
}

AgeIntegral age_integral(const AgeProfile& profile) {
  if (profile.slices.empty() || profile.slices.size() != profile.ages.size()) {
    throw ValidationError("age profile has no slices or mismatched ages");
  }
  const Grid& grid = profile.slices.front().grid();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(grid.size());
  const auto weighted = [&](std::size_t k) {
    return std::exp(-profile.decay_rate * profile.ages[k]) * profile.slices[k].values();
  };
  for (std::size_t k = 1; k < profile.ages.size(); ++k) {
    const double da = profile.ages[k] - profile.ages[k - 1];
    sum += 0.5 * da * (weighted(k - 1) + weighted(k));
  }
  const double tail =
      weighted(profile.ages.size() - 1).lpNorm<Eigen::Infinity>() / profile.decay_rate;
  return {Field(grid, std::move(sum)), tail};
}

Consistency consistency_check(const AgeProfile& profile, const Field& target) {
  return consistency_check(profile, target, profile.fertility);
}

Consistency consistency_check(const AgeProfile& profile, const Field& target, double fertility) {
  const AgeIntegral integral = age_integral(profile);
  if (!(integral.value.grid() == target.grid())) {
    throw ValidationError("profile and target live on different grids");
  }
  Consistency c;
  c.integral_residual = (integral.value.values() - target.values()).lpNorm<Eigen::Infinity>();
  c.renewal_residual = (profile.slices.front().values() - fertility * target.values())
                           .lpNorm<Eigen::Infinity>();
  return c;
}

Lemma1Witness lemma1_witness(const AgeProfile& profile, double growth_offset) {
  if (profile.slices.empty()) throw ValidationError("age profile has no slices");
  const Grid& grid = profile.slices.front().grid();
  const EigenPair base = principal_eigenpair(grid, Field::zeros(grid));

  Lemma1Witness w;
  w.z.reserve(profile.slices.size());
  w.bound.reserve(profile.slices.size());
  const double scale = profile.slices.front().max_norm();
  for (std::size_t k = 0; k < profile.slices.size(); ++k) {
    const Field& slice = profile.slices[k];
    // roundoff is bounded in the decay-weighted variable
    if (slice.min() < -1e-12 * scale * std::exp(profile.decay_rate * profile.ages[k])) {
      throw SolverError(SolverFailure::sign_change,
                        "age slice lost nonnegativity (min " + std::to_string(slice.min()) + ")");
    }
    w.z.push_back(inner(grid, base.phi.values(), slice.values()));
  }
  const double z0 = w.z.front();
  // Slack for roundoff in the eigenfunction and the quadrature sums.
  const double slack = 1e-10 * z0;
  w.holds = true;
  w.worst_excess = z0 > 0.0 ? -1.0 : 0.0;
  for (std::size_t k = 0; k < w.z.size(); ++k) {
    w.bound.push_back(z0 * std::exp((-base.lambda + growth_offset) * profile.ages[k]));
    const double excess = w.z[k] - w.bound[k];
    if (z0 > 0.0) w.worst_excess = std::max(w.worst_excess, excess / z0);
    if (excess > slack) w.holds = false;
  }
  return w;
}

}  // namespace holltan

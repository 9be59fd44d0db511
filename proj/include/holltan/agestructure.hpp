#pragma once

#include <vector>

#include "holltan/grid.hpp"

namespace holltan {

/// Age-resolved steady profile a -> u(a, .) on a uniform age mesh [0, A_max].
struct AgeProfile {
  std::vector<double> ages;
  std::vector<Field> slices;
  double decay_rate = 0.0;  // fertility loss rate (r or s)
  double fertility = 0.0;   // eta or xi
  /// Bound on the truncated tail of the decay-weighted age integral,
  /// exp(-decay A_max) ||u(A_max)||_inf / decay, valid for nonnegative mortality.
  double tail_estimate = 0.0;
  /// Set when tail_estimate exceeds the tolerance passed at reconstruction.
  bool truncated = false;
  /// Age at which the decay-weighted profile fell below kAgeResolutionFloor
  /// relative to u(0); later slices are stored as zero. A_max if it never did.
  double resolved_age = 0.0;
};

/// Relative size of the decay-weighted profile below which Crank-Nicolson
/// roundoff dominates the slice.
inline constexpr double kAgeResolutionFloor = 1e-12;

inline constexpr double kDefaultTailTolerance = 1e-6;

/// Marches du/da = (Lap - diag(mortality)) u from u(0) = fertility * boundary.
///
/// Crank-Nicolson is applied to the decay-weighted profile exp(-decay a) u,
/// so the trapezoidal age integral of the stored profile satisfies the
/// discrete identity (-Lap + mortality + decay) U = u(0) - exp(-decay A) u(A)
/// exactly. Mortality may be negative (predator gain). Throws SolverError
/// (step_instability) when I + (da/2)(-Lap + mortality + decay) is not
/// positive definite.
AgeProfile reconstruct_age_profile(const Grid& grid, const Field& mortality,
                                   const Field& boundary, double fertility,
                                   double decay_rate, double a_max, int n_ages,
                                   double tail_tolerance = kDefaultTailTolerance);

struct AgeIntegral {
  Field value;
  double truncation_estimate = 0.0;
};

/// Trapezoidal quadrature of exp(-decay a) u(a, .) over [0, A_max].
AgeIntegral age_integral(const AgeProfile& profile);

struct Consistency {
  double integral_residual = 0.0;  // ||age_integral - target||_inf
  double renewal_residual = 0.0;   // ||u(0) - fertility * target||_inf
};

/// The renewal residual uses the profile's own fertility unless one is given;
/// pass the model fertility to detect a profile built with the wrong one.
Consistency consistency_check(const AgeProfile& profile, const Field& target);
Consistency consistency_check(const AgeProfile& profile, const Field& target, double fertility);

/// z(a) = integral of phi_1 u(a) against the comparison curve
/// z(0) exp((-lambda_1 + growth_offset) a).
struct Lemma1Witness {
  std::vector<double> z;
  std::vector<double> bound;
  bool holds = false;
  double worst_excess = 0.0;  // max over ages of (z - bound) / z(0), <= 0 when it holds
};

/// `growth_offset` is an upper bound on the negative part of the mortality
/// (0 for the prey, beta2/m for the predator).
Lemma1Witness lemma1_witness(const AgeProfile& profile, double growth_offset = 0.0);

}  // namespace holltan

#pragma once

#include <optional>
#include <string>

#include "holltan/grid.hpp"

namespace holltan {

inline constexpr double kNewtonTolerance = 1e-10;
inline constexpr int kNewtonMaxIterations = 50;

/// Rate constants and fertility intensities of the predator-prey model.
/// The defaults are the reference scenario used throughout the tests.
struct ModelParams {
  double alpha1 = 1.0;  // prey self-limitation
  double alpha2 = 1.0;  // predation loss of prey
  double beta1 = 1.0;   // predator self-limitation
  double beta2 = 0.5;   // predator gain from prey
  double m = 2.0;       // Holling saturation
  double r = 1.0;       // prey fertility age decay
  double s = 1.0;       // predator fertility age decay
  double eta = 0.0;     // prey fertility intensity
  double xi = 0.0;      // predator fertility intensity

  /// Throws ValidationError naming the first offending constant.
  void validate() const;
};

enum class Species { prey, predator };

const char* to_string(Species s);

/// One-species steady state: (U_eta, V = 0) or (U = 0, V_xi).
struct SemiTrivialState {
  Species which = Species::prey;
  Field profile;
  double param = 0.0;  // eta for prey, xi for predator
};

/// Positive solution of -Laplacian U = growth U - crowding U^2, or the zero
/// field when growth <= lambda_1(0) (no positive solution exists there).
/// Newton starts from `initial` when given, otherwise from
/// 0.1 (growth / crowding) phi_1; if that start does not reach a strictly
/// positive solution the constant supersolution growth / crowding is used.
Field solve_logistic(const Grid& grid, double growth, double crowding,
                     double tol = kNewtonTolerance,
                     const std::optional<Field>& initial = std::nullopt);

/// Pointwise U / (1 + m U).
Field holling_saturation(const Field& u, double m);

SemiTrivialState prey_state(const Grid& grid, const ModelParams& params,
                            double tol = kNewtonTolerance);
SemiTrivialState predator_state(const Grid& grid, const ModelParams& params,
                                double tol = kNewtonTolerance);

/// lambda_1(s - beta2 P_eta): the predator fertility at which coexistence
/// states branch off (xi, U_eta, 0).
double bifurcation_point_xi0(const Grid& grid, const ModelParams& params,
                             const Field& u_eta);

/// lambda_1(r + alpha2 V_xi): the prey fertility at which coexistence states
/// branch off (eta, 0, V_xi).
double bifurcation_point_eta0(const Grid& grid, const ModelParams& params,
                              const Field& v_xi);

struct SmallnessCondition {
  double value = 0.0;      // beta2 (eta - r) / (alpha1 + m (eta - r))
  double threshold = 0.0;  // lambda_1 + s
  bool ok = false;         // value < threshold
};

/// Reported, never enforced. Requires eta > r.
SmallnessCondition smallness_condition(const ModelParams& params, double lambda1);

struct SemiTrivialBounds {
  Species which = Species::prey;
  double param = 0.0;
  double min = 0.0;
  double max = 0.0;
  double bound = 0.0;      // (eta - r)/alpha1 or (xi - s)/beta1
  double threshold = 0.0;  // lambda_1 + r or lambda_1 + s
  double tolerance = 0.0;  // slack on the upper bound, 10 tol
  bool trivial = false;
  bool positive = false;   // strictly positive at every node
  bool below_bound = false;
  bool above_threshold = false;  // param exceeds the existence threshold
  bool pass = false;
};

SemiTrivialBounds check_semitrivial_bounds(const SemiTrivialState& state,
                                           const ModelParams& params,
                                           double tol = kNewtonTolerance);

}  // namespace holltan

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "holltan/coexist.hpp"
#include "holltan/grid.hpp"
#include "holltan/semitrivial.hpp"

namespace holltan {

enum class Task { eig, semitrivial, bifurcate_xi, bifurcate_eta, continuation, age_profile, verify };

const char* to_string(Task t);

struct GridSpec {
  int dimension = 1;
  std::vector<Grid::Interval> bounds{{0.0, 1.0}};
  std::vector<int> n{199};
  Grid build() const { return build_grid(dimension, bounds, n); }
};

/// One experiment, read from a flat JSON object with a "task" discriminator.
/// Fertility intensities may be given absolutely ("eta", "xi") or as offsets
/// above the existence thresholds ("eta_offset": eta = lambda_1 + r + offset,
/// "xi_offset": xi = lambda_1 + s + offset); they are resolved once the grid's
/// lambda_1 is known.
struct Scenario {
  Task task = Task::eig;
  std::string name;
  GridSpec grid;
  ModelParams params;
  std::optional<double> eta;
  std::optional<double> eta_offset;
  std::optional<double> xi;
  std::optional<double> xi_offset;

  double tol = kNewtonTolerance;
  double eigen_tol = 1e-10;
  double bisection_tol = kBisectionTolerance;

  // continuation and bifurcation windows
  ContinuationParameter parameter = ContinuationParameter::xi;
  std::optional<double> xi_min;
  std::optional<double> xi_max;
  std::optional<double> eta_min;
  std::optional<double> eta_max;
  double initial_step = 1e-3;
  double min_step = 1e-9;
  double max_step = 0.05;
  int max_points = 40;

  // age profile
  Species species = Species::prey;
  std::optional<double> a_max;  // default 40 / decay rate
  int n_ages = 2000;
  int age_stride = 1;  // CSV rows written every age_stride slices
};

/// Throws ValidationError; messages name the offending key, and JSON syntax
/// errors carry the line number.
Scenario parse_scenario(const std::filesystem::path& path);
Scenario parse_scenario_text(const std::string& text);

/// Fills eta and xi from their offsets (default eta_offset 0.3 and
/// xi_offset 0.05 when neither form is given).
ModelParams resolve_params(const Scenario& scenario, double lambda1);

struct RunOptions {
  std::filesystem::path out_dir = ".";
  bool dump_fields = false;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitSolver = 3;

struct RunResult {
  int exit_code = kExitOk;
  std::string report;                        // JSON text, also written to report.json
  std::vector<std::filesystem::path> files;  // every file written
};

/// Executes the scenario's task. Module failures are captured in the report's
/// "error" section and reflected in the exit code; nothing is thrown for them.
RunResult run(const Scenario& scenario, const RunOptions& options);

}  // namespace holltan

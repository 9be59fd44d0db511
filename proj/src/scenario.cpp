#include "holltan/scenario.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

#include <json.hpp>

#include "holltan/errors.hpp"

namespace holltan {

using nlohmann::json;

const char* to_string(Task t) {
  switch (t) {
    case Task::eig: return "eig";
    case Task::semitrivial: return "semitrivial";
    case Task::bifurcate_xi: return "bifurcate-xi";
    case Task::bifurcate_eta: return "bifurcate-eta";
    case Task::continuation: return "continue";
    case Task::age_profile: return "age-profile";
    case Task::verify: return "verify";
  }
  return "unknown";
}

namespace {

constexpr std::array kKnownKeys = {
    "task",      "name",       "dimension",    "bounds",    "n",         "alpha1",
    "alpha2",    "beta1",      "beta2",        "m",         "r",         "s",
    "eta",       "eta_offset", "xi",           "xi_offset", "tol",       "eigen_tol",
    "bisection_tol", "parameter", "xi_min",    "xi_max",    "eta_min",   "eta_max",
    "initial_step", "min_step", "max_step",    "max_points", "species",  "a_max",
    "n_ages",    "age_stride",
};

[[noreturn]] void fail(std::string_view key, const std::string& message) {
  throw ValidationError("field '" + std::string(key) + "': " + message);
}

double number(const json& j, std::string_view key) {
  const json& v = j.at(std::string(key));
  if (!v.is_number()) fail(key, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(key, "must be finite");
  return x;
}

int integer(const json& j, std::string_view key) {
  const json& v = j.at(std::string(key));
  if (!v.is_number_integer()) fail(key, "expected an integer");
  return v.get<int>();
}

std::string text(const json& j, std::string_view key) {
  const json& v = j.at(std::string(key));
  if (!v.is_string()) fail(key, "expected a string");
  return v.get<std::string>();
}

void read(const json& j, std::string_view key, double& out) {
  if (j.contains(std::string(key))) out = number(j, key);
}
void read(const json& j, std::string_view key, int& out) {
  if (j.contains(std::string(key))) out = integer(j, key);
}
void read(const json& j, std::string_view key, std::optional<double>& out) {
  if (j.contains(std::string(key))) out = number(j, key);
}

Task parse_task(const std::string& name) {
  for (Task t : {Task::eig, Task::semitrivial, Task::bifurcate_xi, Task::bifurcate_eta,
                 Task::continuation, Task::age_profile, Task::verify}) {
    if (name == to_string(t)) return t;
  }
  fail("task", "unknown task '" + name + "'");
}

Grid::Interval interval(const json& v, std::string_view key) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    fail(key, "expected [lo, hi]");
  }
  const Grid::Interval iv{v[0].get<double>(), v[1].get<double>()};
  if (!(iv.lo < iv.hi)) fail(key, "bounds must satisfy lo < hi");
  return iv;
}

GridSpec parse_grid(const json& j) {
  GridSpec g;
  read(j, "dimension", g.dimension);
  if (g.dimension != 1 && g.dimension != 2) fail("dimension", "must be 1 or 2");

  g.bounds.assign(g.dimension, Grid::Interval{0.0, 1.0});
  if (j.contains("bounds")) {
    const json& b = j.at("bounds");
    if (g.dimension == 1) {
      g.bounds[0] = interval(b, "bounds");
    } else {
      if (!b.is_array() || b.size() != 2) fail("bounds", "expected [[x0, x1], [y0, y1]]");
      g.bounds[0] = interval(b[0], "bounds");
      g.bounds[1] = interval(b[1], "bounds");
    }
  }

  g.n.assign(g.dimension, g.dimension == 1 ? 199 : 49);
  if (j.contains("n")) {
    const json& n = j.at("n");
    if (n.is_number_integer()) {
      std::fill(g.n.begin(), g.n.end(), n.get<int>());
    } else if (n.is_array() && n.size() == static_cast<std::size_t>(g.dimension) &&
               std::all_of(n.begin(), n.end(), [](const json& x) { return x.is_number_integer(); })) {
      for (int a = 0; a < g.dimension; ++a) g.n[a] = n[a].get<int>();
    } else {
      fail("n", "expected an integer or one integer per axis");
    }
  }
  for (int count : g.n) {
    if (count < 3) fail("n", "needs at least 3 interior nodes per axis");
  }
  return g;
}

void positive(double v, std::string_view key) {
  if (!(v > 0.0)) fail(key, std::string(key) + " must be positive");
}

void check_window(const std::optional<double>& lo, const std::optional<double>& hi,
                  std::string_view lo_key, std::string_view hi_key) {
  if (lo && hi && !(*lo < *hi)) {
    fail(lo_key, std::string(lo_key) + " must be less than " + std::string(hi_key));
  }
}

Scenario from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("scenario must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(kKnownKeys.begin(), kKnownKeys.end(), key) == kKnownKeys.end()) {
      fail(key, "unknown key");
    }
  }
  if (!j.contains("task")) fail("task", "missing");

  Scenario sc;
  sc.task = parse_task(text(j, "task"));
  if (j.contains("name")) sc.name = text(j, "name");
  sc.grid = parse_grid(j);

  ModelParams& p = sc.params;
  read(j, "alpha1", p.alpha1);
  read(j, "alpha2", p.alpha2);
  read(j, "beta1", p.beta1);
  read(j, "beta2", p.beta2);
  read(j, "m", p.m);
  read(j, "r", p.r);
  read(j, "s", p.s);
  for (auto [key, value] : {std::pair{"alpha1", p.alpha1}, {"beta1", p.beta1}, {"m", p.m},
                            {"r", p.r}, {"s", p.s}}) {
    positive(value, key);
  }
  if (p.alpha2 < 0.0) fail("alpha2", "alpha2 must be nonnegative");
  if (p.beta2 < 0.0) fail("beta2", "beta2 must be nonnegative");

  read(j, "eta", sc.eta);
  read(j, "eta_offset", sc.eta_offset);
  read(j, "xi", sc.xi);
  read(j, "xi_offset", sc.xi_offset);
  if (sc.eta && sc.eta_offset) fail("eta_offset", "give either eta or eta_offset");
  if (sc.xi && sc.xi_offset) fail("xi_offset", "give either xi or xi_offset");
  if (sc.eta && *sc.eta < 0.0) fail("eta", "eta must be nonnegative");
  if (sc.xi && *sc.xi < 0.0) fail("xi", "xi must be nonnegative");

  read(j, "tol", sc.tol);
  read(j, "eigen_tol", sc.eigen_tol);
  read(j, "bisection_tol", sc.bisection_tol);
  positive(sc.tol, "tol");
  positive(sc.eigen_tol, "eigen_tol");
  positive(sc.bisection_tol, "bisection_tol");

  if (j.contains("parameter")) {
    const std::string name = text(j, "parameter");
    if (name == "xi") {
      sc.parameter = ContinuationParameter::xi;
    } else if (name == "eta") {
      sc.parameter = ContinuationParameter::eta;
    } else {
      fail("parameter", "expected \"xi\" or \"eta\"");
    }
  }
  read(j, "xi_min", sc.xi_min);
  read(j, "xi_max", sc.xi_max);
  read(j, "eta_min", sc.eta_min);
  read(j, "eta_max", sc.eta_max);
  check_window(sc.xi_min, sc.xi_max, "xi_min", "xi_max");
  check_window(sc.eta_min, sc.eta_max, "eta_min", "eta_max");

  read(j, "initial_step", sc.initial_step);
  read(j, "min_step", sc.min_step);
  read(j, "max_step", sc.max_step);
  read(j, "max_points", sc.max_points);
  positive(sc.initial_step, "initial_step");
  positive(sc.min_step, "min_step");
  positive(sc.max_step, "max_step");
  if (sc.max_step < sc.initial_step) fail("max_step", "must be at least initial_step");
  if (sc.min_step > sc.initial_step) fail("min_step", "must not exceed initial_step");
  if (sc.max_points < 1) fail("max_points", "must be at least 1");

  if (j.contains("species")) {
    const std::string name = text(j, "species");
    if (name == "prey") {
      sc.species = Species::prey;
    } else if (name == "predator") {
      sc.species = Species::predator;
    } else {
      fail("species", "expected \"prey\" or \"predator\"");
    }
  }
  read(j, "a_max", sc.a_max);
  if (sc.a_max) positive(*sc.a_max, "a_max");
  read(j, "n_ages", sc.n_ages);
  read(j, "age_stride", sc.age_stride);
  if (sc.n_ages < 1) fail("n_ages", "must be at least 1");
  if (sc.age_stride < 1) fail("age_stride", "must be at least 1");
  return sc;
}

}  // namespace

Scenario parse_scenario_text(const std::string& source) {
  json j;
  try {
    j = json::parse(source);
  } catch (const json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, source.size());
    const auto line = 1 + std::count(source.begin(), source.begin() + upto, '\n');
    throw ValidationError("line " + std::to_string(line) + ": malformed JSON (" +
                          e.what() + ")");
  }
  return from_json(j);
}

Scenario parse_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str());
}

ModelParams resolve_params(const Scenario& sc, double lambda1) {
  ModelParams p = sc.params;
  if (sc.eta) {
    p.eta = *sc.eta;
  } else {
    p.eta = lambda1 + p.r + sc.eta_offset.value_or(0.3);
  }
  if (sc.xi) {
    p.xi = *sc.xi;
  } else {
    p.xi = lambda1 + p.s + sc.xi_offset.value_or(0.05);
  }
  if (p.eta < 0.0) throw ValidationError("field 'eta_offset': resolved eta is negative");
  if (p.xi < 0.0) throw ValidationError("field 'xi_offset': resolved xi is negative");
  return p;
}

}  // namespace holltan

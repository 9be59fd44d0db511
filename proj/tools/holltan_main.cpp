#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "holltan/errors.hpp"
#include "holltan/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Steady states and bifurcations of the age-structured Holling-Tanner system"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = ".";
  bool dump_fields = false;

  auto* run = app.add_subcommand("run", "Run a scenario and write report.json plus task outputs");
  run->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  run->add_option("--out", out_dir, "Output directory");
  run->add_flag("--dump-fields", dump_fields, "Embed computed fields in the report");

  auto* validate = app.add_subcommand("validate", "Check a scenario file without running it");
  validate->add_option("scenario", scenario_path, "Scenario JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : holltan::kExitValidation;
  }

  holltan::Scenario scenario;
  try {
    scenario = holltan::parse_scenario(scenario_path);
    scenario.grid.build();
  } catch (const holltan::ValidationError& e) {
    std::cerr << scenario_path << ": " << e.what() << '\n';
    return holltan::kExitValidation;
  }

  if (validate->parsed()) {
    std::cout << scenario_path << ": ok (task " << holltan::to_string(scenario.task) << ")\n";
    return holltan::kExitOk;
  }

  const holltan::RunResult result =
      holltan::run(scenario, {std::filesystem::path(out_dir), dump_fields});
  std::cout << result.report;
  return result.exit_code;
}

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ofo/harness.hpp"

namespace {

std::vector<std::string> split_list(const std::string & s)
{
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) { out.push_back(item); }
  }
  return out;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Online feedback optimization simulator"};
  app.require_subcommand(1);

  std::string scenario, out, mode, modes;
  long long iters = -1;

  auto * run = app.add_subcommand("run", "Single run with the scenario parameters");
  run->add_option("--scenario", scenario, "Scenario file (JSON)")->required();
  run->add_option("--out", out, "Output directory");
  run->add_option("--mode", mode, "fixed | heuristic-diagonal | sdp-full | sdp-diagonal, or a variant name");
  run->add_option("--iters", iters, "Number of iterations");

  auto * sweep = app.add_subcommand("sweep", "Manual tuning sweep over the configured cases");
  sweep->add_option("--scenario", scenario, "Scenario file (JSON)")->required();
  sweep->add_option("--out", out, "Output directory");

  auto * compare = app.add_subcommand("compare", "Runs the scenario once per mode");
  compare->add_option("--scenario", scenario, "Scenario file (JSON)")->required();
  compare->add_option("--modes", modes, "Comma-separated modes, variants or sweep labels")->required();
  compare->add_option("--out", out, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    ofo::ScenarioConfig cfg = ofo::load_scenario(scenario);
    if (!out.empty()) { cfg.output_dir = out; }
    if (iters >= 0) { cfg.n_iters = static_cast<ofo::Index>(iters); }

    ofo::ErrorReport report;
    if (*run) {
      if (!mode.empty()) { cfg.params = ofo::variant_params(cfg, mode); }
      report = ofo::run_scenario(cfg);
    } else if (*sweep) {
      report = ofo::run_sweep(cfg);
    } else {
      report = ofo::compare_modes(cfg, split_list(modes));
    }
    ofo::print_report(std::cout, report);
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

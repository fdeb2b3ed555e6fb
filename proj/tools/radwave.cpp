// radwave: scenario-driven experiments for the radial wave equation with a
// small short-range electromagnetic potential.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "radwave/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"radwave: characteristic solver and weighted-estimate harness"};
  app.set_version_flag("--version", radwave::kVersion);
  app.require_subcommand(1, 1);

  std::string config_path, out_dir, seed_grid, mode;
  for (const auto& name : radwave::subcommands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "scenario config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
    sub->add_option("--seed-grid", seed_grid, "grid override, n=<int>");
    sub->add_option("--mode", mode, "boundary mode")->check(CLI::IsMember({"reflected", "paper"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? radwave::kExitOk : radwave::kExitUsage;
  }
  const std::string name = app.get_subcommands().front()->get_name();

  radwave::ScenarioConfig cfg;
  try {
    std::ifstream in(config_path);
    std::stringstream ss;
    ss << in.rdbuf();
    cfg = radwave::parse_config(ss.str());
    if (!out_dir.empty()) cfg.output.dir = out_dir;
    if (!mode.empty()) cfg.solver.mode = mode == "paper" ? radwave::BoundaryMode::PaperFormula : radwave::BoundaryMode::Reflected;
    if (!seed_grid.empty()) {
      if (seed_grid.rfind("n=", 0) != 0) throw std::invalid_argument("--seed-grid expects n=<int>");
      const int n = std::stoi(seed_grid.substr(2));
      if (n < 4) throw std::invalid_argument("--seed-grid: n must be at least 4");
      cfg.grid.n = n;
    }
  } catch (const std::exception& e) {
    std::cerr << "radwave: " << config_path << ": " << e.what() << '\n';
    return radwave::kExitUsage;
  }

  radwave::apply_thread_env();
  const radwave::RunResult res = radwave::run_subcommand(name, cfg);
  for (const auto& f : res.files) std::cout << f.string() << '\n';
  if (!res.message.empty()) (res.exit_code == 0 ? std::cout : std::cerr) << name << ": " << res.message << '\n';
  return res.exit_code;
}

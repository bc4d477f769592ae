#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "poleflow/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"S-matrix poles of 1D piecewise-constant potentials"};
  app.require_subcommand(1);

  std::string config;
  std::string figure;
  std::string out_dir = ".";
  for (const char* name : {"census", "flow", "spectrum"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("config", config, "run config (JSON with comments)")->required();
  }
  auto* rep = app.add_subcommand("reproduce", "run a bundled figure config");
  rep->add_option("figure_id", figure)->required();
  rep->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return poleflow::exit_config;
  }

  if (rep->parsed()) return poleflow::cmd_reproduce(figure, out_dir, std::cout, std::cerr);
  const std::string cmd = app.get_subcommands().front()->get_name();
  return poleflow::run_config_file(cmd, config, std::cout, std::cerr);
}

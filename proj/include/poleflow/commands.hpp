#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "poleflow/config.hpp"

namespace poleflow {

/// Process exit statuses of the CLI.
enum ExitCode : int {
  exit_ok = 0,
  exit_config = 2,
  exit_numerical = 3,
  exit_partial = 4,
};

/// Each command writes its files, prints a short summary to `out` and
/// diagnostics to `err`, and returns an ExitCode. Exceptions are mapped
/// to exit codes here, so callers never see them.
int cmd_census(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_flow(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_spectrum(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Loads `config_file` and runs the named command ("census", "flow",
/// "spectrum").
int run_config_file(const std::string& command, const std::filesystem::path& config_file,
                    std::ostream& out, std::ostream& err);

struct FigureRun {
  std::string name;
  std::string command;  // census, flow or spectrum
  std::string config;   // JSON with comments
};

struct Figure {
  std::string id;
  std::string description;
  std::vector<FigureRun> runs;
};

const std::vector<Figure>& bundled_figures();

/// Runs every bundled config of `figure_id`, writing under
/// `out_dir / figure_id`. Unknown ids give exit_config.
int cmd_reproduce(const std::string& figure_id, const std::filesystem::path& out_dir,
                  std::ostream& out, std::ostream& err);

}  // namespace poleflow

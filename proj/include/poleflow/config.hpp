#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "poleflow/flow.hpp"
#include "poleflow/potential.hpp"
#include "poleflow/rootfind.hpp"

namespace poleflow {

/// Malformed or inconsistent run configuration. The message names the field.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SweepConfig {
  SweepParameter parameter;
  double from = 0.0;
  double to = 0.0;
};

struct SpectrumConfig {
  double k_min = 0.0;
  double k_max = 0.0;
  int n = 0;
};

struct OutputConfig {
  std::filesystem::path census = "census.csv";
  std::filesystem::path flow = "flow.csv";
  std::filesystem::path spectrum = "spectrum.csv";
  std::optional<std::filesystem::path> branch_points;
};

/// Parsed run configuration. Relative output paths are resolved against
/// the directory of the config file.
struct RunConfig {
  Potential potential{{0.0, 1.0}, {0.0}};
  std::optional<Window> window;
  std::optional<SweepConfig> sweep;
  std::optional<SpectrumConfig> spectrum;
  ContinuationOptions continuation;
  OutputConfig output;

  PotentialFamily family() const;
};

/// JSON with // and /* */ comments. Unknown keys are rejected.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& file);

/// Worker threads allowed by POLEFLOW_THREADS (default 1).
int thread_cap();

}  // namespace poleflow

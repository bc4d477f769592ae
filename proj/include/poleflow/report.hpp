#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "poleflow/flow.hpp"

namespace poleflow {

struct SpectrumRow {
  double k;
  double t2;       // |t|^2
  double r2;       // |r_plus|^2
  double phase_t;  // arg t in (-pi, pi], plane waves referenced at x = 0
};

/// n uniformly spaced real momenta from k_min to k_max inclusive.
std::vector<SpectrumRow> scan_spectrum(const Potential& p, double k_min, double k_max, int n);

/// Shortest round-trip-safe text for the CSV/JSON outputs: 12 significant
/// digits, negative zero printed as 0.
std::string format_number(double v);

/// Flow samples as CSV (`param,trajectory_id,re_k,im_k,class,multiplicity,residual`,
/// rows ordered by trajectory id then param) and the events as
/// `<stem>_events.json` next to it. Throws std::runtime_error if a file
/// cannot be written.
void write_flow(const FlowResult& f, const std::filesystem::path& csv_path);

/// The events JSON path write_flow uses for `csv_path`.
std::filesystem::path events_path(const std::filesystem::path& csv_path);

std::string flow_csv(const FlowResult& f);
std::string events_json(const FlowResult& f);

/// One row per pole, `re_k,im_k,class,multiplicity,residual`, sorted by
/// Im k descending then Re k ascending.
void write_census(const std::vector<Zero>& zeros, const std::vector<PoleClass>& classes,
                  const std::filesystem::path& path);
std::string census_csv(const std::vector<Zero>& zeros, const std::vector<PoleClass>& classes);

void write_spectrum(const std::vector<SpectrumRow>& rows, const std::filesystem::path& path);
std::string spectrum_csv(const std::vector<SpectrumRow>& rows);

/// Parsed row of a flow CSV.
struct FlowRow {
  double param;
  int trajectory_id;
  cplx k;
  PoleClass cls;
  int multiplicity;
  double residual;
};

std::vector<FlowRow> read_flow_csv(const std::filesystem::path& path);
std::vector<FlowRow> parse_flow_csv(const std::string& text);

}  // namespace poleflow

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "poleflow/potential.hpp"
#include "poleflow/rootfind.hpp"
#include "poleflow/smatrix.hpp"

namespace poleflow {

enum class PoleClass { bound, anti_bound, resonance, anti_resonance, threshold };

std::string to_string(PoleClass c);
PoleClass pole_class_from_string(const std::string& s);

/// Threshold when |k| < axis_tol, axis classes when |Re k| <= axis_tol,
/// otherwise by the sign of Re k (upper half plane off-axis points, which
/// never occur for real potentials, fall back to the same rule).
PoleClass classify(cplx k, double axis_tol = 1e-7);

/// Decay width -4 Re(k) Im(k).
double gamma(cplx k);

/// D(k) of a fixed potential as an AnalyticFunction.
AnalyticFunction denominator_function(const Potential& p);

/// Zeros of D in w, restricted to w, sorted by Im k descending then Re k
/// ascending. The trivial zero at k = 0 of the free particle is dropped.
std::vector<Zero> pole_census(const Potential& p, const Window& w, const RootOptions& opts = {});

struct ContinuationOptions {
  double max_step_dist = 0.1;
  int census_interval = 25;
  double axis_tol = 1e-7;
  double coalescence_dist = 1e-4;
  double param_tol = 1e-8;
  /// Initial / largest / smallest |dp|; zero means |p_to - p_from| / 100,
  /// the same, and |p_to - p_from| * 1e-12 respectively.
  double dp_initial = 0.0;
  double dp_max = 0.0;
  double dp_min = 0.0;
  int success_streak = 3;
  int threads = 1;
  RootOptions roots;

  void validate() const;
};

enum class Provenance { initial_census, coalescence, window_entry };
std::string to_string(Provenance p);

struct FlowSample {
  double param;
  Zero zero;
  PoleClass cls;
};

struct Trajectory {
  int id = 0;
  Provenance provenance = Provenance::initial_census;
  std::vector<FlowSample> samples;
};

enum class EventKind {
  coalescence,
  axis_crossing,
  zero_energy,
  window_exit,
  window_entry,
  tracking_lost,
};
std::string to_string(EventKind e);
EventKind event_kind_from_string(const std::string& s);

struct FlowEvent {
  EventKind kind;
  double param;
  cplx k;
  std::vector<int> participants;  // trajectories the event closes or concerns
  std::vector<int> spawned;       // trajectories the event opens
};

struct CensusRecord {
  double param;
  int census_count;  // multiplicity sum inside the window
  int live_count;    // tracked poles inside the window before reconciliation
};

struct FlowResult {
  double param_from = 0.0;
  double param_to = 0.0;
  std::vector<Trajectory> trajectories;
  std::vector<FlowEvent> events;
  std::vector<CensusRecord> censuses;
  bool partial = false;
  std::string diagnostic;

  const Trajectory* find(int id) const;
};

/// Tracked poles at one parameter value.
struct FlowState {
  double param;
  std::vector<int> ids;
  std::vector<cplx> poles;
};

/// Events between two consecutive accepted states whose ids line up:
/// axis_crossing and zero_energy when an axis pole changes half plane or
/// reaches |k| < axis_tol, axis_crossing when Re k changes sign, and
/// coalescence when two poles of `next` are within coalescence_dist and a
/// box of radius 10x their distance counts two zeros of D(next).
std::vector<FlowEvent> detect_events(const FlowState& prev, const FlowState& next,
                                     const PotentialFamily& family,
                                     const ContinuationOptions& opts);

FlowResult sweep(const PotentialFamily& family, double p_from, double p_to, const Window& w,
                 const ContinuationOptions& opts = {});

/// Parameter values of the coalescence events of a sweep over the range,
/// ascending.
std::vector<double> coalescence_depths(const PotentialFamily& family, const Window& w,
                                       double p_from, double p_to,
                                       const ContinuationOptions& opts = {});

/// |dk/dp| of a simple pole at parameter p.
double mobility(const PotentialFamily& family, cplx k, double p);

}  // namespace poleflow

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "oracles.hpp"
#include "poleflow/flow.hpp"

using namespace poleflow;

namespace {

constexpr double pi = std::numbers::pi;

std::vector<const FlowEvent*> events_of(const FlowResult& r, EventKind k) {
  std::vector<const FlowEvent*> out;
  for (const FlowEvent& e : r.events)
    if (e.kind == k) out.push_back(&e);
  return out;
}

// Poles of every trajectory at exactly parameter p.
std::vector<cplx> poles_at(const FlowResult& r, double p) {
  std::vector<cplx> out;
  for (const Trajectory& t : r.trajectories)
    for (const FlowSample& s : t.samples)
      if (s.param == p) out.push_back(s.zero.k);
  return out;
}

}  // namespace

TEST_CASE("classification") {
  CHECK(classify({0, 0.8}) == PoleClass::bound);
  CHECK(classify({0, -0.3}) == PoleClass::anti_bound);
  CHECK(classify({2, -0.5}) == PoleClass::resonance);
  CHECK(classify({-2, -0.5}) == PoleClass::anti_resonance);
  CHECK(classify({1e-9, 1e-9}) == PoleClass::threshold);
  CHECK(classify({5e-8, 0.4}) == PoleClass::bound);
  CHECK(classify({2e-7, -0.4}) == PoleClass::resonance);
  for (PoleClass c : {PoleClass::bound, PoleClass::anti_bound, PoleClass::resonance,
                      PoleClass::anti_resonance, PoleClass::threshold})
    CHECK(pole_class_from_string(to_string(c)) == c);
  CHECK(to_string(PoleClass::anti_bound) == "anti_bound");
}

TEST_CASE("decay width") {
  CHECK(gamma({2, -0.5}) == doctest::Approx(4.0));
  CHECK(gamma({0, 1}) == 0.0);
  CHECK(gamma({-2, -0.5}) == doctest::Approx(-4.0));
}

TEST_CASE("pole census of a fixed potential") {
  CHECK(pole_census(Potential({-1, 1}, {0.0}), {-5, 5, -5, 5}).empty());
  const auto zs = pole_census(make_square_well(1.5, 2.0), {-6, 6, -10, 2});
  const auto kap = oracle::square_well_bound_kappas(2.0, 1.5);
  int bound = 0;
  for (const Zero& z : zs)
    if (classify(z.k) == PoleClass::bound) ++bound;
  CHECK(bound == int(kap.size()));
  // Sorted by Im k descending, then Re k ascending.
  for (std::size_t i = 1; i < zs.size(); ++i)
    CHECK((zs[i - 1].k.imag() > zs[i].k.imag() ||
           (zs[i - 1].k.imag() == zs[i].k.imag() && zs[i - 1].k.real() <= zs[i].k.real())));
}

TEST_CASE("zero-energy crossing of the first bound state") {
  const PotentialFamily fam = make_square_well_family(1.5);
  const double u1 = pi * pi / 18.0;
  const FlowResult r = sweep(fam, 1.2, 0.3, {-0.5, 0.5, -2, 2});
  CHECK_FALSE(r.partial);
  const auto ze = events_of(r, EventKind::zero_energy);
  REQUIRE(ze.size() == 1);
  CHECK(ze[0]->param == doctest::Approx(u1).epsilon(1e-6));
  CHECK(std::abs(ze[0]->k) < 1e-6);
  // The pole that carried the event goes from bound to anti_bound.
  REQUIRE(!ze[0]->participants.empty());
  const Trajectory* t = r.find(ze[0]->participants.front());
  REQUIRE(t != nullptr);
  CHECK(t->samples.front().cls == PoleClass::bound);
  CHECK(t->samples.back().cls == PoleClass::anti_bound);
}

TEST_CASE("two anti-bound poles merge at -i/a and leave as a resonance pair") {
  const double a = 1.5;
  const FlowResult r = sweep(make_square_well_family(a), 2.4, 1.6, {-1.5, 1.5, -2, 0.5});
  CHECK_FALSE(r.partial);
  const auto co = events_of(r, EventKind::coalescence);
  REQUIRE(co.size() == 1);
  const FlowEvent& e = *co[0];
  CHECK(std::abs(e.k - cplx(0, -1.0 / a)) < 1e-3);
  CHECK(e.participants.size() == 2);
  REQUIRE(e.spawned.size() == 2);
  for (int id : e.participants) {
    const Trajectory* t = r.find(id);
    REQUIRE(t != nullptr);
    CHECK(t->samples.back().cls == PoleClass::anti_bound);
  }
  std::map<PoleClass, int> out;
  for (int id : e.spawned) {
    const Trajectory* t = r.find(id);
    REQUIRE(t != nullptr);
    CHECK(t->provenance == Provenance::coalescence);
    out[t->samples.back().cls]++;
  }
  CHECK(out[PoleClass::resonance] == 1);
  CHECK(out[PoleClass::anti_resonance] == 1);
  // The double zero is really there: a tiny box counts two.
  const WindingResult w =
      count_zeros_detail(denominator_function(make_square_well(a, e.param)),
                         {-1e-3, 1e-3, -1.0 / a - 1e-3, -1.0 / a + 1e-3});
  CHECK(w.count == 2);
}

TEST_CASE("coalescence depths") {
  const double a = 1.5;
  const auto depths = coalescence_depths(make_square_well_family(a), {-3, 3, -3, 1}, 12.0, 0.5);
  REQUIRE(depths.size() >= 2);
  CHECK(std::is_sorted(depths.begin(), depths.end()));
  for (double U : depths) {
    const auto z = find_zeros(denominator_function(make_square_well(a, U)),
                              {-1e-4, 1e-4, -1.0 / a - 1e-4, -1.0 / a + 1e-4});
    CHECK(z.total_multiplicity == 2);
  }
  // Past the weak-wall regime a wall pushes resonances apart; nothing coalesces.
  CHECK(coalescence_depths(make_square_well_family(a), {-7, 7, -6, 1}, -0.2, -20.0).empty());
  // No potential at all.
  const PotentialFamily free(Potential({-1, 1}, {0.0}), {SweepTarget::width, 0, 0.0});
  CHECK(coalescence_depths(free, {-5, 5, -5, 1}, 2.0, 1.0).empty());
}

TEST_CASE("a weak wall still has one anti-bound double pole at -i/a") {
  const double a = 1.5;
  const auto d = coalescence_depths(make_square_well_family(a), {-7, 7, -6, 1}, -0.05, -0.2);
  REQUIRE(d.size() == 1);
  const double U = d[0];
  CHECK(U == doctest::Approx(-0.0976064).epsilon(1e-5));
  // Closed-form condition divided by K (even in K): value and slope vanish.
  auto F = [&](cplx k) {
    const cplx K = std::sqrt(k * k + 2.0 * U);
    return (k * K * std::cos(2.0 * a * K) - oracle::I * (k * k + U) * std::sin(2.0 * a * K)) / K;
  };
  const cplx k0(0, -1.0 / a);
  const double scale = std::abs(F(k0 + 0.5));
  CHECK(std::abs(F(k0)) < 1e-12 * scale);
  CHECK(std::abs(oracle::central_diff(F, k0, 1e-3)) < 1e-6 * scale);
}

TEST_CASE("sweep argument checks") {
  const PotentialFamily fam = make_square_well_family(1.5);
  CHECK_THROWS_AS(sweep(fam, 1.0, 1.0, {-1, 1, -1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(sweep(fam, 1.0, 2.0, {1, -1, -1, 1}), std::invalid_argument);
  ContinuationOptions bad;
  bad.max_step_dist = -1.0;
  CHECK_THROWS_AS(sweep(fam, 1.0, 2.0, {-1, 1, -1, 1}, bad), std::invalid_argument);
}

TEST_CASE("trajectory and census invariants on a square-well sweep") {
  const FlowResult r = sweep(make_square_well_family(1.5), 0.3, 6.0, {-4, 4, -3, 4});
  CHECK_FALSE(r.partial);
  REQUIRE(!r.trajectories.empty());
  for (const Trajectory& t : r.trajectories) {
    for (std::size_t i = 1; i < t.samples.size(); ++i) {
      CHECK(t.samples[i].param > t.samples[i - 1].param);
      CHECK(std::abs(t.samples[i].zero.k - t.samples[i - 1].zero.k) <= 0.1 + 1e-12);
    }
    // Along a bound trajectory Im k grows with the depth.
    bool all_bound = std::all_of(t.samples.begin(), t.samples.end(),
                                 [](const FlowSample& s) { return s.cls == PoleClass::bound; });
    if (all_bound)
      for (std::size_t i = 1; i < t.samples.size(); ++i)
        CHECK(t.samples[i].zero.k.imag() > t.samples[i - 1].zero.k.imag());
  }
  // Between window events the live poles equal the census count. The first
  // record is the initial census, taken before anything is tracked.
  for (std::size_t i = 1; i < r.censuses.size(); ++i) {
    const CensusRecord& c = r.censuses[i];
    const bool reconciled = std::any_of(r.events.begin(), r.events.end(), [&](const FlowEvent& e) {
      return e.param == c.param &&
             (e.kind == EventKind::window_entry || e.kind == EventKind::window_exit);
    });
    if (!reconciled) CHECK(c.census_count == c.live_count);
  }
  // After reconciliation the tracked poles match the census at the end.
  int live_end = 0;
  for (const Trajectory& t : r.trajectories)
    if (!t.samples.empty() && t.samples.back().param == r.param_to)
      live_end += t.samples.back().zero.multiplicity;
  CHECK(live_end == r.censuses.back().census_count);
  // Off-axis poles come in k, -conj(k) pairs at every common parameter.
  const auto ps = poles_at(r, r.param_to);
  for (cplx k : ps) {
    const cplx m = -std::conj(k);
    const double d = std::abs(*std::min_element(ps.begin(), ps.end(), [&](cplx x, cplx y) {
      return std::abs(x - m) < std::abs(y - m);
    }) - m);
    CHECK(d < 1e-8);
  }
  // The final census agrees with the bisection oracle for bound states.
  int bound = 0;
  for (cplx k : ps)
    if (classify(k) == PoleClass::bound) ++bound;
  CHECK(bound == int(oracle::square_well_bound_kappas(6.0, 1.5).size()));
}

TEST_CASE("a wall never produces axis poles") {
  const FlowResult r = sweep(make_square_well_family(1.5), -0.5, -20.0, {-7, 7, -6, 2});
  CHECK_FALSE(r.partial);
  for (const Trajectory& t : r.trajectories)
    for (const FlowSample& s : t.samples) {
      CHECK(s.cls != PoleClass::bound);
      CHECK(s.cls != PoleClass::anti_bound);
    }
  CHECK(events_of(r, EventKind::coalescence).empty());
}

TEST_CASE("event detection between states") {
  const PotentialFamily fam = make_square_well_family(1.5);
  ContinuationOptions o;
  // Far from any event.
  const FlowState a{2.0, {1, 2}, {cplx(1.1, -0.9), cplx(-1.1, -0.9)}};
  const FlowState b{2.01, {1, 2}, {cplx(1.09, -0.91), cplx(-1.09, -0.91)}};
  CHECK(detect_events(a, b, fam, o).empty());
  // A bound pole dropping through k = 0.
  const FlowState c{0.55, {3}, {cplx(0, 0.01)}};
  const FlowState d{0.54, {3}, {cplx(0, -0.01)}};
  const auto ev = detect_events(c, d, fam, o);
  auto has = [&](EventKind k) {
    return std::any_of(ev.begin(), ev.end(), [&](const FlowEvent& e) { return e.kind == k; });
  };
  CHECK(has(EventKind::axis_crossing));
  CHECK(has(EventKind::zero_energy));
  CHECK_FALSE(has(EventKind::coalescence));
}

TEST_CASE("mobility follows the pole velocity") {
  const PotentialFamily fam = make_square_well_family(1.5);
  const auto zs = pole_census(fam.at(2.0), {-0.1, 0.1, 0.5, 3});
  REQUIRE(!zs.empty());
  const cplx k = zs.front().k;
  const double h = 1e-5;
  const cplx kp = newton_polish(denominator_function(fam.at(2.0 + h)), k, 1e-14, 50).k;
  const cplx km = newton_polish(denominator_function(fam.at(2.0 - h)), k, 1e-14, 50).k;
  const double fd = std::abs(kp - km) / (2.0 * h);
  CHECK(mobility(fam, k, 2.0) == doctest::Approx(fd).epsilon(1e-5));
}

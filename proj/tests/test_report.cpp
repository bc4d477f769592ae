#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "oracles.hpp"
#include "poleflow/report.hpp"

using namespace poleflow;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir() {
  const fs::path d = fs::temp_directory_path() / "poleflow_test_report";
  fs::create_directories(d);
  return d;
}

std::vector<PoleClass> classes_of(const std::vector<Zero>& zs) {
  std::vector<PoleClass> out;
  for (const Zero& z : zs) out.push_back(classify(z.k));
  return out;
}

}  // namespace

TEST_CASE("number formatting") {
  CHECK(format_number(0.0) == "0");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(1.5) == "1.5");
  CHECK(format_number(-2.0) == "-2");
  CHECK(format_number(std::numbers::pi) == "3.14159265359");
  CHECK(format_number(1e-20) == "1e-20");
  CHECK(std::stod(format_number(1.0 / 3.0)) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("empty flow writes a header and no events") {
  const FlowResult f;
  CHECK(flow_csv(f) == "param,trajectory_id,re_k,im_k,class,multiplicity,residual\n");
  CHECK(nlohmann::json::parse(events_json(f)) == nlohmann::json::parse(R"({"events":[]})"));
  const fs::path p = scratch_dir() / "empty.csv";
  write_flow(f, p);
  CHECK(slurp(p) == flow_csv(f));
  CHECK(events_path(p) == scratch_dir() / "empty_events.json");
  CHECK(fs::exists(events_path(p)));
  CHECK(read_flow_csv(p).empty());
}

TEST_CASE("one bound trajectory gives one bound row per sample") {
  FlowResult f;
  Trajectory t;
  t.id = 3;
  for (int i = 0; i < 5; ++i) {
    Zero z;
    z.k = {0.0, 0.5 + 0.1 * i};
    t.samples.push_back({1.0 + i, z, PoleClass::bound});
  }
  f.trajectories.push_back(t);
  const auto rows = parse_flow_csv(flow_csv(f));
  REQUIRE(rows.size() == 5);
  for (const FlowRow& r : rows) {
    CHECK(r.cls == PoleClass::bound);
    CHECK(r.trajectory_id == 3);
  }
}

TEST_CASE("rows are ordered by trajectory id then param") {
  FlowResult f;
  for (int id : {7, 2}) {
    Trajectory t;
    t.id = id;
    for (double p : {3.0, 1.0, 2.0}) t.samples.push_back({p, Zero{{1.0, -1.0}}, PoleClass::resonance});
    f.trajectories.push_back(t);
  }
  const auto rows = parse_flow_csv(flow_csv(f));
  REQUIRE(rows.size() == 6);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const bool ordered = rows[i - 1].trajectory_id < rows[i].trajectory_id ||
                         (rows[i - 1].trajectory_id == rows[i].trajectory_id &&
                          rows[i - 1].param < rows[i].param);
    CHECK(ordered);
  }
}

TEST_CASE("flow CSV round trip and byte stability on a real sweep") {
  const FlowResult f = sweep(make_square_well_family(1.5), 2.4, 1.6, {-1.5, 1.5, -2, 0.5});
  const std::string csv = flow_csv(f);
  const auto rows = parse_flow_csv(csv);
  std::size_t n = 0;
  for (const Trajectory& t : f.trajectories) n += t.samples.size();
  REQUIRE(rows.size() == n);
  for (const FlowRow& r : rows) {
    const Trajectory* t = f.find(r.trajectory_id);
    REQUIRE(t != nullptr);
    const FlowSample* hit = nullptr;
    for (const FlowSample& s : t->samples)
      if (std::abs(s.param - r.param) <= 1e-11 * std::max(1.0, std::abs(s.param))) hit = &s;
    REQUIRE(hit != nullptr);
    CHECK(std::abs(hit->zero.k - r.k) <= 1e-11 * std::max(1.0, std::abs(r.k)));
    CHECK(hit->cls == r.cls);
    CHECK(hit->zero.multiplicity == r.multiplicity);
  }
  const FlowResult g = sweep(make_square_well_family(1.5), 2.4, 1.6, {-1.5, 1.5, -2, 0.5});
  CHECK(flow_csv(g) == csv);
  CHECK(events_json(g) == events_json(f));

  // One coalescence at -i/a in the JSON.
  const auto j = nlohmann::json::parse(events_json(f));
  int co = 0;
  for (const auto& e : j["events"]) {
    REQUIRE(e.contains("participants"));
    if (e["kind"] == "coalescence") {
      ++co;
      CHECK(std::hypot(e["re_k"].get<double>(), e["im_k"].get<double>() + 1.0 / 1.5) < 1e-3);
    }
  }
  CHECK(co == 1);
}

TEST_CASE("malformed flow CSV is rejected") {
  CHECK_THROWS_AS(parse_flow_csv("a,b\n"), std::runtime_error);
  CHECK_THROWS_AS(parse_flow_csv("param,trajectory_id,re_k,im_k,class,multiplicity,residual\n1,2,3\n"),
                  std::runtime_error);
  CHECK_THROWS_AS(
      parse_flow_csv("param,trajectory_id,re_k,im_k,class,multiplicity,residual\n1,2,3,4,weird,1,0\n"),
      std::exception);
}

TEST_CASE("census CSV") {
  CHECK(census_csv({}, {}) == "re_k,im_k,class,multiplicity,residual\n");
  CHECK_THROWS_AS(census_csv({Zero{}}, {}), std::invalid_argument);

  const double a = 1.5, U = 2.0;
  const auto zs = pole_census(make_square_well(a, U), {-6, 6, -10, 2});
  const fs::path p = scratch_dir() / "census.csv";
  write_census(zs, classes_of(zs), p);
  const std::string text = slurp(p);
  CHECK(text == census_csv(zs, classes_of(zs)));

  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  std::vector<cplx> ks;
  std::vector<double> bound;
  while (std::getline(in, line)) {
    std::stringstream ls(line);
    std::string re, im, cls;
    std::getline(ls, re, ',');
    std::getline(ls, im, ',');
    std::getline(ls, cls, ',');
    ks.emplace_back(std::stod(re), std::stod(im));
    if (cls == "bound") bound.push_back(std::stod(im));
  }
  // Sorted by Im k descending, so the bound rows already come largest first.
  const auto kap = oracle::square_well_bound_kappas(U, a);
  REQUIRE(bound.size() == kap.size());
  for (std::size_t i = 0; i < kap.size(); ++i) CHECK(std::abs(bound[i] - kap[i]) < 1e-9);
  for (std::size_t i = 1; i < ks.size(); ++i)
    CHECK((ks[i - 1].imag() > ks[i].imag() ||
           (ks[i - 1].imag() == ks[i].imag() && ks[i - 1].real() <= ks[i].real())));
  // re_k -> -re_k maps the printed set onto itself.
  for (cplx k : ks) {
    double best = INFINITY;
    for (cplx q : ks) best = std::min(best, std::abs(q - cplx(-k.real(), k.imag())));
    CHECK(best < 1e-8);
  }
}

TEST_CASE("spectrum") {
  CHECK_THROWS_AS(scan_spectrum(make_square_well(1.5, 1.0), 0.0, 1.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(scan_spectrum(make_square_well(1.5, 1.0), 1.0, 2.0, 1), std::invalid_argument);

  const auto fr = scan_spectrum(Potential({-1, 1}, {0.0}), 0.1, 5.0, 50);
  REQUIRE(fr.size() == 50);
  CHECK(fr.front().k == 0.1);
  CHECK(fr.back().k == 5.0);
  for (const SpectrumRow& r : fr) {
    CHECK(r.t2 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r.r2 < 1e-28);
  }

  // Square well: full transmission where 2aK = n pi.
  const double a = 1.5, U = 1.0;
  for (int n = 2; n <= 5; ++n) {
    const double K = n * std::numbers::pi / (2.0 * a);
    const double k = std::sqrt(K * K - 2.0 * U);
    const auto rows = scan_spectrum(make_square_well(a, U), k, k + 1.0, 2);
    CHECK(rows[0].t2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rows[0].r2 < 1e-20);
  }
  const auto rows = scan_spectrum(make_square_well(a, U), 0.05, 6.0, 300);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].t2 + rows[i].r2 == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(rows[i].phase_t > -std::numbers::pi);
    CHECK(rows[i].phase_t <= std::numbers::pi);
    if (i) CHECK(rows[i].k > rows[i - 1].k);
  }
  CHECK(spectrum_csv(rows).rfind("k,t2,r2,phase_t\n", 0) == 0);
}

TEST_CASE("unwritable destinations throw") {
  const fs::path bad = "/proc/poleflow_no_such_dir/out.csv";
  CHECK_THROWS_AS(write_flow(FlowResult{}, bad), std::runtime_error);
  CHECK_THROWS_AS(write_census({}, {}, bad), std::runtime_error);
  CHECK_THROWS_AS(write_spectrum({}, bad), std::runtime_error);
}

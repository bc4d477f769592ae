#include "poleflow/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace poleflow {

std::vector<SpectrumRow> scan_spectrum(const Potential& p, double k_min, double k_max, int n) {
  if (!(k_min > 0.0) || !(k_max > k_min) || !std::isfinite(k_max))
    throw std::invalid_argument("spectrum needs 0 < k_min < k_max");
  if (n < 2) throw std::invalid_argument("spectrum needs at least 2 points");
  std::vector<SpectrumRow> rows;
  rows.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double k = i == n - 1 ? k_max : k_min + (k_max - k_min) * i / (n - 1);
    const SMatrixEval e = s_matrix(p, cplx{k, 0.0});
    double ph = std::arg(e.t);
    if (ph <= -std::numbers::pi) ph = std::numbers::pi;
    rows.push_back({k, std::norm(e.t), std::norm(e.r_plus), ph});
  }
  return rows;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  std::string s(buf);
  if (s == "-0") s = "0";
  return s;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  out.close();
  if (!out) throw std::runtime_error("error while writing " + path.string());
}

// strtod rather than stod: subnormal values must not throw.
double to_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') throw std::runtime_error("not a number: '" + s + "'");
  return v;
}

double rounded(double v) { return to_double(format_number(v)); }

}  // namespace

std::filesystem::path events_path(const std::filesystem::path& csv_path) {
  std::filesystem::path p = csv_path;
  p.replace_filename(csv_path.stem().string() + "_events.json");
  return p;
}

std::string flow_csv(const FlowResult& f) {
  std::vector<const Trajectory*> ts;
  for (const Trajectory& t : f.trajectories) ts.push_back(&t);
  std::sort(ts.begin(), ts.end(), [](auto a, auto b) { return a->id < b->id; });
  std::ostringstream os;
  os << "param,trajectory_id,re_k,im_k,class,multiplicity,residual\n";
  for (const Trajectory* t : ts) {
    std::vector<const FlowSample*> ss;
    for (const FlowSample& s : t->samples) ss.push_back(&s);
    std::stable_sort(ss.begin(), ss.end(), [](auto a, auto b) { return a->param < b->param; });
    for (const FlowSample* s : ss)
      os << format_number(s->param) << ',' << t->id << ',' << format_number(s->zero.k.real()) << ','
         << format_number(s->zero.k.imag()) << ',' << to_string(s->cls) << ','
         << s->zero.multiplicity << ',' << format_number(s->zero.residual) << '\n';
  }
  return os.str();
}

std::string events_json(const FlowResult& f) {
  nlohmann::ordered_json j;
  j["events"] = nlohmann::ordered_json::array();
  for (const FlowEvent& e : f.events) {
    nlohmann::ordered_json ev;
    ev["kind"] = to_string(e.kind);
    ev["param"] = rounded(e.param);
    ev["re_k"] = rounded(e.k.real()) == 0.0 ? 0.0 : rounded(e.k.real());
    ev["im_k"] = rounded(e.k.imag()) == 0.0 ? 0.0 : rounded(e.k.imag());
    ev["participants"] = e.participants;
    if (!e.spawned.empty()) ev["spawned"] = e.spawned;
    j["events"].push_back(ev);
  }
  if (f.partial) {
    j["partial"] = true;
    j["diagnostic"] = f.diagnostic;
  }
  return j.dump(1) + "\n";
}

void write_flow(const FlowResult& f, const std::filesystem::path& csv_path) {
  write_text(csv_path, flow_csv(f));
  write_text(events_path(csv_path), events_json(f));
}

std::string census_csv(const std::vector<Zero>& zeros, const std::vector<PoleClass>& classes) {
  if (zeros.size() != classes.size())
    throw std::invalid_argument("census needs one class per zero");
  std::vector<std::size_t> idx(zeros.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  // Order on the printed values: mirror pairs whose Im k differ by an ulp
  // print equal and must come out Re ascending.
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const double ia = rounded(zeros[a].k.imag()), ib = rounded(zeros[b].k.imag());
    if (ia != ib) return ia > ib;
    return rounded(zeros[a].k.real()) < rounded(zeros[b].k.real());
  });
  std::ostringstream os;
  os << "re_k,im_k,class,multiplicity,residual\n";
  for (std::size_t i : idx)
    os << format_number(zeros[i].k.real()) << ',' << format_number(zeros[i].k.imag()) << ','
       << to_string(classes[i]) << ',' << zeros[i].multiplicity << ','
       << format_number(zeros[i].residual) << '\n';
  return os.str();
}

void write_census(const std::vector<Zero>& zeros, const std::vector<PoleClass>& classes,
                  const std::filesystem::path& path) {
  write_text(path, census_csv(zeros, classes));
}

std::string spectrum_csv(const std::vector<SpectrumRow>& rows) {
  std::ostringstream os;
  os << "k,t2,r2,phase_t\n";
  for (const SpectrumRow& r : rows)
    os << format_number(r.k) << ',' << format_number(r.t2) << ',' << format_number(r.r2) << ','
       << format_number(r.phase_t) << '\n';
  return os.str();
}

void write_spectrum(const std::vector<SpectrumRow>& rows, const std::filesystem::path& path) {
  write_text(path, spectrum_csv(rows));
}

std::vector<FlowRow> parse_flow_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "param,trajectory_id,re_k,im_k,class,multiplicity,residual")
    throw std::runtime_error("not a flow CSV (bad header)");
  std::vector<FlowRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 7) throw std::runtime_error("malformed flow CSV row: " + line);
    try {
      rows.push_back({to_double(f[0]), std::stoi(f[1]), cplx{to_double(f[2]), to_double(f[3])},
                      pole_class_from_string(f[4]), std::stoi(f[5]), to_double(f[6])});
    } catch (const std::logic_error&) {
      throw std::runtime_error("malformed flow CSV row: " + line);
    }
  }
  return rows;
}

std::vector<FlowRow> read_flow_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_flow_csv(ss.str());
}

}  // namespace poleflow

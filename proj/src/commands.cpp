#include "poleflow/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

#include "poleflow/flow.hpp"
#include "poleflow/report.hpp"

namespace poleflow {

namespace {

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const RootFindError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return exit_numerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_numerical;
  }
}

std::string fmt_k(cplx k) {
  return "(" + format_number(k.real()) + ", " + format_number(k.imag()) + ")";
}

const Window& need_window(const RunConfig& cfg) {
  if (!cfg.window) throw ConfigError("missing field 'window'");
  return *cfg.window;
}

void ensure_parent(const std::filesystem::path& p) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
}

}  // namespace

int cmd_census(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Window& w = need_window(cfg);
    RootOptions ro = cfg.continuation.roots;
    ro.threads = thread_cap();
    const std::vector<Zero> zs = pole_census(cfg.potential, w, ro);
    std::vector<PoleClass> cls;
    std::map<std::string, int> counts;
    int unconverged = 0;
    for (const Zero& z : zs) {
      cls.push_back(classify(z.k, cfg.continuation.axis_tol));
      counts[to_string(cls.back())] += z.multiplicity;
      if (!z.newton_converged) ++unconverged;
    }
    ensure_parent(cfg.output.census);
    write_census(zs, cls, cfg.output.census);
    out << "census: " << zs.size() << " poles";
    for (const auto& [name, n] : counts) out << ", " << n << ' ' << name;
    out << " -> " << cfg.output.census.string() << '\n';
    if (unconverged > 0) {
      err << "numerical failure: " << unconverged << " zero(s) did not polish\n";
      return int(exit_numerical);
    }
    return int(exit_ok);
  });
}

int cmd_flow(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Window& w = need_window(cfg);
    if (!cfg.sweep) throw ConfigError("missing field 'sweep'");
    if (cfg.sweep->from == cfg.sweep->to)
      throw ConfigError("'sweep.from' and 'sweep.to' must differ");
    const PotentialFamily fam = cfg.family();
    ContinuationOptions co = cfg.continuation;
    co.threads = thread_cap();
    const FlowResult r = sweep(fam, cfg.sweep->from, cfg.sweep->to, w, co);
    ensure_parent(cfg.output.flow);
    write_flow(r, cfg.output.flow);
    for (const FlowEvent& e : r.events) {
      out << to_string(e.kind) << " p=" << format_number(e.param) << " k=" << fmt_k(e.k);
      if (!e.participants.empty()) {
        out << " closes";
        for (int id : e.participants) out << ' ' << id;
      }
      if (!e.spawned.empty()) {
        out << " opens";
        for (int id : e.spawned) out << ' ' << id;
      }
      out << '\n';
    }
    if (cfg.output.branch_points) {
      std::set<double> params;
      for (const Trajectory& t : r.trajectories)
        for (const FlowSample& s : t.samples) params.insert(s.param);
      std::ofstream bp(*cfg.output.branch_points, std::ios::binary | std::ios::trunc);
      if (!bp) throw std::runtime_error("cannot write " + cfg.output.branch_points->string());
      bp << "param,re_k,im_k\n";
      for (double p : params)
        for (const cplx& b : branch_points(fam.at(p)))
          bp << format_number(p) << ',' << format_number(b.real()) << ',' << format_number(b.imag())
             << '\n';
    }
    out << "flow: " << r.trajectories.size() << " trajectories, " << r.events.size()
        << " events -> " << cfg.output.flow.string() << '\n';
    if (r.partial) {
      err << "partial result: " << r.diagnostic << '\n';
      return int(exit_partial);
    }
    return int(exit_ok);
  });
}

int cmd_spectrum(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!cfg.spectrum) throw ConfigError("missing field 'spectrum'");
    const SpectrumConfig& sc = *cfg.spectrum;
    const std::vector<SpectrumRow> rows = scan_spectrum(cfg.potential, sc.k_min, sc.k_max, sc.n);
    ensure_parent(cfg.output.spectrum);
    write_spectrum(rows, cfg.output.spectrum);
    out << "spectrum: " << rows.size() << " rows -> " << cfg.output.spectrum.string() << '\n';
    if (cfg.window) {
      // Transmission maxima against the fourth-quadrant poles of the window.
      RootOptions ro = cfg.continuation.roots;
      ro.threads = thread_cap();
      std::vector<cplx> res;
      for (const Zero& z : pole_census(cfg.potential, *cfg.window, ro))
        if (classify(z.k, cfg.continuation.axis_tol) == PoleClass::resonance) res.push_back(z.k);
      for (std::size_t i = 1; i + 1 < rows.size(); ++i) {
        if (!(rows[i].t2 > rows[i - 1].t2 && rows[i].t2 >= rows[i + 1].t2)) continue;
        out << "peak k=" << format_number(rows[i].k) << " t2=" << format_number(rows[i].t2);
        auto best = std::min_element(res.begin(), res.end(), [&](cplx a, cplx b) {
          return std::abs(a.real() - rows[i].k) < std::abs(b.real() - rows[i].k);
        });
        if (best != res.end()) out << " nearest resonance k=" << fmt_k(*best);
        out << '\n';
      }
    }
    return int(exit_ok);
  });
}

int run_config_file(const std::string& command, const std::filesystem::path& config_file,
                    std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = load_config(config_file);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return exit_config;
  }
  if (command == "census") return cmd_census(cfg, out, err);
  if (command == "flow") return cmd_flow(cfg, out, err);
  if (command == "spectrum") return cmd_spectrum(cfg, out, err);
  err << "unknown command '" << command << "'\n";
  return exit_config;
}

int cmd_reproduce(const std::string& figure_id, const std::filesystem::path& out_dir,
                  std::ostream& out, std::ostream& err) {
  const auto& figs = bundled_figures();
  auto it = std::find_if(figs.begin(), figs.end(), [&](const Figure& f) { return f.id == figure_id; });
  if (it == figs.end()) {
    err << "unknown figure id '" << figure_id << "'; known:";
    for (const Figure& f : figs) err << ' ' << f.id;
    err << '\n';
    return exit_config;
  }
  const std::filesystem::path dir = out_dir / figure_id;
  try {
    std::filesystem::create_directories(dir);
  } catch (const std::exception& e) {
    err << "cannot create " << dir.string() << ": " << e.what() << '\n';
    return exit_config;
  }
  out << figure_id << ": " << it->description << '\n';
  int worst = exit_ok;
  for (const FigureRun& run : it->runs) {
    out << "[" << run.name << "]\n";
    int rc = exit_ok;
    {
      std::ofstream keep(dir / (run.name + ".jsonc"), std::ios::binary | std::ios::trunc);
      keep << run.config;
    }
    try {
      const RunConfig cfg = parse_config(run.config, dir);
      if (run.command == "census")
        rc = cmd_census(cfg, out, err);
      else if (run.command == "flow")
        rc = cmd_flow(cfg, out, err);
      else
        rc = cmd_spectrum(cfg, out, err);
    } catch (const ConfigError& e) {
      err << "bundled config " << run.name << ": " << e.what() << '\n';
      rc = exit_config;
    }
    worst = std::max(worst, rc);
  }
  return worst;
}

}  // namespace poleflow

#include "poleflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <stdexcept>
#include <thread>

namespace poleflow {

std::string to_string(PoleClass c) {
  switch (c) {
    case PoleClass::bound: return "bound";
    case PoleClass::anti_bound: return "anti_bound";
    case PoleClass::resonance: return "resonance";
    case PoleClass::anti_resonance: return "anti_resonance";
    case PoleClass::threshold: return "threshold";
  }
  return "?";
}

PoleClass pole_class_from_string(const std::string& s) {
  for (PoleClass c : {PoleClass::bound, PoleClass::anti_bound, PoleClass::resonance,
                      PoleClass::anti_resonance, PoleClass::threshold})
    if (to_string(c) == s) return c;
  throw std::invalid_argument("unknown pole class '" + s + "'");
}

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::initial_census: return "initial_census";
    case Provenance::coalescence: return "coalescence";
    case Provenance::window_entry: return "window_entry";
  }
  return "?";
}

std::string to_string(EventKind e) {
  switch (e) {
    case EventKind::coalescence: return "coalescence";
    case EventKind::axis_crossing: return "axis_crossing";
    case EventKind::zero_energy: return "zero_energy";
    case EventKind::window_exit: return "window_exit";
    case EventKind::window_entry: return "window_entry";
    case EventKind::tracking_lost: return "tracking_lost";
  }
  return "?";
}

EventKind event_kind_from_string(const std::string& s) {
  for (EventKind e : {EventKind::coalescence, EventKind::axis_crossing, EventKind::zero_energy,
                      EventKind::window_exit, EventKind::window_entry, EventKind::tracking_lost})
    if (to_string(e) == s) return e;
  throw std::invalid_argument("unknown event kind '" + s + "'");
}

PoleClass classify(cplx k, double axis_tol) {
  if (std::abs(k) < axis_tol) return PoleClass::threshold;
  if (std::abs(k.real()) <= axis_tol)
    return k.imag() > 0.0 ? PoleClass::bound : PoleClass::anti_bound;
  return k.real() > 0.0 ? PoleClass::resonance : PoleClass::anti_resonance;
}

double gamma(cplx k) { return -4.0 * k.real() * k.imag(); }

AnalyticFunction denominator_function(const Potential& p) {
  return [p](cplx k) {
    const ScaledDenominator d = denominator_jet(p, k);
    return Sample{d.value, d.derivative, d.magnitude, d.log_scale};
  };
}

std::vector<Zero> pole_census(const Potential& p, const Window& w, const RootOptions& opts) {
  const ZeroCensus c = find_zeros(denominator_function(p), w, opts);
  std::vector<Zero> out;
  const bool free = p.is_free();
  for (const Zero& z : c.zeros) {
    if (!w.contains(z.k)) continue;
    if (free && std::abs(z.k) < 1e-8) {
      if (z.multiplicity == 1) continue;
      Zero rest = z;
      rest.multiplicity -= 1;
      out.push_back(rest);
      continue;
    }
    out.push_back(z);
  }
  return out;
}

void ContinuationOptions::validate() const {
  auto pos = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument(std::string(name) + " must be positive");
  };
  auto nonneg = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument(std::string(name) + " must be non-negative");
  };
  pos(max_step_dist, "max_step_dist");
  pos(axis_tol, "axis_tol");
  pos(coalescence_dist, "coalescence_dist");
  pos(param_tol, "param_tol");
  nonneg(dp_initial, "dp_initial");
  nonneg(dp_max, "dp_max");
  nonneg(dp_min, "dp_min");
  if (census_interval < 1) throw std::invalid_argument("census_interval must be >= 1");
  if (success_streak < 1) throw std::invalid_argument("success_streak must be >= 1");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  roots.validate();
}

const Trajectory* FlowResult::find(int id) const {
  for (const Trajectory& t : trajectories)
    if (t.id == id) return &t;
  return nullptr;
}

double mobility(const PotentialFamily& family, cplx k, double p) {
  return std::abs(pole_velocity(family, k, p));
}

namespace {

bool on_axis(cplx k, double tol) { return std::abs(k.real()) <= tol; }

// Regula falsi with the Illinois modification. Returns the root estimate.
template <class G>
double illinois(G&& g, double a, double ga, double b, double gb, double xtol, int max_iter = 200) {
  int side = 0;
  for (int it = 0; it < max_iter && std::abs(b - a) > xtol; ++it) {
    const double x = (a * gb - b * ga) / (gb - ga);
    const double gx = g(x);
    if (gx == 0.0) return x;
    if ((gx > 0.0) == (gb > 0.0)) {
      b = x;
      gb = gx;
      if (side == -1) ga *= 0.5;
      side = -1;
    } else {
      a = x;
      ga = gx;
      if (side == +1) gb *= 0.5;
      side = +1;
    }
  }
  if (ga == gb) return 0.5 * (a + b);
  return (a * gb - b * ga) / (gb - ga);
}

template <class F>
void parallel_for(int n, int threads, F&& body) {
  if (threads <= 1 || n < 4) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  const int t = std::min(threads, n);
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errs(t);
  for (int w = 0; w < t; ++w)
    pool.emplace_back([&, w] {
      try {
        for (int i = w; i < n; i += t) body(i);
      } catch (...) {
        errs[w] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

std::vector<FlowEvent> simple_events(const FlowState& prev, const FlowState& next,
                                     double axis_tol) {
  std::vector<FlowEvent> out;
  std::map<int, cplx> before;
  for (std::size_t i = 0; i < prev.ids.size(); ++i) before[prev.ids[i]] = prev.poles[i];
  for (std::size_t i = 0; i < next.ids.size(); ++i) {
    auto it = before.find(next.ids[i]);
    if (it == before.end()) continue;
    const cplx a = it->second, b = next.poles[i];
    const int id = next.ids[i];
    if (on_axis(a, axis_tol) && on_axis(b, axis_tol)) {
      const bool crossed = (a.imag() > 0.0) != (b.imag() > 0.0);
      const bool reached = std::abs(b) < axis_tol && std::abs(a) >= axis_tol;
      if (crossed || reached) {
        out.push_back({EventKind::zero_energy, next.param, b, {id}, {}});
        out.push_back({EventKind::axis_crossing, next.param, b, {id}, {}});
      }
    } else if (!on_axis(a, axis_tol) && !on_axis(b, axis_tol) &&
               (a.real() > 0.0) != (b.real() > 0.0)) {
      out.push_back({EventKind::axis_crossing, next.param, b, {id}, {}});
    }
  }
  return out;
}

}  // namespace

std::vector<FlowEvent> detect_events(const FlowState& prev, const FlowState& next,
                                     const PotentialFamily& family,
                                     const ContinuationOptions& opts) {
  std::vector<FlowEvent> out = simple_events(prev, next, opts.axis_tol);
  const AnalyticFunction f = denominator_function(family.at(next.param));
  for (std::size_t i = 0; i < next.poles.size(); ++i)
    for (std::size_t j = i + 1; j < next.poles.size(); ++j) {
      const double d = std::abs(next.poles[i] - next.poles[j]);
      if (d >= opts.coalescence_dist) continue;
      const cplx c = 0.5 * (next.poles[i] + next.poles[j]);
      const double r = 10.0 * std::max(d, 1e-12 * (1.0 + std::abs(c)));
      try {
        if (count_zeros(f, Window{c.real() - r, c.real() + r, c.imag() - r, c.imag() + r},
                        opts.roots) == 2)
          out.push_back({EventKind::coalescence, next.param, c, {next.ids[i], next.ids[j]}, {}});
      } catch (const RootFindError&) {
      }
    }
  return out;
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

struct Live {
  int id;
  Zero z;
};

struct Coalescence {
  double p_star;
  cplx k_star;
  double p_after;
  Zero z1, z2;
  Window box;  // isolates the pair from p_ to p_after
};

struct PairMoments {
  double s;      // Re (k1 - k2)^2
  cplx e1, e2;   // k1 + k2 and k1 k2
};

class Sweeper {
 public:
  Sweeper(const PotentialFamily& family, double p_from, double p_to, const Window& w,
          const ContinuationOptions& opts)
      : fam_(family), p_from_(p_from), p_to_(p_to), w_(w), o_(opts) {
    range_ = std::abs(p_to - p_from);
    dir_ = p_to > p_from ? 1.0 : -1.0;
    dp_max_ = o_.dp_max > 0.0 ? o_.dp_max : range_ / 100.0;
    dp_ = o_.dp_initial > 0.0 ? std::min(o_.dp_initial, dp_max_) : dp_max_;
    dp_min_ = o_.dp_min > 0.0 ? o_.dp_min : range_ * 1e-12;
    o_.roots.threads = o_.threads;
    hi_ = o_.roots;
    hi_.quad_tol = 1e-11;
    hi_.threads = 1;
    res_.param_from = p_from;
    res_.param_to = p_to;
  }

  FlowResult run() {
    p_ = p_from_;
    if (!initial_census()) return std::move(res_);
    int streak = 0, fails = 0, since_census = 0;
    bool census_due = false;
    while (ahead(p_to_, p_)) {
      double h = std::min(dp_, std::abs(p_to_ - p_));
      if (!births_.empty()) h = std::min(h, std::abs(births_.front().param - p_));
      double p1 = p_ + dir_ * h;
      if (std::abs(p_to_ - p1) < 1e-13 * std::max(1.0, range_)) p1 = p_to_;
      if (!births_.empty() && std::abs(births_.front().param - p1) < 1e-15 * (1.0 + std::abs(p1)))
        p1 = births_.front().param;

      int bad = -1, bad2 = -1;
      std::vector<Zero> next;
      const bool ok = step(live_, p_, p1, next, bad, bad2);
      if (!ok) {
        ++fails;
        streak = 0;
        if (h < range_ * 1e-4 && try_stall_coalescence(bad, bad2)) {
          fails = 0;
          census_due = false;
          continue;
        }
        if (fails == 8 && births_.empty()) {
          if (!reconcile(p_)) return std::move(res_);
          since_census = 0;
        }
        dp_ = h / 2.0;
        if (dp_ < dp_min_) {
          // The census would reopen a lost pole; repeated underflows would never end.
          if (++underflows_ > 16) {
            res_.partial = true;
            res_.diagnostic = "step size underflow at p = " + num(p_);
            return std::move(res_);
          }
          if (bad >= 0) lose(static_cast<std::size_t>(bad), p_, "step size underflow");
          dp_ = std::min(dp_max_, dp_min_ * 1024.0);
          fails = 0;
        }
        continue;
      }

      // A partner pair that changed type inside the step went through a double pole.
      if (auto flip = find_flip(next); flip.first >= 0) {
        const auto [i, j] = flip;
        auto c = resolve(static_cast<std::size_t>(i), static_cast<std::size_t>(j), p_,
                         std::pair{next[i].k, next[j].k}, p1);
        if (c) {
          apply(*c, static_cast<std::size_t>(i), static_cast<std::size_t>(j));
          fails = 0;
          continue;
        }
        dp_ = h / 2.0;
        ++fails;
        continue;
      }
      fails = 0;

      const FlowState before = state(p_);
      const double p0 = p_;
      for (std::size_t i = 0; i < live_.size(); ++i) live_[i].z = next[i];
      p_ = p1;
      FlowState after = state(p_);
      bool event = handle_axis_events(before, after, p0);

      // Window exits; the outside position is not stored as a sample.
      for (std::size_t i = 0; i < live_.size();) {
        if (!w_.contains(live_[i].z.k)) {
          res_.events.push_back({EventKind::window_exit, p_, live_[i].z.k, {live_[i].id}, {}});
          live_.erase(live_.begin() + static_cast<std::ptrdiff_t>(i));
          event = true;
        } else {
          record(live_[i].id, p_, live_[i].z);
          ++i;
        }
      }
      if (!births_.empty() && births_.front().param == p_) {
        for (const Pending& b : births_.front().poles) live_.push_back({b.id, b.z});
        births_.erase(births_.begin());
        census_due = true;
      }

      ++since_census;
      if (++streak >= o_.success_streak) {
        dp_ = std::min(2.0 * dp_, dp_max_);
        streak = 0;
      }
      if (try_ahead_coalescence()) {
        census_due = false;
        continue;
      }
      if (births_.empty() && (event || census_due || since_census >= o_.census_interval)) {
        if (!reconcile(p_)) return std::move(res_);
        since_census = 0;
        census_due = false;
      }
    }
    if (births_.empty() && since_census > 0) reconcile(p_);
    return std::move(res_);
  }

 private:
  struct Pending {
    int id;
    Zero z;
  };
  struct Birth {
    double param;
    std::vector<Pending> poles;
  };

  bool ahead(double a, double b) const { return (a - b) * dir_ > 0.0; }

  AnalyticFunction f_at(double p) const { return denominator_function(fam_.at(p)); }

  FlowState state(double p) const {
    FlowState s{p, {}, {}};
    for (const Live& l : live_) {
      s.ids.push_back(l.id);
      s.poles.push_back(l.z.k);
    }
    return s;
  }

  int open(Provenance prov, double p, const Zero& z) {
    Trajectory t;
    t.id = static_cast<int>(res_.trajectories.size());
    t.provenance = prov;
    t.samples.push_back({p, z, classify(z.k, o_.axis_tol)});
    res_.trajectories.push_back(std::move(t));
    return res_.trajectories.back().id;
  }

  void record(int id, double p, const Zero& z) {
    auto& s = res_.trajectories[static_cast<std::size_t>(id)].samples;
    if (!s.empty() && !ahead(p, s.back().param)) return;
    s.push_back({p, z, classify(z.k, o_.axis_tol)});
  }

  void lose(std::size_t i, double p, const std::string& why) {
    res_.events.push_back({EventKind::tracking_lost, p, live_[i].z.k, {live_[i].id}, {}});
    if (res_.diagnostic.empty()) res_.diagnostic = why;
    live_.erase(live_.begin() + static_cast<std::ptrdiff_t>(i));
  }

  bool initial_census() {
    std::vector<Zero> zs;
    try {
      zs = pole_census(fam_.at(p_), w_, o_.roots);
    } catch (const RootFindError& e) {
      res_.partial = true;
      res_.diagnostic = std::string("initial census failed: ") + e.what();
      return false;
    }
    res_.censuses.push_back({p_, total(zs), 0});
    for (const Zero& z : zs) live_.push_back({open(Provenance::initial_census, p_, z), z});
    return true;
  }

  static int total(const std::vector<Zero>& zs) {
    int n = 0;
    for (const Zero& z : zs) n += z.multiplicity;
    return n;
  }

  // Full census at p, matched against the live poles.
  bool reconcile(double p) {
    std::vector<Zero> zs;
    try {
      zs = pole_census(fam_.at(p), w_, o_.roots);
    } catch (const RootFindError& first) {
      RootOptions retry = o_.roots;
      retry.max_edge_evals *= 4;
      retry.dilation = 1.07;
      try {
        zs = pole_census(fam_.at(p), w_, retry);
      } catch (const RootFindError& e) {
        res_.partial = true;
        res_.diagnostic = "census failed at p = " + num(p) + ": " + e.what();
        return false;
      }
    }
    res_.censuses.push_back({p, total(zs), static_cast<int>(live_.size())});
    std::vector<int> used(live_.size(), 0);
    for (const Zero& z : zs) {
      int need = z.multiplicity;
      const double tol = 1e-6 * (1.0 + std::abs(z.k)) + o_.roots.cluster_diameter;
      while (need > 0) {
        int best = -1;
        double bd = tol;
        for (std::size_t i = 0; i < live_.size(); ++i) {
          if (used[i] >= live_[i].z.multiplicity) continue;
          const double d = std::abs(live_[i].z.k - z.k);
          if (d <= bd) {
            bd = d;
            best = static_cast<int>(i);
          }
        }
        if (best < 0) break;
        const int take = std::min(need, live_[best].z.multiplicity - used[best]);
        used[best] += take;
        need -= take;
      }
      if (need > 0) {
        Zero nz = z;
        nz.multiplicity = need;
        const int id = open(Provenance::window_entry, p, nz);
        live_.push_back({id, nz});
        used.push_back(need);
        res_.events.push_back({EventKind::window_entry, p, nz.k, {}, {id}});
      }
    }
    for (std::size_t i = used.size(); i-- > 0;)
      if (used[i] == 0) lose(i, p, "tracked pole missing from census");
    return true;
  }

  // One predictor-corrector step of every pole in `set` from p0 to p1.
  bool step(const std::vector<Live>& set, double p0, double p1, std::vector<Zero>& out, int& bad,
            int& bad2) const {
    const int n = static_cast<int>(set.size());
    out.assign(set.size(), Zero{});
    std::vector<char> fine(set.size(), 0);
    const Potential pot1 = fam_.at(p1);
    const AnalyticFunction f1 = denominator_function(pot1);
    const double dp = p1 - p0;
    parallel_for(n, o_.threads, [&](int i) {
      const Live& l = set[static_cast<std::size_t>(i)];
      cplx pred = l.z.k;
      if (l.z.multiplicity == 1) {
        const cplx v = pole_velocity(fam_, l.z.k, p0);
        pred = l.z.k + dp * v;
      }
      const double move = std::abs(pred - l.z.k);
      if (!std::isfinite(move) || move > o_.max_step_dist) return;
      const Zero z = newton_polish(f1, pred, o_.roots.polish_tol, o_.roots.max_newton_iter,
                                   l.z.multiplicity, o_.roots.residual_tol);
      out[static_cast<std::size_t>(i)] = z;
      if (!z.newton_converged) return;
      if (std::abs(z.k - l.z.k) > o_.max_step_dist) return;
      if (std::abs(z.k - pred) > 0.5 * move + 1e-4 * o_.max_step_dist) return;
      fine[static_cast<std::size_t>(i)] = 1;
    });
    for (int i = 0; i < n; ++i)
      if (!fine[static_cast<std::size_t>(i)]) {
        bad = i;
        return false;
      }
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double before = std::abs(set[i].z.k - set[j].z.k);
        const double after = std::abs(out[i].k - out[j].k);
        if (after < 1e-8 * (1.0 + std::abs(out[i].k)) || after < 0.05 * before) {
          bad = i;
          bad2 = j;
          return false;
        }
      }
    return true;
  }

  // Pairs that can meet in a double pole: adjacent poles on the imaginary
  // axis, or mirror images k, -conj(k).
  int pair_type(cplx a, cplx b) const {
    const double tol = o_.axis_tol;
    if (on_axis(a, tol) && on_axis(b, tol)) return -1;
    if (!on_axis(a, tol) && !on_axis(b, tol) &&
        std::abs(a + std::conj(b)) <= 1e-6 * (1.0 + std::abs(a)))
      return +1;
    return 0;
  }

  double partner_radius() const { return 10.0 * o_.max_step_dist; }

  std::pair<int, int> find_flip(const std::vector<Zero>& next) const {
    for (std::size_t i = 0; i < live_.size(); ++i)
      for (std::size_t j = i + 1; j < live_.size(); ++j) {
        const cplx a = live_[i].z.k, b = live_[j].z.k;
        if (std::abs(a - b) > partner_radius()) continue;
        const int t0 = pair_type(a, b);
        const int t1 = pair_type(next[i].k, next[j].k);
        if (t0 != 0 && t1 != 0 && t0 != t1) return {static_cast<int>(i), static_cast<int>(j)};
      }
    return {-1, -1};
  }

  std::optional<PairMoments> moments(double p, const Window& box) const {
    try {
      const WindingResult r = count_zeros_detail(f_at(p), box, hi_);
      if (r.count != 2) return std::nullopt;
      const cplx e1 = r.moment1;
      const cplx e2 = 0.5 * (e1 * e1 - r.moment2);
      return PairMoments{(e1 * e1 - 4.0 * e2).real(), e1, e2};
    } catch (const RootFindError&) {
      return std::nullopt;
    }
  }

  // Locates the double pole of the pair (i, j) beyond p_. With `other`
  // the pair positions at p_b are known and bracket the event.
  std::optional<Coalescence> resolve(std::size_t i, std::size_t j, double pa,
                                     std::optional<std::pair<cplx, cplx>> other,
                                     double pb_known) const {
    const cplx ka = live_[i].z.k, kb = live_[j].z.k;
    const cplx ca = 0.5 * (ka + kb);
    const double sep_a = std::abs(ka - kb);
    const double sa = ((ka - kb) * (ka - kb)).real();
    cplx c = ca;
    double h = 2.0 * sep_a;
    double pb = 0.0, sb = 0.0;
    if (other) {
      const auto [ra, rb] = *other;
      const cplx cb = 0.5 * (ra + rb);
      const double sep_b = std::abs(ra - rb);
      c = 0.5 * (ca + cb);
      h = std::max(sep_a, sep_b) + std::abs(ca - cb);
      pb = pb_known;
      sb = ((ra - rb) * (ra - rb)).real();
    }
    h += 1e-6 * (1.0 + std::abs(c));
    double room = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < live_.size(); ++m)
      if (m != i && m != j) room = std::min(room, std::abs(live_[m].z.k - c));
    h = std::min(h, 0.45 * room);
    if (h < 0.6 * sep_a) return std::nullopt;
    const Window box{c.real() - h, c.real() + h, c.imag() - h, c.imag() + h};

    if (!other) {
      const cplx va = pole_velocity(fam_, ka, pa), vb = pole_velocity(fam_, kb, pa);
      const double ds = 2.0 * ((ka - kb) * (va - vb)).real();
      if (!(std::abs(ds) > 0.0) || !std::isfinite(ds)) return std::nullopt;
      const double p_est = pa - sa / ds;
      if (!ahead(p_est, pa)) return std::nullopt;
      bool found = false;
      for (double f : {1.5, 3.0, 6.0, 12.0}) {
        pb = pa + f * (p_est - pa);
        const bool last = !ahead(p_to_, pb);
        if (last) pb = p_to_;
        const auto m = moments(pb, box);
        if (!m) return std::nullopt;
        sb = m->s;
        if ((sb > 0.0) != (sa > 0.0)) {
          found = true;
          break;
        }
        if (last) return std::nullopt;
      }
      if (!found) return std::nullopt;
    }
    if ((sb > 0.0) == (sa > 0.0)) return std::nullopt;

    bool failed = false;
    double ta = pa, tsa = sa, tb = pb, tsb = sb;  // latest true values at each end
    auto g = [&](double p) {
      const auto m = moments(p, box);
      if (!m) {
        failed = true;
        return 0.0;
      }
      if ((m->s > 0.0) == (tsb > 0.0)) {
        tb = p;
        tsb = m->s;
      } else {
        ta = p;
        tsa = m->s;
      }
      return m->s;
    };
    double p_star = illinois(g, pa, sa, pb, sb, o_.param_tol);
    if (failed) return std::nullopt;
    if (tsb != tsa && tb != ta) p_star = (ta * tsb - tb * tsa) / (tsb - tsa);
    const double slope = std::abs((tsb - tsa) / (tb - ta));
    if (!std::isfinite(slope) || slope == 0.0) return std::nullopt;

    const auto at_star = moments(p_star, box);
    if (!at_star) return std::nullopt;
    Coalescence out;
    out.box = box;
    out.p_star = p_star;
    out.k_star = 0.5 * at_star->e1;

    double dpa = o_.coalescence_dist * o_.coalescence_dist / slope;
    dpa = std::max(dpa, 4.0 * o_.param_tol);
    out.p_after = p_star + dir_ * dpa;
    if (!ahead(p_to_, out.p_after)) out.p_after = p_to_;
    if (!ahead(out.p_after, p_star)) return std::nullopt;

    const auto after = moments(out.p_after, box);
    if (!after || (after->s > 0.0) == (sa > 0.0)) return std::nullopt;
    const cplx disc = std::sqrt(after->e1 * after->e1 - 4.0 * after->e2);
    const AnalyticFunction f = f_at(out.p_after);
    out.z1 = newton_polish(f, 0.5 * (after->e1 + disc), o_.roots.polish_tol,
                           o_.roots.max_newton_iter, 1, o_.roots.residual_tol);
    out.z2 = newton_polish(f, 0.5 * (after->e1 - disc), o_.roots.polish_tol,
                           o_.roots.max_newton_iter, 1, o_.roots.residual_tol);
    if (!out.z1.newton_converged || !out.z2.newton_converged) return std::nullopt;
    const double sep = std::abs(out.z1.k - out.z2.k);
    if (sep <= o_.roots.cluster_diameter || !box.contains(out.z1.k) || !box.contains(out.z2.k))
      return std::nullopt;
    const cplx mid = 0.5 * (out.z1.k + out.z2.k);
    const double r = 10.0 * sep;
    try {
      if (count_zeros(f, Window{mid.real() - r, mid.real() + r, mid.imag() - r, mid.imag() + r},
                      o_.roots) != 2)
        return std::nullopt;
    } catch (const RootFindError&) {
      return std::nullopt;
    }
    // Keep the mirror pair ordered with the positive real part first.
    if (out.z1.k.real() < out.z2.k.real()) std::swap(out.z1, out.z2);
    return out;
  }

  void apply(const Coalescence& c, std::size_t i, std::size_t j) {
    if (i > j) std::swap(i, j);
    const int a = live_[i].id, b = live_[j].id;
    Zero dbl;
    dbl.k = c.k_star;
    dbl.multiplicity = 2;
    {
      const Sample s = f_at(c.p_star)(c.k_star);
      dbl.residual = std::abs(s.value) / s.magnitude;
      dbl.newton_converged = dbl.residual < o_.roots.residual_tol;
    }
    approach(i, j, c);
    record(a, c.p_star, dbl);
    record(b, c.p_star, dbl);
    live_.erase(live_.begin() + static_cast<std::ptrdiff_t>(j));
    live_.erase(live_.begin() + static_cast<std::ptrdiff_t>(i));
    const int n1 = open(Provenance::coalescence, c.p_after, c.z1);
    const int n2 = open(Provenance::coalescence, c.p_after, c.z2);
    res_.events.push_back({EventKind::coalescence, c.p_star, c.k_star, {a, b}, {n1, n2}});
    Birth birth{c.p_after, {{n1, c.z1}, {n2, c.z2}}};
    auto pos = std::find_if(births_.begin(), births_.end(),
                            [&](const Birth& x) { return ahead(x.param, c.p_after); });
    births_.insert(pos, birth);
  }

  // Samples of the merging pair between the last accepted step and p_star.
  // The pair separates like sqrt(p_star - p), so p_star - p ~ (1 - m/M)^2
  // spaces them evenly in k.
  void approach(std::size_t i, std::size_t j, const Coalescence& c) {
    cplx ka = live_[i].z.k, kb = live_[j].z.k;
    const double pa = p_;
    const double dist = std::max(std::abs(ka - c.k_star), std::abs(kb - c.k_star));
    const int M = static_cast<int>(std::ceil(dist / (0.5 * o_.max_step_dist)));
    for (int m = 1; m < M; ++m) {
      const double s = 1.0 - double(m) / M;
      const double p = c.p_star - (c.p_star - pa) * s * s;
      const auto mo = moments(p, c.box);
      if (!mo) return;
      const cplx disc = std::sqrt(mo->e1 * mo->e1 - 4.0 * mo->e2);
      cplx r1 = 0.5 * (mo->e1 + disc), r2 = 0.5 * (mo->e1 - disc);
      if (std::abs(r1 - ka) + std::abs(r2 - kb) > std::abs(r2 - ka) + std::abs(r1 - kb))
        std::swap(r1, r2);
      const AnalyticFunction f = f_at(p);
      auto settle = [&](cplx r) {
        Zero z = newton_polish(f, r, o_.roots.polish_tol, o_.roots.max_newton_iter, 1,
                               o_.roots.residual_tol);
        if (!z.newton_converged || std::abs(z.k - r) > 0.1 * std::abs(r1 - r2)) {
          const Sample sm = f(r);
          z = Zero{r, 1, std::abs(sm.value) / sm.magnitude, false};
          z.newton_converged = z.residual < o_.roots.residual_tol;
        }
        return z;
      };
      const Zero za = settle(r1), zb = settle(r2);
      record(live_[i].id, p, za);
      record(live_[j].id, p, zb);
      ka = za.k;
      kb = zb.k;
    }
  }

  int partner_of(int idx) const {
    if (idx < 0) return -1;
    const cplx a = live_[static_cast<std::size_t>(idx)].z.k;
    int best = -1;
    double bd = partner_radius();
    for (std::size_t m = 0; m < live_.size(); ++m) {
      if (static_cast<int>(m) == idx) continue;
      const cplx b = live_[m].z.k;
      if (pair_type(a, b) == 0) continue;
      const double d = std::abs(a - b);
      if (d < bd) {
        bd = d;
        best = static_cast<int>(m);
      }
    }
    return best;
  }

  bool try_pair(int i, int j) {
    if (i < 0 || j < 0 || i == j) return false;
    if (live_[i].z.multiplicity != 1 || live_[j].z.multiplicity != 1) return false;
    if (pair_type(live_[i].z.k, live_[j].z.k) == 0) return false;
    auto c = resolve(static_cast<std::size_t>(i), static_cast<std::size_t>(j), p_, std::nullopt,
                     0.0);
    if (!c) return false;
    apply(*c, static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    return true;
  }

  bool try_stall_coalescence(int bad, int bad2) {
    if (bad2 >= 0 && try_pair(bad, bad2)) return true;
    return try_pair(bad, partner_of(bad));
  }

  // Resolves a double pole predicted to occur within the next two steps.
  bool try_ahead_coalescence() {
    if (!ahead(p_to_, p_)) return false;
    for (std::size_t i = 0; i < live_.size(); ++i)
      for (std::size_t j = i + 1; j < live_.size(); ++j) {
        const cplx a = live_[i].z.k, b = live_[j].z.k;
        if (live_[i].z.multiplicity != 1 || live_[j].z.multiplicity != 1) continue;
        if (std::abs(a - b) > partner_radius() || pair_type(a, b) == 0) continue;
        const double s = ((a - b) * (a - b)).real();
        const cplx va = pole_velocity(fam_, a, p_), vb = pole_velocity(fam_, b, p_);
        const double ds = 2.0 * ((a - b) * (va - vb)).real();
        if (!(std::abs(ds) > 0.0) || !std::isfinite(ds)) continue;
        const double p_est = p_ - s / ds;
        if (!ahead(p_est, p_) || std::abs(p_est - p_) > 2.0 * dp_) continue;
        if (try_pair(static_cast<int>(i), static_cast<int>(j))) return true;
      }
    return false;
  }

  // Zero-energy crossings of axis poles are refined to the parameter where
  // D(0) changes sign and recorded as a threshold sample.
  bool handle_axis_events(const FlowState& before, const FlowState& after, double p0) {
    const std::vector<FlowEvent> evs = simple_events(before, after, o_.axis_tol);
    for (std::size_t e = 0; e < evs.size(); ++e) {
      FlowEvent ev = evs[e];
      if (ev.kind == EventKind::zero_energy) {
        const int id = ev.participants.front();
        double ref = 0.0;
        auto g = [&](double p) {
          const ScaledDenominator d = denominator_jet(fam_.at(p), cplx{0.0});
          return d.value.real() * std::exp(d.log_scale - ref);
        };
        ref = denominator_jet(fam_.at(p0), cplx{0.0}).log_scale;
        const double g0 = g(p0), g1 = g(after.param);
        double pz = after.param;
        if ((g0 > 0.0) != (g1 > 0.0)) pz = illinois(g, p0, g0, after.param, g1, o_.param_tol);
        const cplx kz{0.0, 0.0};
        if (ahead(pz, p0) && ahead(after.param, pz)) {
          const Sample s = f_at(pz)(kz);
          Zero z;
          z.k = kz;
          z.residual = std::abs(s.value) / s.magnitude;
          z.newton_converged = z.residual < o_.roots.residual_tol;
          record(id, pz, z);
        }
        ev.param = pz;
        ev.k = kz;
        res_.events.push_back(ev);
        if (e + 1 < evs.size() && evs[e + 1].kind == EventKind::axis_crossing &&
            evs[e + 1].participants == ev.participants) {
          FlowEvent ax = evs[e + 1];
          ax.param = pz;
          ax.k = kz;
          res_.events.push_back(ax);
          ++e;
        }
      } else {
        res_.events.push_back(ev);
      }
    }
    return !evs.empty();
  }

  const PotentialFamily& fam_;
  double p_from_, p_to_;
  Window w_;
  ContinuationOptions o_;
  RootOptions hi_;
  double range_ = 0.0, dir_ = 1.0, dp_ = 0.0, dp_max_ = 0.0, dp_min_ = 0.0, p_ = 0.0;
  int underflows_ = 0;
  std::vector<Live> live_;
  std::vector<Birth> births_;
  FlowResult res_;
};

}  // namespace

FlowResult sweep(const PotentialFamily& family, double p_from, double p_to, const Window& w,
                 const ContinuationOptions& opts) {
  opts.validate();
  w.validate();
  if (!std::isfinite(p_from) || !std::isfinite(p_to) || p_from == p_to)
    throw std::invalid_argument("sweep range must be finite and nondegenerate");
  family.at(p_from);
  family.at(p_to);
  return Sweeper(family, p_from, p_to, w, opts).run();
}

std::vector<double> coalescence_depths(const PotentialFamily& family, const Window& w,
                                       double p_from, double p_to,
                                       const ContinuationOptions& opts) {
  const FlowResult r = sweep(family, p_from, p_to, w, opts);
  std::vector<double> out;
  for (const FlowEvent& e : r.events)
    if (e.kind == EventKind::coalescence) out.push_back(e.param);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace poleflow

#include "poleflow/rootfind.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <future>
#include <numbers>
#include <string>

namespace poleflow {

void Window::validate() const {
  if (!(std::isfinite(re_min) && std::isfinite(re_max) && std::isfinite(im_min) &&
        std::isfinite(im_max)))
    throw std::invalid_argument("window bounds must be finite");
  if (!(re_min < re_max)) throw std::invalid_argument("window needs re_min < re_max");
  if (!(im_min < im_max)) throw std::invalid_argument("window needs im_min < im_max");
}

Window Window::dilated(double factor) const noexcept {
  const cplx c = center();
  const double hx = 0.5 * factor * (re_max - re_min);
  const double hy = 0.5 * factor * (im_max - im_min);
  return {c.real() - hx, c.real() + hx, c.imag() - hy, c.imag() + hy};
}

void RootOptions::validate() const {
  auto pos = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument(std::string(name) + " must be positive");
  };
  pos(polish_tol, "polish_tol");
  pos(residual_tol, "residual_tol");
  pos(cluster_diameter, "cluster_diameter");
  pos(quad_tol, "quad_tol");
  pos(winding_tol, "winding_tol");
  pos(reject_tol, "reject_tol");
  pos(boundary_tol, "boundary_tol");
  if (!(dilation > 1.0)) throw std::invalid_argument("dilation must exceed 1");
  if (max_newton_iter < 1) throw std::invalid_argument("max_newton_iter must be >= 1");
  if (max_dilations < 0) throw std::invalid_argument("max_dilations must be >= 0");
  if (max_edge_evals < 64) throw std::invalid_argument("max_edge_evals must be >= 64");
  if (!(winding_tol < reject_tol && reject_tol < 0.5))
    throw std::invalid_argument("need winding_tol < reject_tol < 0.5");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
}

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// QUADPACK qk15 nodes and weights.
constexpr std::array<double, 8> xgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> wgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Contour {
  std::array<cplx, 5> v;  // corners, closed
  cplx point(int edge, double t) const { return v[edge] + (v[edge + 1] - v[edge]) * t; }
  cplx dir(int edge) const { return v[edge + 1] - v[edge]; }
};

struct Interval {
  int edge;
  double t0, t1;
  cplx lf0, lf1;  // log f at the endpoints
  std::array<cplx, 3> I;
  double err;
};

bool operator<(const Interval& a, const Interval& b) { return a.err < b.err; }

class Integrator {
 public:
  Integrator(const AnalyticFunction& f, const Window& w, const RootOptions& o)
      : f_(f), opts_(o) {
    c_.v = {cplx{w.re_min, w.im_min}, cplx{w.re_max, w.im_min}, cplx{w.re_max, w.im_max},
            cplx{w.re_min, w.im_max}, cplx{w.re_min, w.im_min}};
  }

  cplx logf(cplx z) {
    const Sample s = eval(z);
    return std::log(s.value) + s.log_scale;
  }

  Sample eval(cplx z) {
    ++evals_;
    const Sample s = f_(z);
    if (!std::isfinite(s.value.real()) || !std::isfinite(s.value.imag()) ||
        !std::isfinite(s.derivative.real()) || !std::isfinite(s.derivative.imag()) ||
        !(s.magnitude > 0.0))
      throw BoundaryZeroError("non-finite sample on the contour");
    // |f| / magnitude alone is a poor test: D cancels by orders of magnitude
    // in the lower half plane. Use the Newton distance to the nearest zero.
    const double a = std::abs(s.value);
    if (a <= 64.0 * std::numeric_limits<double>::epsilon() * s.magnitude ||
        a <= opts_.boundary_tol * (1.0 + std::abs(z)) * std::abs(s.derivative))
      throw BoundaryZeroError("zero on or near the contour");
    return s;
  }

  Interval make(int edge, double t0, double t1, cplx lf0, cplx lf1) {
    Interval iv{edge, t0, t1, lf0, lf1, {}, 0.0};
    const double half = 0.5 * (t1 - t0);
    const double mid = 0.5 * (t0 + t1);
    const cplx dz = c_.dir(edge) * half;
    std::array<cplx, 3> kr{}, gs{};
    for (int j = 0; j < 8; ++j) {
      const int reps = j == 7 ? 1 : 2;
      for (int sgn = 0; sgn < reps; ++sgn) {
        const double t = mid + (sgn == 0 ? xgk[j] : -xgk[j]) * half;
        const cplx z = c_.point(edge, t);
        const Sample s = eval(z);
        const cplx g = s.derivative / s.value * dz;
        const std::array<cplx, 3> gv{g, g * z, g * z * z};
        for (int m = 0; m < 3; ++m) {
          kr[m] += wgk[j] * gv[m];
          if (j % 2 == 1) gs[m] += wg[j / 2] * gv[m];
        }
      }
    }
    iv.I = kr;
    const cplx d = kr[0] - (lf1 - lf0);
    const double branch = d.imag() - two_pi * std::round(d.imag() / two_pi);
    iv.err = std::abs(kr[0] - gs[0]) + std::abs(d.real()) + std::abs(branch);
    return iv;
  }

  WindingResult run(const Window& w) {
    std::vector<Interval> heap;
    for (int e = 0; e < 4; ++e) {
      const double len = std::abs(c_.dir(e));
      const int n0 = std::clamp(static_cast<int>(std::ceil(len / 0.25)), 4, 64);
      std::vector<cplx> lf(n0 + 1);
      for (int i = 0; i <= n0; ++i) lf[i] = logf(c_.point(e, double(i) / n0));
      for (int i = 0; i < n0; ++i)
        heap.push_back(make(e, double(i) / n0, double(i + 1) / n0, lf[i], lf[i + 1]));
    }
    std::make_heap(heap.begin(), heap.end());

    const int cap = 4 * opts_.max_edge_evals;
    double target = opts_.quad_tol;
    auto total = [&] {
      std::array<cplx, 3> s{};
      double err = 0.0;
      for (const Interval& iv : heap) {
        for (int m = 0; m < 3; ++m) s[m] += iv.I[m];
        err += iv.err;
      }
      return std::pair{s, err};
    };
    auto [sum, err] = total();
    bool accepted = false;
    while (true) {
      if (err < target) {
        const cplx raw = sum[0] / cplx(0.0, two_pi);
        const double dev = std::max(std::abs(raw.real() - std::round(raw.real())),
                                    std::abs(raw.imag()));
        if (dev < opts_.winding_tol && err / two_pi < opts_.winding_tol) {
          accepted = true;
          break;
        }
        target = std::min(target, err) / 10.0;
      }
      if (evals_ + 31 > cap) break;
      std::pop_heap(heap.begin(), heap.end());
      const Interval iv = heap.back();
      heap.pop_back();
      const double tm = 0.5 * (iv.t0 + iv.t1);
      const cplx lfm = logf(c_.point(iv.edge, tm));
      Interval a = make(iv.edge, iv.t0, tm, iv.lf0, lfm);
      Interval b = make(iv.edge, tm, iv.t1, lfm, iv.lf1);
      for (int m = 0; m < 3; ++m) sum[m] += a.I[m] + b.I[m] - iv.I[m];
      err += a.err + b.err - iv.err;
      heap.push_back(a);
      std::push_heap(heap.begin(), heap.end());
      heap.push_back(b);
      std::push_heap(heap.begin(), heap.end());
      if (heap.size() % 256 == 0) std::tie(sum, err) = total();
    }
    std::tie(sum, err) = total();
    WindingResult r;
    r.raw = sum[0] / cplx(0.0, two_pi);
    r.moment1 = sum[1] / cplx(0.0, two_pi);
    r.moment2 = sum[2] / cplx(0.0, two_pi);
    r.window = w;
    r.evaluations = evals_;
    const double n = std::round(r.raw.real());
    const double dev = std::max(std::abs(r.raw.real() - n), std::abs(r.raw.imag()));
    if ((!accepted && dev > opts_.reject_tol) || n < 0.0)
      throw RootFindError("winding number not an integer: " + std::to_string(r.raw.real()) +
                          (r.raw.imag() < 0 ? " - " : " + ") +
                          std::to_string(std::abs(r.raw.imag())) + "i");
    r.count = static_cast<int>(n);
    return r;
  }

 private:
  const AnalyticFunction& f_;
  const RootOptions& opts_;
  Contour c_;
  int evals_ = 0;
};

constexpr std::array<double, 4> split_fracs = {0.5 + 0.0318, 0.5 - 0.0413, 0.5 + 0.0771,
                                               0.5 - 0.0912};

class Finder {
 public:
  Finder(const AnalyticFunction& f, const RootOptions& o) : f_(f), opts_(o) {}

  void process(const WindingResult& wr, int depth, std::vector<Zero>& out) const {
    const int n = wr.count;
    if (n == 0) return;
    const Window& b = wr.window;
    const double diam = b.diameter();
    const double slack = 1e-12 * (1.0 + std::abs(b.center()));
    const Window bs{b.re_min - slack, b.re_max + slack, b.im_min - slack, b.im_max + slack};

    if (n == 1) {
      Zero z = polish(wr.moment1, 1);
      if (z.newton_converged && bs.contains(z.k)) {
        out.push_back(z);
        return;
      }
      if (diam < opts_.cluster_diameter || depth > 60) {
        out.push_back(settle(wr.moment1, 1));
        return;
      }
    } else if (diam < opts_.cluster_diameter || depth > 60) {
      const cplx c = wr.moment1 / double(n);
      Zero z = polish(c, n);
      if (!(z.newton_converged && bs.contains(z.k))) z = settle(c, n);
      z.multiplicity = n;
      out.push_back(z);
      return;
    } else if (n == 2) {
      // The two zeros solve z^2 - e1 z + e2 = 0 with e1, e2 from the moments.
      const cplx e1 = wr.moment1;
      const cplx e2 = 0.5 * (e1 * e1 - wr.moment2);
      const cplx disc = std::sqrt(e1 * e1 - 4.0 * e2);
      const Zero z1 = polish(0.5 * (e1 + disc), 1);
      const Zero z2 = polish(0.5 * (e1 - disc), 1);
      const double sep = std::abs(z1.k - z2.k);
      if (z1.newton_converged && z2.newton_converged && bs.contains(z1.k) && bs.contains(z2.k) &&
          sep > std::max(opts_.cluster_diameter, 1e-6 * (1.0 + std::abs(z1.k))) &&
          !flat(0.5 * (z1.k + z2.k))) {
        out.push_back(z1);
        out.push_back(z2);
        return;
      }
    }
    subdivide(wr, depth, out);
  }

 private:
  // f at round-off: points of one unresolved multiple zero, not two zeros.
  bool flat(cplx z) const {
    const Sample s = f_(z);
    return std::abs(s.value) <= 64.0 * std::numeric_limits<double>::epsilon() * s.magnitude;
  }

  static Window bs_of(const Window& b) {
    const double slack = 1e-12 * (1.0 + std::abs(b.center()));
    return {b.re_min - slack, b.re_max + slack, b.im_min - slack, b.im_max + slack};
  }

  Zero polish(cplx k0, int m) const {
    return newton_polish(f_, k0, opts_.polish_tol, opts_.max_newton_iter, m, opts_.residual_tol);
  }

  Zero settle(cplx k, int m) const {
    const Sample s = f_(k);
    Zero z;
    z.k = k;
    z.multiplicity = m;
    z.residual = std::abs(s.value) / s.magnitude;
    z.newton_converged = z.residual < opts_.residual_tol;
    return z;
  }

  void subdivide(const WindingResult& wr, int depth, std::vector<Zero>& out) const {
    const Window& b = wr.window;
    std::string last_error = "counts of sub-boxes do not add up";
    bool all_flat = true;  // every attempt hit f at round-off on a split line
    for (std::size_t attempt = 0; attempt < split_fracs.size(); ++attempt) {
      const double fx = split_fracs[attempt];
      const double fy = split_fracs[(attempt + 2) % split_fracs.size()];
      const double xm = b.re_min + fx * (b.re_max - b.re_min);
      const double ym = b.im_min + fy * (b.im_max - b.im_min);
      const std::array<Window, 4> kids = {Window{b.re_min, xm, b.im_min, ym},
                                          Window{xm, b.re_max, b.im_min, ym},
                                          Window{b.re_min, xm, ym, b.im_max},
                                          Window{xm, b.re_max, ym, b.im_max}};
      std::array<WindingResult, 4> res;
      try {
        if (opts_.threads > 1 && depth < 3) {
          std::array<std::future<WindingResult>, 4> fut;
          for (int i = 0; i < 4; ++i)
            fut[i] = std::async(std::launch::async,
                                [this, &kids, i] { return winding(f_, kids[i], opts_); });
          for (int i = 0; i < 4; ++i) res[i] = fut[i].get();
        } else {
          for (int i = 0; i < 4; ++i) res[i] = winding(f_, kids[i], opts_);
        }
      } catch (const BoundaryZeroError& e) {
        last_error = e.what();
        continue;
      } catch (const RootFindError& e) {
        last_error = e.what();
        all_flat = false;
        continue;
      }
      int sum = 0;
      for (const auto& r : res) sum += r.count;
      if (sum != wr.count) {
        all_flat = false;
        continue;
      }
      for (const auto& r : res) process(r, depth + 1, out);
      return;
    }
    // A multiple zero makes f flat to round-off over a radius ~ (eps |f|)^(1/m),
    // which can exceed cluster_diameter; every split line then lands on it.
    // Such a small box is one numerically unresolvable cluster.
    const int n = wr.count;
    if (all_flat && n >= 2 && b.diameter() < 0.05 * (1.0 + std::abs(b.center()))) {
      const cplx c = wr.moment1 / double(n);
      Zero z = polish(c, n);
      if (!(z.newton_converged && bs_of(b).contains(z.k))) z = settle(c, n);
      z.multiplicity = n;
      if (z.newton_converged) {
        out.push_back(z);
        return;
      }
    }
    throw RootFindError("subdivision failed: " + last_error);
  }

  const AnalyticFunction& f_;
  const RootOptions& opts_;
};

}  // namespace

WindingResult winding(const AnalyticFunction& f, const Window& w, const RootOptions& opts) {
  w.validate();
  Integrator in(f, w, opts);
  return in.run(w);
}

WindingResult count_zeros_detail(const AnalyticFunction& f, const Window& w,
                                 const RootOptions& opts) {
  opts.validate();
  w.validate();
  Window cur = w;
  for (int attempt = 0;; ++attempt) {
    try {
      return winding(f, cur, opts);
    } catch (const BoundaryZeroError&) {
      if (attempt >= opts.max_dilations) throw;
      cur = cur.dilated(opts.dilation);
    }
  }
}

int count_zeros(const AnalyticFunction& f, const Window& w, const RootOptions& opts) {
  return count_zeros_detail(f, w, opts).count;
}

ZeroCensus find_zeros(const AnalyticFunction& f, const Window& w, const RootOptions& opts) {
  const WindingResult top = count_zeros_detail(f, w, opts);
  ZeroCensus c;
  c.window = top.window;
  Finder(f, opts).process(top, 0, c.zeros);
  std::sort(c.zeros.begin(), c.zeros.end(), [](const Zero& a, const Zero& b) {
    if (a.k.imag() != b.k.imag()) return a.k.imag() > b.k.imag();
    return a.k.real() < b.k.real();
  });
  for (const Zero& z : c.zeros) c.total_multiplicity += z.multiplicity;
  return c;
}

Zero newton_polish(const AnalyticFunction& f, cplx k0, double tol, int max_iter,
                   int multiplicity, double residual_tol) {
  Zero z;
  z.k = k0;
  z.multiplicity = std::max(1, multiplicity);
  const bool fixed = multiplicity > 1;
  Sample s = f(k0);
  auto finite = [](const Sample& x) {
    return std::isfinite(x.value.real()) && std::isfinite(x.value.imag()) &&
           std::isfinite(x.derivative.real()) && std::isfinite(x.derivative.imag());
  };
  auto finish = [&](bool stepped_small) {
    z.residual = std::abs(s.value) / s.magnitude;
    z.newton_converged = stepped_small && z.residual < residual_tol;
    return z;
  };
  bool have_prev = false;
  cplx k_prev, d_prev;
  double ls_prev = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    if (!finite(s)) return finish(false);
    if (s.value == cplx{0.0}) return finish(true);
    if (s.derivative == cplx{0.0}) return finish(false);
    const cplx ratio = s.value / s.derivative;
    int m = z.multiplicity;
    if (!fixed) {
      m = 1;
      if (have_prev && z.k != k_prev) {
        const cplx f2 = (s.derivative - d_prev * std::exp(ls_prev - s.log_scale)) / (z.k - k_prev);
        const cplx mest = 1.0 / (1.0 - ratio * f2 / s.derivative);
        const double r = std::round(mest.real());
        if (r >= 2.0 && r <= 8.0 && std::abs(mest - r) < 0.25) m = static_cast<int>(r);
      }
    }
    const cplx step = double(m) * ratio;
    // Steps below the round-off floor of f cannot shrink any further.
    const double noise = 16.0 * std::numeric_limits<double>::epsilon() * m * s.magnitude /
                         std::abs(s.derivative);
    k_prev = z.k;
    d_prev = s.derivative;
    ls_prev = s.log_scale;
    have_prev = true;
    z.k -= step;
    s = f(z.k);
    if (std::abs(step) < std::max(tol * (1.0 + std::abs(z.k)), noise)) return finish(finite(s));
  }
  if (!finite(s)) return finish(false);
  return finish(false);
}

AnalyticFunction polynomial_from_roots(std::vector<cplx> roots, cplx lead) {
  return [roots = std::move(roots), lead](cplx z) {
    cplx p = lead, dp{0.0};
    double mag = std::abs(lead);
    for (const cplx& r : roots) {
      dp = dp * (z - r) + p;
      p *= (z - r);
      mag *= std::abs(z) + std::abs(r);
    }
    return Sample{p, dp, mag, 0.0};
  };
}

}  // namespace poleflow

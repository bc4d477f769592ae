#include "poleflow/smatrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace poleflow {

namespace {

constexpr cplx I{0.0, 1.0};

// cos(KL), sin(KL)/K and their z-derivatives, z = K^2, all times exp(-log_scale).
struct PieceFns {
  cplx c, s, cz, sz;
  double log_scale = 0.0;
};

PieceFns piece_fns(cplx z, double L) {
  PieceFns f;
  const cplx w = z * (L * L);
  if (std::abs(w) < 1.0) {
    // Taylor series in w; 13 terms put the truncation below 1e-20.
    cplx c{0.0}, s{0.0}, cz{0.0}, sz{0.0};
    cplx pw{1.0};          // (-w)^n
    cplx pw_prev{0.0};     // (-w)^(n-1)
    double fe = 1.0;       // (2n)!
    double fo = 1.0;       // (2n+1)!
    for (int n = 0; n < 13; ++n) {
      if (n > 0) {
        fe *= (2.0 * n - 1.0) * (2.0 * n);
        fo *= (2.0 * n) * (2.0 * n + 1.0);
      }
      c += pw / fe;
      s += pw / fo;
      if (n > 0) {
        cz += double(n) * pw_prev / fe;
        sz += double(n) * pw_prev / fo;
      }
      pw_prev = pw;
      pw *= -w;
    }
    f.c = c;
    f.s = L * s;
    f.cz = -(L * L) * cz;
    f.sz = -(L * L * L) * sz;
    return f;
  }
  const cplx K = std::sqrt(z);
  const cplx th = K * L;
  const double y = std::abs(th.imag());
  if (y <= 20.0) {
    f.c = std::cos(th);
    f.s = std::sin(th) / K;
  } else {
    const cplx ep = std::exp(I * th - y);
    const cplx em = std::exp(-I * th - y);
    f.c = 0.5 * (ep + em);
    f.s = (ep - em) / (2.0 * I) / K;
    f.log_scale = y;
  }
  f.cz = -0.5 * L * f.s;
  f.sz = (L * f.c - f.s) / (2.0 * z);
  return f;
}

}  // namespace

double TransferMatrix::max_abs() const noexcept {
  return std::max({std::abs(m11), std::abs(m12), std::abs(m21), std::abs(m22)});
}

TransferMatrix piece_transfer(double value, double length, cplx k) {
  const cplx z = k * k - 2.0 * value;
  const PieceFns f = piece_fns(z, length);
  const double g = std::exp(f.log_scale);
  return TransferMatrix{f.c, f.s, -z * f.s, f.c}.scaled(g);
}

TransferMatrix total_transfer(const Potential& p, cplx k) {
  TransferMatrix m;
  for (std::size_t i = 0; i < p.piece_count(); ++i)
    m = piece_transfer(p.values()[i], p.piece_width(i), k) * m;
  return m;
}

TransferJet total_transfer_jet(const Potential& p, cplx k) {
  TransferJet j;
  j.dm = TransferMatrix{0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < p.piece_count(); ++i) {
    const cplx z = k * k - 2.0 * p.values()[i];
    const PieceFns f = piece_fns(z, p.piece_width(i));
    const TransferMatrix P{f.c, f.s, -z * f.s, f.c};
    const TransferMatrix dP =
        TransferMatrix{f.cz, f.sz, -(f.s + z * f.sz), f.cz}.scaled(2.0 * k);
    j.dm = dP * j.m + P * j.dm;
    j.m = P * j.m;
    j.log_scale += f.log_scale;
    const double s = j.m.max_abs();
    if (s > 1e30 || (s < 1e-30 && s > 0.0)) {
      j.m = j.m.scaled(1.0 / s);
      j.dm = j.dm.scaled(1.0 / s);
      j.log_scale += std::log(s);
    }
  }
  return j;
}

namespace {

// K - kc and K + kc from K^2 - kc^2 = diff, which is exact in the piece
// values; the smaller one is never formed by subtraction.
std::pair<cplx, cplx> split(cplx K, cplx kc, cplx diff) {
  if (std::abs(K + kc) >= std::abs(K - kc)) {
    const cplx sum = K + kc;
    return {diff / sum, sum};
  }
  const cplx dif = K - kc;
  return {dif, diff / dif};
}

// D = ik psi(x_N) - psi'(x_N) for the solution equal to exp(-ik(x - x_0))
// left of the support. Assembling D from the entries of the total transfer
// matrix cancels by exp(-2 |Im k| L) in the lower half plane, which is below
// round-off for long pieces. Propagating this one solution instead keeps
// each piece with |K| L > 1 in its own plane-wave basis, where crossing the
// piece is diagonal; thin pieces stay in the (psi, psi') form, which is
// entire in K^2 and harmless at the branch points.
struct Propagator {
  cplx k;
  bool plane = true;  // current basis: plane waves of wavenumber kc, else (psi, psi')
  cplx kc, dkc;       // kc and d kc / dk
  double vc = 0.0;    // potential value belonging to kc
  cplx v[2]{0.0, 1.0}, dv[2]{0.0, 0.0};
  double u[2]{0.0, 1.0};  // |.|-propagated bound, sets the round-off scale
  double log_scale = 0.0;

  explicit Propagator(cplx k_) : k(k_), kc(k_), dkc(1.0) {}

  // v <- G v, dv <- dG v + G dv, u <- |G| u.
  void apply(const cplx g[2][2], const cplx dg[2][2]) {
    cplx nv[2], ndv[2];
    double nu[2];
    for (int r = 0; r < 2; ++r) {
      nv[r] = g[r][0] * v[0] + g[r][1] * v[1];
      ndv[r] = dg[r][0] * v[0] + dg[r][1] * v[1] + g[r][0] * dv[0] + g[r][1] * dv[1];
      nu[r] = std::abs(g[r][0]) * u[0] + std::abs(g[r][1]) * u[1];
    }
    for (int r = 0; r < 2; ++r) {
      v[r] = nv[r];
      dv[r] = ndv[r];
      u[r] = nu[r];
    }
  }

  void to_psi() {
    if (!plane) return;
    const cplx g[2][2] = {{1.0, 1.0}, {I * kc, -I * kc}};
    const cplx dg[2][2] = {{0.0, 0.0}, {I * dkc, -I * dkc}};
    apply(g, dg);
    plane = false;
  }

  void to_plane(cplx K, cplx dK, double value) {
    if (plane) {
      // 1 -+ kc/K = (K -+ kc)/K; dr/dk = (dkc K^2 - kc k)/K^3 with the bracket
      // reduced to k diff/kc (inner kc) or diff (outer kc = k).
      const cplx diff = 2.0 * (vc - value);
      const auto [minus, plus] = split(K, kc, diff);
      const cplx num = kc == k ? diff : k * diff / kc;
      const cplx dr = num / (K * K * K);
      const cplx g[2][2] = {{0.5 * plus / K, 0.5 * minus / K}, {0.5 * minus / K, 0.5 * plus / K}};
      const cplx dg[2][2] = {{0.5 * dr, -0.5 * dr}, {-0.5 * dr, 0.5 * dr}};
      apply(g, dg);
    } else {
      const cplx q = 1.0 / (2.0 * I * K);
      const cplx dq = -q * dK / K;
      const cplx g[2][2] = {{0.5, q}, {0.5, -q}};
      const cplx dg[2][2] = {{0.0, dq}, {0.0, -dq}};
      apply(g, dg);
    }
    plane = true;
    kc = K;
    dkc = dK;
    vc = value;
  }

  void piece(double value, double L) {
    const cplx z = k * k - 2.0 * value;
    if (std::sqrt(std::abs(z)) * L <= 1.0) {
      to_psi();
      const PieceFns f = piece_fns(z, L);
      const cplx g[2][2] = {{f.c, f.s}, {-z * f.s, f.c}};
      const cplx dk2 = 2.0 * k;
      const cplx dg[2][2] = {{dk2 * f.cz, dk2 * f.sz},
                             {-dk2 * (f.s + z * f.sz), dk2 * f.cz}};
      apply(g, dg);
      log_scale += f.log_scale;
    } else {
      cplx K = std::sqrt(z);
      if (K.imag() < 0.0) K = -K;
      const cplx dK = k / K;
      to_plane(K, dK, value);
      const double y = K.imag() * L;  // >= 0
      const cplx ep = std::exp(I * K * L - y);
      const cplx em = std::exp(-I * K * L - y);
      const cplx g[2][2] = {{ep, 0.0}, {0.0, em}};
      const cplx dg[2][2] = {{I * L * dK * ep, 0.0}, {0.0, -I * L * dK * em}};
      apply(g, dg);
      log_scale += y;
    }
    const double s = std::max({std::abs(v[0]), std::abs(v[1]), std::abs(dv[0]), std::abs(dv[1]),
                               u[0], u[1]});
    if (s > 1e30 || (s < 1e-30 && s > 0.0)) {
      for (int r = 0; r < 2; ++r) {
        v[r] /= s;
        dv[r] /= s;
        u[r] /= s;
      }
      log_scale += std::log(s);
    }
  }

  ScaledDenominator finish() const {
    ScaledDenominator out;
    const double ak = std::abs(k);
    if (plane) {
      // psi = A + B, psi' = i kc (A - B); k^2 - kc^2 = 2 vc.
      const auto [minus, plus] = split(k, kc, cplx{2.0 * vc});
      out.value = I * minus * v[0] + I * plus * v[1];
      // 1 -+ dkc = (kc -+ k)/kc for an inner kc = sqrt(k^2 - 2 vc).
      const cplx one_minus = kc == k ? cplx{0.0} : -minus / kc;
      const cplx one_plus = kc == k ? cplx{2.0} : plus / kc;
      out.derivative = I * one_minus * v[0] + I * minus * dv[0] + I * one_plus * v[1] +
                       I * plus * dv[1];
      out.magnitude = (ak + std::abs(kc)) * (u[0] + u[1]);
    } else {
      out.value = I * k * v[0] - v[1];
      out.derivative = I * v[0] + I * k * dv[0] - dv[1];
      out.magnitude = ak * u[0] + u[1];
    }
    out.log_scale = log_scale;
    return out;
  }
};

}  // namespace

ScaledDenominator denominator_jet(const Potential& p, cplx k) {
  Propagator pr(k);
  for (std::size_t i = 0; i < p.piece_count(); ++i) pr.piece(p.values()[i], p.piece_width(i));
  ScaledDenominator out = pr.finish();
  // The bound is zero only for an exactly free start at k = 0.
  if (!(out.magnitude > 0.0)) out.magnitude = std::max(std::abs(out.value), 1.0);
  return out;
}

cplx denominator(const Potential& p, cplx k) {
  const ScaledDenominator d = denominator_jet(p, k);
  return d.value * std::exp(d.log_scale);
}

cplx denominator_dk(const Potential& p, cplx k) {
  const ScaledDenominator d = denominator_jet(p, k);
  return d.derivative * std::exp(d.log_scale);
}

namespace {

cplx dparam_on_scale(const PotentialFamily& family, cplx k, double p, double ref_scale) {
  const double h = 1e-3 * std::max(std::abs(p), 1e-3);
  auto D = [&](double q) {
    const ScaledDenominator d = denominator_jet(family.at(q), k);
    return d.value * std::exp(d.log_scale - ref_scale);
  };
  const cplx d1 = (D(p + h) - D(p - h)) / (2.0 * h);
  const cplx d2 = (D(p + 0.5 * h) - D(p - 0.5 * h)) / h;
  return (4.0 * d2 - d1) / 3.0;
}

}  // namespace

cplx denominator_dparam_scaled(const PotentialFamily& family, cplx k, double p) {
  const double ref = denominator_jet(family.at(p), k).log_scale;
  return dparam_on_scale(family, k, p, ref);
}

cplx denominator_dparam(const PotentialFamily& family, cplx k, double p) {
  const double ref = denominator_jet(family.at(p), k).log_scale;
  return dparam_on_scale(family, k, p, ref) * std::exp(ref);
}

cplx pole_velocity(const PotentialFamily& family, cplx k, double p) {
  const ScaledDenominator d = denominator_jet(family.at(p), k);
  return -dparam_on_scale(family, k, p, d.log_scale) / d.derivative;
}

SMatrixEval s_matrix_endpoint(const Potential& p, cplx k) {
  if (k == cplx{0.0}) throw ThresholdError("k = 0 is a threshold point");
  const TransferJet j = total_transfer_jet(p, k);
  const TransferMatrix& m = j.m;
  const cplx D = I * k * (m.m11 + m.m22) + k * k * m.m12 - m.m21;
  const double ak = std::abs(k);
  const double mag = (1.0 + ak) * (std::abs(m.m11) + std::abs(m.m22)) +
                     ak * ak * std::abs(m.m12) + std::abs(m.m21);
  if (std::abs(D) <= 64.0 * std::numeric_limits<double>::epsilon() * mag)
    throw PoleError("k is a pole of the S-matrix to working precision");
  SMatrixEval e;
  e.t = 2.0 * I * k * std::exp(-j.log_scale) / D;
  e.r_plus = (I * k * (m.m22 - m.m11) + k * k * m.m12 + m.m21) / D;
  e.r_minus = (I * k * (m.m11 - m.m22) + k * k * m.m12 + m.m21) / D;
  e.denom = D * std::exp(j.log_scale);
  return e;
}

SMatrixEval s_matrix(const Potential& p, cplx k) {
  SMatrixEval e = s_matrix_endpoint(p, k);
  const double x0 = p.left(), xn = p.right();
  e.t *= std::exp(-I * k * (xn - x0));
  e.r_plus *= std::exp(2.0 * I * k * x0);
  e.r_minus *= std::exp(-2.0 * I * k * xn);
  return e;
}

std::vector<cplx> branch_points(const Potential& p) {
  std::vector<double> seen;
  std::vector<cplx> out;
  for (double v : p.values()) {
    if (v == 0.0 || std::find(seen.begin(), seen.end(), v) != seen.end()) continue;
    seen.push_back(v);
    if (v > 0.0) {
      const double r = std::sqrt(2.0 * v);
      out.emplace_back(r, 0.0);
      out.emplace_back(-r, 0.0);
    } else {
      const double r = std::sqrt(-2.0 * v);
      out.emplace_back(0.0, r);
      out.emplace_back(0.0, -r);
    }
  }
  return out;
}

}  // namespace poleflow

#pragma once

// Independent reference computations for the tests. None of these share
// code with the library: the closed forms are written out from the wave
// matching on each interval, and the dense solver sets up the matching
// conditions as one linear system.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cplx = std::complex<double>;
inline constexpr cplx I{0.0, 1.0};

// Square well of depth U on [-a, a]:
// k K cos(2aK) - i (k^2 + U) sin(2aK) with K = branch * sqrt(k^2 + 2U).
struct Residual {
  double value;
  double scale;
};

inline Residual square_well_condition(cplx k, double U, double a, int branch) {
  const cplx K = double(branch) * std::sqrt(k * k + 2.0 * U);
  const cplx t1 = k * K * std::cos(2.0 * a * K);
  const cplx t2 = I * (k * k + U) * std::sin(2.0 * a * K);
  return {std::abs(t1 - t2), std::abs(t1) + std::abs(t2)};
}

// Well -U on [a, 0] (a < 0) next to H on [0, b], kappa = sqrt(k^2 - 2H),
// K = sqrt(k^2 + 2U). `lowercase` selects k (kappa^2 + K^2) sin(aK) in the
// first bracket instead of K (kappa^2 + K^2) sin(aK).
inline cplx two_piece_T(cplx k, double U, double H, double a, double b, bool lowercase) {
  const cplx kap = std::sqrt(k * k - 2.0 * H);
  const cplx K = std::sqrt(k * k + 2.0 * U);
  const cplx sa = std::sin(a * K), ca = std::cos(a * K);
  const cplx sb = std::sin(b * kap), cb = std::cos(b * kap);
  const cplx lead = lowercase ? k : K;
  return sb * (-I * (kap * kap + k * k) * K * ca + lead * (kap * kap + K * K) * sa) +
         kap * cb * (2.0 * k * K * ca + I * (k * k + K * K) * sa);
}

// Dense matching for a piecewise-constant potential. Regions 0 and N+1 are
// the exterior (plane waves referenced at x = 0); interior pieces use
// exp(+-iK(x - c)) about their midpoint c. in_left / in_right are the
// incoming amplitudes of exp(ikx) on the left and exp(-ikx) on the right.
struct Matching {
  Eigen::MatrixXcd A;
  Eigen::VectorXcd rhs;
};

inline Matching matching_system(const std::vector<double>& bp, const std::vector<double>& vals,
                                cplx k, cplx in_left, cplx in_right) {
  const int n = static_cast<int>(vals.size());
  const int m = 2 * n + 2;
  Matching s{Eigen::MatrixXcd::Zero(m, m), Eigen::VectorXcd::Zero(m)};
  auto wave = [&](int region) {
    if (region == 0 || region == n + 1) return std::pair<cplx, double>{k, 0.0};
    const int j = region - 1;
    return std::pair<cplx, double>{std::sqrt(k * k - 2.0 * vals[j]), 0.5 * (bp[j] + bp[j + 1])};
  };
  // Column of the +/- wave of a region, -1 for an incoming (known) wave.
  auto column = [&](int region, int sign) {
    if (region == 0) return sign < 0 ? 0 : -1;
    if (region == n + 1) return sign > 0 ? m - 1 : -1;
    return 2 * region - 1 + (sign > 0 ? 0 : 1);
  };
  for (int i = 0; i <= n; ++i) {
    const double x = bp[i];
    for (int side = 0; side < 2; ++side) {
      const int region = i + side;  // left of x_i is region i, right is i + 1
      const double sgn = side == 0 ? 1.0 : -1.0;
      const auto [q, c] = wave(region);
      for (int pm : {1, -1}) {
        const cplx e = std::exp(double(pm) * I * q * (x - c));
        const cplx val = sgn * e, der = sgn * double(pm) * I * q * e;
        const int col = column(region, pm);
        if (col >= 0) {
          s.A(2 * i, col) += val;
          s.A(2 * i + 1, col) += der;
        } else {
          const cplx amp = region == 0 ? in_left : in_right;
          s.rhs(2 * i) -= val * amp;
          s.rhs(2 * i + 1) -= der * amp;
        }
      }
    }
  }
  return s;
}

// Zero exactly at the S-matrix poles (no incoming waves admitted). K -> -K
// swaps a piece's two columns, so det / prod K_j is even in every K_j and
// hence entire in k; the raw determinant flips sign across the cut of sqrt.
inline cplx matching_det(const std::vector<double>& bp, const std::vector<double>& vals, cplx k) {
  cplx d = matching_system(bp, vals, k, 0.0, 0.0).A.fullPivLu().determinant();
  for (double v : vals) d /= std::sqrt(k * k - 2.0 * v);
  return d;
}

struct Amplitudes {
  cplx t, r_plus, r_minus;
};

inline Amplitudes matching_scatter(const std::vector<double>& bp, const std::vector<double>& vals,
                                   cplx k) {
  const Matching l = matching_system(bp, vals, k, 1.0, 0.0);
  const Eigen::VectorXcd xl = l.A.fullPivLu().solve(l.rhs);
  const Matching r = matching_system(bp, vals, k, 0.0, 1.0);
  const Eigen::VectorXcd xr = r.A.fullPivLu().solve(r.rhs);
  const auto last = xl.size() - 1;
  return {xl(last), xl(0), xr(last)};
}

// Bound states of the square well (depth U > 0, half width a): kappa > 0
// with K tan(Ka) = kappa (even) or -K cot(Ka) = kappa (odd),
// K = sqrt(2U - kappa^2). Returned descending.
inline std::vector<double> square_well_bound_kappas(double U, double a) {
  std::vector<double> out;
  if (U <= 0.0) return out;
  const double R = a * std::sqrt(2.0 * U);
  auto bisect = [&](auto g, double lo, double hi) {
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (g(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  const double pi = std::numbers::pi;
  for (int n = 0; n * pi / 2.0 < R; ++n) {
    const double lo = n * pi / 2.0;
    const double hi = std::min((n + 1) * pi / 2.0, R);
    auto g = [&](double xi) {
      const double eta = std::sqrt(std::max(R * R - xi * xi, 0.0));
      return n % 2 == 0 ? xi * std::tan(xi) - eta : -xi / std::tan(xi) - eta;
    };
    const double eps = 1e-15 * (1.0 + hi);
    if (g(lo + eps) >= 0.0 || g(hi - eps) <= 0.0) continue;
    const double xi = bisect(g, lo + eps, hi - eps);
    const double kappa = std::sqrt(std::max(R * R - xi * xi, 0.0)) / a;
    if (kappa > 1e-12) out.push_back(kappa);
  }
  std::sort(out.rbegin(), out.rend());
  return out;
}

// Newton on a complex function with central-difference derivative.
inline cplx newton_fd(const std::function<cplx(cplx)>& f, cplx z, int iters = 60) {
  for (int i = 0; i < iters; ++i) {
    const double h = 1e-6 * (1.0 + std::abs(z));
    const cplx d = (f(z + h) - f(z - h)) / (2.0 * h);
    const cplx step = f(z) / d;
    z -= step;
    if (std::abs(step) < 1e-15 * (1.0 + std::abs(z))) break;
  }
  return z;
}

// Fourth-order central difference.
template <class F>
auto central_diff(F f, cplx z, double h) {
  return (-f(z + 2.0 * h) + 8.0 * f(z + h) - 8.0 * f(z - h) + f(z - 2.0 * h)) / (12.0 * h);
}

}  // namespace oracle

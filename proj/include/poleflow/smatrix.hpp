#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include "poleflow/potential.hpp"

namespace poleflow {

using cplx = std::complex<double>;

/// 2x2 matrix acting on (psi, psi') column vectors.
struct TransferMatrix {
  cplx m11{1.0}, m12{0.0}, m21{0.0}, m22{1.0};

  cplx determinant() const noexcept { return m11 * m22 - m12 * m21; }
  double max_abs() const noexcept;

  friend TransferMatrix operator*(const TransferMatrix& a, const TransferMatrix& b) noexcept {
    return {a.m11 * b.m11 + a.m12 * b.m21, a.m11 * b.m12 + a.m12 * b.m22,
            a.m21 * b.m11 + a.m22 * b.m21, a.m21 * b.m12 + a.m22 * b.m22};
  }
  friend TransferMatrix operator+(const TransferMatrix& a, const TransferMatrix& b) noexcept {
    return {a.m11 + b.m11, a.m12 + b.m12, a.m21 + b.m21, a.m22 + b.m22};
  }
  TransferMatrix scaled(cplx s) const noexcept { return {m11 * s, m12 * s, m21 * s, m22 * s}; }
};

/// Transfer matrix across a constant piece of value V and length L:
/// [[cos KL, sin(KL)/K], [-K sin KL, cos KL]] with K^2 = k^2 - 2V.
/// Evaluated through functions of K^2 only, so it is entire in k.
/// Overflows for |Im KL| beyond ~700; use total_transfer_jet for that range.
TransferMatrix piece_transfer(double value, double length, cplx k);

/// Ordered product over the pieces, left piece applied first.
TransferMatrix total_transfer(const Potential& p, cplx k);

/// Transfer matrix and its k-derivative, both multiplied by exp(-log_scale)
/// so that the entries stay representable for deep wells and large |Im k|.
struct TransferJet {
  TransferMatrix m;
  TransferMatrix dm;
  double log_scale = 0.0;
};

TransferJet total_transfer_jet(const Potential& p, cplx k);

/// D(k) = ik(m11 + m22) + k^2 m12 - m21 and dD/dk, multiplied by
/// exp(-log_scale). `magnitude` bounds the size of the terms summed while
/// evaluating D, on the same scale, so eps * magnitude is its round-off
/// level and |value| / magnitude the relative residual.
struct ScaledDenominator {
  cplx value;
  cplx derivative;
  double magnitude = 0.0;
  double log_scale = 0.0;
};

ScaledDenominator denominator_jet(const Potential& p, cplx k);

/// D(k) unscaled. Entire in k, real on the imaginary axis for real
/// potentials, zero exactly at the S-matrix poles (and at k = 0 for the
/// free particle, where D = 2ik exp(-ikL)).
cplx denominator(const Potential& p, cplx k);
cplx denominator_dk(const Potential& p, cplx k);

/// dD/dp at fixed k along the family, by Richardson-extrapolated central
/// differences. Returned on the scale of denominator_jet(family.at(p), k).
cplx denominator_dparam_scaled(const PotentialFamily& family, cplx k, double p);
/// Unscaled dD/dp.
cplx denominator_dparam(const PotentialFamily& family, cplx k, double p);

/// dk/dp = -(dD/dp)/(dD/dk) for a simple zero k of D at parameter p.
cplx pole_velocity(const PotentialFamily& family, cplx k, double p);

/// Amplitudes for plane waves exp(+-ikx) referenced to x = 0:
/// left incidence  exp(ikx) + r_plus exp(-ikx)  ->  t exp(ikx),
/// right incidence exp(-ikx) + r_minus exp(ikx) ->  t exp(-ikx).
/// `denom` is D(k) (unscaled).
struct SMatrixEval {
  cplx t;
  cplx r_plus;
  cplx r_minus;
  cplx denom;
};

struct ThresholdError : std::domain_error {
  using std::domain_error::domain_error;
};
struct PoleError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Throws ThresholdError at k = 0 and PoleError when D vanishes to
/// round-off relative to its terms.
SMatrixEval s_matrix(const Potential& p, cplx k);

/// Same amplitudes with the plane waves referenced at the support
/// endpoints instead of the origin: t = 2ik/D.
SMatrixEval s_matrix_endpoint(const Potential& p, cplx k);

/// Points where some local wavenumber K_j vanishes: +-sqrt(2V) for V > 0,
/// +-i sqrt(-2V) for V < 0, one pair per distinct nonzero value.
std::vector<cplx> branch_points(const Potential& p);

}  // namespace poleflow

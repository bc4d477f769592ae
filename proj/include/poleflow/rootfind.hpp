#pragma once

#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

namespace poleflow {

using cplx = std::complex<double>;

struct Window {
  double re_min = 0.0, re_max = 0.0, im_min = 0.0, im_max = 0.0;

  /// Throws std::invalid_argument unless re_min < re_max and im_min < im_max.
  void validate() const;
  bool contains(cplx z) const noexcept {
    return z.real() >= re_min && z.real() <= re_max && z.imag() >= im_min && z.imag() <= im_max;
  }
  cplx center() const noexcept { return {0.5 * (re_min + re_max), 0.5 * (im_min + im_max)}; }
  double diameter() const noexcept { return std::hypot(re_max - re_min, im_max - im_min); }
  /// Same centre, both sides multiplied by `factor`.
  Window dilated(double factor) const noexcept;

  bool operator==(const Window&) const = default;
};

/// One evaluation of an analytic function f and f', both multiplied by
/// exp(-log_scale). `magnitude` is a scale for |f| against which
/// |value| / magnitude measures how close f is to zero.
struct Sample {
  cplx value;
  cplx derivative;
  double magnitude = 1.0;
  double log_scale = 0.0;
};

using AnalyticFunction = std::function<Sample(cplx)>;

struct Zero {
  cplx k;
  int multiplicity = 1;
  /// |f(k)| / magnitude at the returned point.
  double residual = 0.0;
  bool newton_converged = false;
};

struct RootOptions {
  double polish_tol = 1e-11;       // Newton step tolerance, relative to 1 + |k|
  double residual_tol = 1e-8;      // accepted |f| / magnitude after polishing
  int max_newton_iter = 50;
  double cluster_diameter = 1e-6;  // boxes below this are not split further
  double dilation = 1.13;
  int max_dilations = 3;
  double quad_tol = 0.1;           // error target for the contour integral before the integer test
  double winding_tol = 0.05;       // accept once this close to an integer
  double reject_tol = 0.25;        // reject beyond this after max refinement
  int max_edge_evals = 16384;
  double boundary_tol = 1e-10;     // |f/f'| / (1 + |z|) treated as a zero on the contour
  int threads = 1;

  void validate() const;
};

struct WindingResult {
  int count = 0;
  cplx raw;         // (1/2 pi i) contour integral of f'/f
  cplx moment1;     // (1/2 pi i) contour integral of z f'/f = sum of zeros
  cplx moment2;     // (1/2 pi i) contour integral of z^2 f'/f = sum of squared zeros
  Window window;    // the rectangle actually integrated over
  int evaluations = 0;
};

struct RootFindError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
/// A zero of f lies on (or within round-off of) the contour.
struct BoundaryZeroError : RootFindError {
  using RootFindError::RootFindError;
};

/// Argument-principle winding over the boundary of w, without dilation.
/// Throws BoundaryZeroError or RootFindError (non-integer winding).
WindingResult winding(const AnalyticFunction& f, const Window& w, const RootOptions& opts = {});

/// Like winding(), dilating w about its centre on boundary zeros.
WindingResult count_zeros_detail(const AnalyticFunction& f, const Window& w,
                                 const RootOptions& opts = {});

int count_zeros(const AnalyticFunction& f, const Window& w, const RootOptions& opts = {});

struct ZeroCensus {
  std::vector<Zero> zeros;
  /// Rectangle the census covers (w or a dilation of it).
  Window window;
  int total_multiplicity = 0;
};

/// All zeros in w with multiplicity. The multiplicity sum always equals
/// the winding count over census.window.
ZeroCensus find_zeros(const AnalyticFunction& f, const Window& w, const RootOptions& opts = {});

/// Newton iteration from k0. Switches to the step m f/f' when the local
/// multiplicity estimate settles near an integer m >= 2, or uses the given
/// multiplicity from the start. Converged when |step| < tol (1 + |k|) and
/// the relative residual is below residual_tol.
Zero newton_polish(const AnalyticFunction& f, cplx k0, double tol, int max_iter,
                   int multiplicity = 1, double residual_tol = 1e-8);

/// Wraps a polynomial given by its roots (times a constant) for tests and demos.
AnalyticFunction polynomial_from_roots(std::vector<cplx> roots, cplx lead = 1.0);

}  // namespace poleflow

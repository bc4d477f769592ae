#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace poleflow {

/// Piecewise-constant potential with finite support; V = 0 outside
/// [breakpoints.front(), breakpoints.back()]. Units: m = hbar = 1.
///
/// Piece i occupies (breakpoints[i], breakpoints[i+1]) and carries values[i].
/// Construction validates the layout and throws std::invalid_argument on
/// a malformed description; instances are immutable afterwards.
class Potential {
 public:
  Potential(std::vector<double> breakpoints, std::vector<double> values);

  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t piece_count() const noexcept { return values_.size(); }

  double left() const noexcept { return breakpoints_.front(); }
  double right() const noexcept { return breakpoints_.back(); }
  double support_width() const noexcept { return right() - left(); }
  double piece_width(std::size_t i) const { return breakpoints_.at(i + 1) - breakpoints_.at(i); }

  /// V(x); breakpoints belong to the piece on their right.
  double operator()(double x) const noexcept;

  /// Integral of V over the real line.
  double integral() const noexcept;
  /// First moment, integral of x V(x). For the antisymmetric step pair of
  /// strength U and half width a this is U a^2.
  double first_moment() const noexcept;

  /// True when every piece value is zero (no scattering at all).
  bool is_free() const noexcept;

  bool operator==(const Potential&) const = default;

 private:
  std::vector<double> breakpoints_;
  std::vector<double> values_;
};

struct Piece {
  double from;
  double to;
  double value;
};

/// Builds a potential from explicit pieces sorted left to right. Gaps
/// between consecutive pieces are filled with zero-valued pieces;
/// overlaps and zero-width pieces are rejected.
Potential from_pieces(std::span<const Piece> pieces);

std::vector<Piece> to_pieces(const Potential& p);

/// V = -depth on [-half_width, half_width]. depth > 0 is a well, < 0 a wall.
Potential make_square_well(double half_width, double depth);

/// V = -well_depth on [-left_width, 0] and wall_height on [0, right_width].
Potential make_two_piece(double left_width, double right_width, double well_depth,
                         double wall_height);

enum class SweepTarget {
  value,       ///< piece value = p
  depth,       ///< piece value = -p
  width,       ///< piece width = p, later breakpoints shifted
  half_width,  ///< support rescaled about x = 0 to half width p
};

/// Which quantity a family sweeps. `scaling_exponent` couples piece values
/// to geometric sweeps: values are multiplied by (w0/p)^exponent, so an
/// exponent of 1 keeps the area of each piece fixed.
struct SweepParameter {
  SweepTarget target = SweepTarget::depth;
  std::size_t piece = 0;
  double scaling_exponent = 0.0;
};

std::string to_string(SweepTarget t);
SweepTarget sweep_target_from_string(const std::string& s);

class PotentialFamily {
 public:
  PotentialFamily(Potential base, SweepParameter parameter);

  /// Instantiates the family at parameter value p. Throws
  /// std::invalid_argument when p leaves the family's domain (e.g. a
  /// non-positive width).
  Potential at(double p) const;

  /// Parameter value at which at(p) reproduces the base potential.
  double base_parameter() const noexcept { return base_param_; }

  const Potential& base() const noexcept { return base_; }
  const SweepParameter& parameter() const noexcept { return param_; }

  std::string describe() const;

 private:
  Potential base_;
  SweepParameter param_;
  double base_param_;
};

/// Square well of half width a with U = strength / (2a): the area under V
/// stays at -strength for every a.
PotentialFamily make_delta_family(double strength);

/// Antisymmetric pair {-U on [-a, 0], +U on [0, a]} swept in a. With the
/// default exponent U is held fixed; a positive exponent rescales U as
/// U (a0/a)^exponent with a0 = 0.5.
PotentialFamily make_delta_prime_family(double strength, double scaling_exponent = 0.0);

/// Square-well family in the depth U at fixed half width.
PotentialFamily make_square_well_family(double half_width);

}  // namespace poleflow

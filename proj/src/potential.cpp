#include "poleflow/potential.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace poleflow {

Potential::Potential(std::vector<double> breakpoints, std::vector<double> values)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
  if (values_.empty()) throw std::invalid_argument("potential needs at least one piece");
  if (breakpoints_.size() != values_.size() + 1)
    throw std::invalid_argument("potential needs exactly one more breakpoint than value");
  for (double x : breakpoints_)
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite breakpoint");
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite potential value");
  for (std::size_t i = 0; i + 1 < breakpoints_.size(); ++i)
    if (!(breakpoints_[i] < breakpoints_[i + 1]))
      throw std::invalid_argument("breakpoints must be strictly increasing");
}

double Potential::operator()(double x) const noexcept {
  if (x < left() || x >= right()) return 0.0;
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
  return values_[static_cast<std::size_t>(it - breakpoints_.begin()) - 1];
}

double Potential::integral() const noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) s += values_[i] * piece_width(i);
  return s;
}

double Potential::first_moment() const noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double a = breakpoints_[i], b = breakpoints_[i + 1];
    s += values_[i] * 0.5 * (b * b - a * a);
  }
  return s;
}

bool Potential::is_free() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

Potential from_pieces(std::span<const Piece> pieces) {
  if (pieces.empty()) throw std::invalid_argument("no pieces given");
  std::vector<double> xs{pieces.front().from};
  std::vector<double> vs;
  for (const Piece& pc : pieces) {
    if (!(pc.from < pc.to)) throw std::invalid_argument("piece with non-positive width");
    if (pc.from < xs.back()) throw std::invalid_argument("overlapping pieces");
    if (pc.from > xs.back()) {
      vs.push_back(0.0);
      xs.push_back(pc.from);
    }
    vs.push_back(pc.value);
    xs.push_back(pc.to);
  }
  return Potential(std::move(xs), std::move(vs));
}

std::vector<Piece> to_pieces(const Potential& p) {
  std::vector<Piece> out;
  for (std::size_t i = 0; i < p.piece_count(); ++i)
    out.push_back({p.breakpoints()[i], p.breakpoints()[i + 1], p.values()[i]});
  return out;
}

Potential make_square_well(double half_width, double depth) {
  if (!(half_width > 0.0)) throw std::invalid_argument("half_width must be positive");
  return Potential({-half_width, half_width}, {-depth});
}

Potential make_two_piece(double left_width, double right_width, double well_depth,
                         double wall_height) {
  if (!(left_width > 0.0) || !(right_width > 0.0))
    throw std::invalid_argument("piece widths must be positive");
  return Potential({-left_width, 0.0, right_width}, {-well_depth, wall_height});
}

std::string to_string(SweepTarget t) {
  switch (t) {
    case SweepTarget::value: return "value";
    case SweepTarget::depth: return "depth";
    case SweepTarget::width: return "width";
    case SweepTarget::half_width: return "half_width";
  }
  return "?";
}

SweepTarget sweep_target_from_string(const std::string& s) {
  if (s == "value") return SweepTarget::value;
  if (s == "depth") return SweepTarget::depth;
  if (s == "width") return SweepTarget::width;
  if (s == "half_width") return SweepTarget::half_width;
  throw std::invalid_argument("unknown sweep target '" + s + "'");
}

namespace {

double half_extent(const Potential& p) { return std::max(std::abs(p.left()), std::abs(p.right())); }

}  // namespace

PotentialFamily::PotentialFamily(Potential base, SweepParameter parameter)
    : base_(std::move(base)), param_(parameter), base_param_(0.0) {
  const bool needs_piece = param_.target != SweepTarget::half_width;
  if (needs_piece && param_.piece >= base_.piece_count())
    throw std::invalid_argument("sweep piece index out of range");
  if (!std::isfinite(param_.scaling_exponent))
    throw std::invalid_argument("non-finite scaling exponent");
  switch (param_.target) {
    case SweepTarget::value:
    case SweepTarget::depth:
      if (param_.scaling_exponent != 0.0)
        throw std::invalid_argument("scaling exponent only applies to geometric sweeps");
      base_param_ = param_.target == SweepTarget::value ? base_.values()[param_.piece]
                                                        : -base_.values()[param_.piece];
      break;
    case SweepTarget::width:
      base_param_ = base_.piece_width(param_.piece);
      break;
    case SweepTarget::half_width:
      base_param_ = half_extent(base_);
      break;
  }
}

Potential PotentialFamily::at(double p) const {
  if (!std::isfinite(p)) throw std::invalid_argument("non-finite family parameter");
  std::vector<double> xs = base_.breakpoints();
  std::vector<double> vs = base_.values();
  switch (param_.target) {
    case SweepTarget::value:
      vs[param_.piece] = p;
      break;
    case SweepTarget::depth:
      vs[param_.piece] = -p;
      break;
    case SweepTarget::width: {
      if (!(p > 0.0)) throw std::invalid_argument("swept width must be positive");
      const double shift = p - base_param_;
      for (std::size_t i = param_.piece + 1; i < xs.size(); ++i) xs[i] += shift;
      if (param_.scaling_exponent != 0.0)
        vs[param_.piece] *= std::pow(base_param_ / p, param_.scaling_exponent);
      break;
    }
    case SweepTarget::half_width: {
      if (!(p > 0.0)) throw std::invalid_argument("swept half width must be positive");
      const double ratio = p / base_param_;
      for (double& x : xs) x *= ratio;
      if (param_.scaling_exponent != 0.0) {
        const double f = std::pow(base_param_ / p, param_.scaling_exponent);
        for (double& v : vs) v *= f;
      }
      break;
    }
  }
  return Potential(std::move(xs), std::move(vs));
}

std::string PotentialFamily::describe() const {
  std::ostringstream os;
  os << to_string(param_.target);
  if (param_.target != SweepTarget::half_width) os << " of piece " << param_.piece;
  if (param_.scaling_exponent != 0.0) os << ", values scaled by (p0/p)^" << param_.scaling_exponent;
  return os.str();
}

PotentialFamily make_delta_family(double strength) {
  if (strength == 0.0 || !std::isfinite(strength))
    throw std::invalid_argument("delta strength must be finite and non-zero");
  // a0 = 0.5 makes the template depth equal to the strength.
  return PotentialFamily(make_square_well(0.5, strength),
                         {SweepTarget::half_width, 0, 1.0});
}

PotentialFamily make_delta_prime_family(double strength, double scaling_exponent) {
  if (strength == 0.0 || !std::isfinite(strength))
    throw std::invalid_argument("delta-prime strength must be finite and non-zero");
  return PotentialFamily(Potential({-0.5, 0.0, 0.5}, {-strength, strength}),
                         {SweepTarget::half_width, 0, scaling_exponent});
}

PotentialFamily make_square_well_family(double half_width) {
  return PotentialFamily(make_square_well(half_width, 1.0), {SweepTarget::depth, 0, 0.0});
}

}  // namespace poleflow

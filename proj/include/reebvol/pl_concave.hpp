#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "reebvol/linalg.hpp"
#include "reebvol/polyhedra.hpp"

namespace reebvol {

/// u -> <u, linear> + constant
struct AffineForm {
  RationalVector linear;
  Rational constant;

  Rational operator()(const RationalVector& u) const { return dot(linear, u) + constant; }
  friend bool operator==(const AffineForm&, const AffineForm&) = default;
};

/// min over branches of affine forms. With `clamp` set the value is
/// max(min, 0); that is an opt-in escape from the nonnegativity requirement
/// and is no longer concave in general.
class PLConcave {
 public:
  /// Throws Error(Dimension) for an empty branch list or mixed ranks.
  explicit PLConcave(std::vector<AffineForm> branches, bool clamp = false);

  static PLConcave zero(std::size_t rank);
  static PLConcave linear(RationalVector eta);

  std::size_t rank() const { return branches_.front().linear.rank(); }
  const std::vector<AffineForm>& branches() const { return branches_; }
  bool clamped() const { return clamp_; }

  Rational operator()(const RationalVector& u) const;
  Rational evaluate(const RationalVector& u) const { return (*this)(u); }

  /// Constants dropped (the limit of f(m u) / m).
  PLConcave homogenized() const;
  bool is_homogeneous() const;

  /// Every constant shifted by c.
  PLConcave shifted(const Rational& c) const;
  /// Pointwise multiple c f, c >= 0.
  PLConcave scaled(const Rational& c) const;
  /// y -> f(a y + b).
  PLConcave pulled_back(const RationalMatrix& a, const RationalVector& b) const;
  PLConcave with_clamp(bool clamp) const { return PLConcave(branches_, clamp); }

  /// Branches with duplicates removed, first occurrence kept.
  std::vector<AffineForm> distinct_branches() const;

  friend bool operator==(const PLConcave&, const PLConcave&) = default;

 private:
  std::vector<AffineForm> branches_;
  bool clamp_ = false;
};

/// Nonnegativity on the cone: the homogeneous part at every ray of `dual` and
/// f itself at every vertex of q. Clamped functions always pass. Throws
/// Error(InvalidFiltration) naming the offending point.
void validate_filtration(const PLConcave& f, const Cone& dual, const Polytope& q);

/// validate_filtration followed by homogenized().
PLConcave homogenize(const PLConcave& f, const Cone& dual, const Polytope& q);

struct LinearityCell {
  Polytope cell;
  AffineForm active;
};

/// Cells of p (of the same dimension as p) on which a single affine form
/// realises f. Clamped functions get extra cells with the zero form.
std::vector<LinearityCell> linearity_subdivision(const PLConcave& f, const Polytope& p);

/// Union of cell vertices, lexicographic.
std::vector<RationalVector> subdivision_vertices(const PLConcave& f, const Polytope& p);

/// Exact integral of f^k over p (Lebesgue measure of the ambient space; zero
/// for lower-dimensional p). Throws Error(UnsupportedDegree) for k > 4.
Rational integrate_moment(const PLConcave& f, const Polytope& p, unsigned k);

/// Complete homogeneous symmetric polynomial of degree k.
Rational complete_homogeneous(const std::vector<Rational>& x, unsigned k);

/// t -> vol{u in delta : f(u) >= t} for f >= 0 on delta.
class SuperlevelProfile {
 public:
  /// Polynomial in t, coefficients by increasing degree.
  using Polynomial = std::vector<Rational>;

  /// breakpoints = {0} and the values of f at subdivision vertices, sorted.
  const std::vector<Rational>& breakpoints() const { return breakpoints_; }
  const std::vector<Rational>& values_at_breakpoints() const { return at_breakpoints_; }
  /// pieces()[i] is valid on [breakpoints[i], breakpoints[i+1]].
  const std::vector<Polynomial>& pieces() const { return pieces_; }

  const Rational& total() const { return total_; }
  /// Largest breakpoint, i.e. max f.
  const Rational& top() const { return breakpoints_.back(); }

  Rational value(const Rational& t) const;
  /// lim_{s -> t+} value(s) = vol{f > t}.
  Rational right_limit(const Rational& t) const;
  /// Integral of value over [0, inf).
  Rational integral() const;

  /// Rows "t_lo,t_hi,c0,...,c_n", exact rationals.
  std::string csv() const;

  friend SuperlevelProfile superlevel_profile(const PLConcave& f, const Polytope& delta);

 private:
  std::vector<Rational> breakpoints_;
  std::vector<Rational> at_breakpoints_;
  std::vector<Polynomial> pieces_;
  Rational total_;
};

/// Requires delta full-dimensional.
SuperlevelProfile superlevel_profile(const PLConcave& f, const Polytope& delta);

Rational evaluate_polynomial(const SuperlevelProfile::Polynomial& c, const Rational& t);

/// max over subdivision vertices of P of f(u) - <u, v>. The other sign
/// convention, f(u) + <u, v>, is legendre(f, p, -v).
Rational legendre(const PLConcave& f, const Polytope& p, const RationalVector& v);

}  // namespace reebvol

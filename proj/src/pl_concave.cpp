#include "reebvol/pl_concave.hpp"

#include <algorithm>
#include <sstream>

#include "reebvol/error.hpp"

namespace reebvol {

PLConcave::PLConcave(std::vector<AffineForm> branches, bool clamp)
    : branches_(std::move(branches)), clamp_(clamp) {
  if (branches_.empty()) throw Error(ErrorCode::Dimension, "piecewise-linear function needs a branch");
  const std::size_t n = branches_.front().linear.rank();
  for (std::size_t i = 0; i < branches_.size(); ++i) {
    if (branches_[i].linear.rank() != n) {
      throw Error(ErrorCode::Dimension, "branch " + std::to_string(i) + " has rank " +
                                            std::to_string(branches_[i].linear.rank()) + ", expected " +
                                            std::to_string(n));
    }
  }
}

PLConcave PLConcave::zero(std::size_t rank) { return PLConcave({AffineForm{RationalVector(rank), 0}}); }

PLConcave PLConcave::linear(RationalVector eta) { return PLConcave({AffineForm{std::move(eta), 0}}); }

Rational PLConcave::operator()(const RationalVector& u) const {
  if (u.rank() != rank()) throw Error(ErrorCode::Dimension, "evaluation point has wrong rank");
  Rational best = branches_.front()(u);
  for (std::size_t i = 1; i < branches_.size(); ++i) best = min(best, branches_[i](u));
  if (clamp_ && best.sign() < 0) return 0;
  return best;
}

PLConcave PLConcave::homogenized() const {
  std::vector<AffineForm> out;
  for (const auto& b : branches_) out.push_back(AffineForm{b.linear, 0});
  return PLConcave(std::move(out), clamp_);
}

bool PLConcave::is_homogeneous() const {
  return std::all_of(branches_.begin(), branches_.end(), [](const AffineForm& b) { return b.constant.is_zero(); });
}

PLConcave PLConcave::shifted(const Rational& c) const {
  std::vector<AffineForm> out = branches_;
  for (auto& b : out) b.constant += c;
  return PLConcave(std::move(out), clamp_);
}

PLConcave PLConcave::scaled(const Rational& c) const {
  if (c.sign() < 0) throw Error(ErrorCode::InvalidFiltration, "negative scale reverses concavity");
  std::vector<AffineForm> out = branches_;
  for (auto& b : out) {
    b.linear *= c;
    b.constant *= c;
  }
  return PLConcave(std::move(out), clamp_);
}

PLConcave PLConcave::pulled_back(const RationalMatrix& a, const RationalVector& b) const {
  const RationalMatrix at = a.transposed();
  std::vector<AffineForm> out;
  for (const auto& br : branches_) out.push_back(AffineForm{at * br.linear, br.constant + dot(br.linear, b)});
  return PLConcave(std::move(out), clamp_);
}

std::vector<AffineForm> PLConcave::distinct_branches() const {
  std::vector<AffineForm> out;
  for (const auto& b : branches_)
    if (std::find(out.begin(), out.end(), b) == out.end()) out.push_back(b);
  return out;
}

void validate_filtration(const PLConcave& f, const Cone& dual, const Polytope& q) {
  if (f.clamped()) return;
  const PLConcave h = f.homogenized();
  for (const auto& r : dual.rays()) {
    if (h(r).sign() < 0) {
      throw Error(ErrorCode::InvalidFiltration,
                  "filtration is negative along the ray " + r.str() + " (value " + h(r).str() + ")", "filtration");
    }
  }
  for (const auto& v : q.vertices()) {
    if (f(v).sign() < 0) {
      throw Error(ErrorCode::InvalidFiltration,
                  "filtration is negative at the vertex " + v.str() + " (value " + f(v).str() + ")", "filtration");
    }
  }
}

PLConcave homogenize(const PLConcave& f, const Cone& dual, const Polytope& q) {
  validate_filtration(f, dual, q);
  return f.homogenized();
}

namespace {

// a(u) <= b(u)
Halfspace below(const AffineForm& a, const AffineForm& b) {
  return Halfspace{a.linear - b.linear, b.constant - a.constant};
}

}  // namespace

std::vector<LinearityCell> linearity_subdivision(const PLConcave& f, const Polytope& p) {
  std::vector<LinearityCell> cells;
  if (p.empty()) return cells;
  const int dim = p.dimension();
  const std::vector<AffineForm> forms = f.distinct_branches();
  const AffineForm zero{RationalVector(f.rank()), 0};
  auto keep = [&](Polytope cell, const AffineForm& active) {
    if (!cell.empty() && cell.dimension() == dim) cells.push_back(LinearityCell{std::move(cell), active});
  };
  for (std::size_t i = 0; i < forms.size(); ++i) {
    std::vector<Halfspace> extra;
    bool possible = true;
    for (std::size_t j = 0; j < forms.size(); ++j) {
      if (i == j) continue;
      if (forms[i].linear == forms[j].linear) {
        // Parallel: i is dominated unless its constant is smaller (ties
        // were removed above).
        if (forms[i].constant > forms[j].constant) possible = false;
        continue;
      }
      extra.push_back(below(forms[i], forms[j]));
    }
    if (!possible) continue;
    const Polytope cell = extra.empty() ? p : p.intersected(extra);
    if (!f.clamped()) {
      keep(cell, forms[i]);
      continue;
    }
    if (cell.empty()) continue;
    keep(cell.intersected({below(zero, forms[i])}), forms[i]);
    keep(cell.intersected({below(forms[i], zero)}), zero);
  }
  return cells;
}

std::vector<RationalVector> subdivision_vertices(const PLConcave& f, const Polytope& p) {
  std::vector<RationalVector> out;
  for (const auto& c : linearity_subdivision(f, p)) out.insert(out.end(), c.cell.vertices().begin(), c.cell.vertices().end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Rational complete_homogeneous(const std::vector<Rational>& x, unsigned k) {
  std::vector<Rational> h(k + 1, Rational(0));
  h[0] = 1;
  for (const auto& xi : x)
    for (unsigned j = 1; j <= k; ++j) h[j] += xi * h[j - 1];
  return h[k];
}

Rational integrate_moment(const PLConcave& f, const Polytope& p, unsigned k) {
  if (k > 4) throw Error(ErrorCode::UnsupportedDegree, "moment degree " + std::to_string(k) + " exceeds 4");
  if (p.empty() || !p.full_dimensional()) return 0;
  if (k == 0) return volume(p);
  const unsigned n = static_cast<unsigned>(p.rank());
  // Integral of l^k over a simplex: vol * k! n! / (n+k)! * h_k(l at vertices).
  const Rational weight = Rational(mpz_class(factorial(k) * factorial(n))) / Rational(factorial(n + k));
  Rational total = 0;
  for (const auto& c : linearity_subdivision(f, p)) {
    const auto& verts = c.cell.vertices();
    for (const auto& s : triangulate(c.cell).simplices) {
      std::vector<RationalVector> pts;
      std::vector<Rational> vals;
      for (std::size_t idx : s) {
        pts.push_back(verts[idx]);
        vals.push_back(c.active(verts[idx]));
      }
      total += simplex_volume(pts) * weight * complete_homogeneous(vals, k);
    }
  }
  return total;
}

Rational evaluate_polynomial(const SuperlevelProfile::Polynomial& c, const Rational& t) {
  Rational acc = 0;
  for (std::size_t i = c.size(); i-- > 0;) acc = acc * t + c[i];
  return acc;
}

namespace {

Rational superlevel_volume(const PLConcave& f, const Polytope& delta, const Rational& t) {
  if (t.sign() <= 0) return volume(delta);
  std::vector<Halfspace> extra;
  for (const auto& b : f.distinct_branches()) extra.push_back(Halfspace{-b.linear, b.constant - t});
  return volume(delta.intersected(extra));
}

}  // namespace

SuperlevelProfile superlevel_profile(const PLConcave& f, const Polytope& delta) {
  if (delta.empty() || !delta.full_dimensional()) {
    throw Error(ErrorCode::DegeneratePolytope,
                "superlevel profile needs a full-dimensional body (dimension " + std::to_string(delta.dimension()) + ")");
  }
  SuperlevelProfile prof;
  prof.total_ = volume(delta);
  std::vector<Rational> bps{Rational(0)};
  for (const auto& v : subdivision_vertices(f, delta)) {
    const Rational fv = f(v);
    if (fv.sign() < 0) throw Error(ErrorCode::InvalidFiltration, "function is negative at " + v.str(), "filtration");
    bps.push_back(fv);
  }
  std::sort(bps.begin(), bps.end());
  bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
  prof.breakpoints_ = bps;
  for (const auto& b : bps) prof.at_breakpoints_.push_back(superlevel_volume(f, delta, b));

  const std::size_t n = delta.rank();
  for (std::size_t i = 0; i + 1 < bps.size(); ++i) {
    const Rational lo = bps[i], width = bps[i + 1] - bps[i];
    RationalMatrix vander(n + 1, n + 1);
    RationalVector rhs(n + 1);
    for (std::size_t j = 0; j <= n; ++j) {
      const Rational t = lo + width * Rational(static_cast<long>(j + 1), static_cast<long>(n + 2));
      Rational power = 1;
      for (std::size_t d = 0; d <= n; ++d) {
        vander(j, d) = power;
        power *= t;
      }
      rhs[j] = superlevel_volume(f, delta, t);
    }
    const RationalVector coef = solve(vander, rhs);
    prof.pieces_.push_back(coef.entries());
  }
  return prof;
}

Rational SuperlevelProfile::value(const Rational& t) const {
  if (t.sign() <= 0) return total_;
  if (t > top()) return 0;
  auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - breakpoints_.begin());
  if (*it == t) return at_breakpoints_[i];
  return evaluate_polynomial(pieces_[i - 1], t);
}

Rational SuperlevelProfile::right_limit(const Rational& t) const {
  if (t.sign() < 0) return total_;
  if (t >= top()) return 0;
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
  return evaluate_polynomial(pieces_[i], t);
}

Rational SuperlevelProfile::integral() const {
  Rational total = 0;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const auto& c = pieces_[i];
    // Antiderivative sum c_d t^{d+1} / (d+1).
    std::vector<Rational> anti(c.size() + 1, Rational(0));
    for (std::size_t d = 0; d < c.size(); ++d) anti[d + 1] = c[d] / Rational(static_cast<long>(d + 1));
    total += evaluate_polynomial(anti, breakpoints_[i + 1]) - evaluate_polynomial(anti, breakpoints_[i]);
  }
  return total;
}

std::string SuperlevelProfile::csv() const {
  std::ostringstream os;
  os << "t_lo,t_hi";
  const std::size_t degree = pieces_.empty() ? 0 : pieces_.front().size();
  for (std::size_t d = 0; d < degree; ++d) os << ",c" << d;
  os << "\n";
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    os << breakpoints_[i].str() << "," << breakpoints_[i + 1].str();
    for (const auto& c : pieces_[i]) os << "," << c.str();
    os << "\n";
  }
  return os.str();
}

Rational legendre(const PLConcave& f, const Polytope& p, const RationalVector& v) {
  if (p.empty()) throw Error(ErrorCode::DegeneratePolytope, "Legendre transform over an empty polytope");
  if (v.rank() != p.rank()) throw Error(ErrorCode::Dimension, "Legendre argument has wrong rank", "v");
  const auto verts = subdivision_vertices(f, p);
  Rational best = f(verts.front()) - dot(verts.front(), v);
  for (std::size_t i = 1; i < verts.size(); ++i) best = max(best, f(verts[i]) - dot(verts[i], v));
  return best;
}

}  // namespace reebvol

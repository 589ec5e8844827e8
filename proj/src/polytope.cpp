#include <algorithm>
#include <map>

#include "reebvol/error.hpp"
#include "reebvol/polyhedra.hpp"

namespace reebvol {
namespace {

void sort_unique(std::vector<RationalVector>& pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
}

RationalVector project(const RationalVector& x, const std::vector<std::size_t>& coords) {
  RationalVector y(coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i) y[i] = x[coords[i]];
  return y;
}

/// Facets of a full-dimensional point configuration in R^d, d >= 1.
std::vector<Halfspace> facets_of(const std::vector<RationalVector>& pts, std::size_t d) {
  std::vector<RationalVector> lifted;
  lifted.reserve(pts.size());
  for (const auto& p : pts) {
    std::vector<Rational> e{Rational(1)};
    e.insert(e.end(), p.begin(), p.end());
    lifted.emplace_back(std::move(e));
  }
  // (b, a) with b + a.x >= 0 on every point.
  std::vector<Halfspace> out;
  for (const auto& r : extreme_rays(lifted, d + 1)) {
    RationalVector normal(d);
    for (std::size_t j = 0; j < d; ++j) normal[j] = -r[j + 1];
    out.push_back(Halfspace{std::move(normal), r[0]});
  }
  return out;
}

}  // namespace

AffineHull affine_hull(const std::vector<RationalVector>& points) {
  AffineHull hull;
  if (points.empty()) return hull;
  const std::size_t n = points.front().rank();
  std::vector<RationalVector> diffs;
  for (std::size_t i = 1; i < points.size(); ++i) diffs.push_back(points[i] - points[0]);
  std::vector<std::size_t> pivots;
  rref(diffs, pivots);
  hull.dimension = static_cast<int>(pivots.size());
  hull.free_coordinates = pivots;
  hull.equations = nullspace(diffs, n);
  for (const auto& e : hull.equations) hull.offsets.push_back(dot(e, points[0]));
  return hull;
}

Polytope Polytope::from_vertices(std::vector<RationalVector> points) {
  Polytope p;
  if (points.empty()) return p;
  p.rank_ = points.front().rank();
  for (const auto& x : points)
    if (x.rank() != p.rank_) throw Error(ErrorCode::Dimension, "vertex rank mismatch");
  sort_unique(points);

  const AffineHull hull = affine_hull(points);
  const auto d = static_cast<std::size_t>(hull.dimension);
  for (std::size_t i = 0; i < hull.equations.size(); ++i) {
    p.halfspaces_.push_back(Halfspace{hull.equations[i], hull.offsets[i]});
    p.halfspaces_.push_back(Halfspace{-hull.equations[i], -hull.offsets[i]});
  }
  if (d == 0) {
    p.vertices_ = std::move(points);
    return p;
  }

  std::vector<RationalVector> projected;
  projected.reserve(points.size());
  for (const auto& x : points) projected.push_back(project(x, hull.free_coordinates));
  const std::vector<Halfspace> facets = facets_of(projected, d);

  // Keep only genuine vertices: tight facets must have rank d.
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::vector<RationalVector> tight;
    for (const auto& f : facets)
      if (dot(f.normal, projected[i]) == f.offset) tight.push_back(f.normal);
    if (reebvol::rank(tight) == d) p.vertices_.push_back(points[i]);
  }
  for (const auto& f : facets) {
    RationalVector normal(p.rank_);
    for (std::size_t j = 0; j < d; ++j) normal[hull.free_coordinates[j]] = f.normal[j];
    p.halfspaces_.push_back(Halfspace{std::move(normal), f.offset});
  }
  return p;
}

Polytope Polytope::from_halfspaces(std::size_t rank_n, std::vector<Halfspace> halfspaces) {
  // Homogenise: s * offset - normal . x >= 0, s >= 0.
  std::vector<RationalVector> rows;
  rows.reserve(halfspaces.size() + 1);
  for (const auto& h : halfspaces) {
    if (h.normal.rank() != rank_n) throw Error(ErrorCode::Dimension, "halfspace rank mismatch");
    std::vector<Rational> e{h.offset};
    for (const auto& x : h.normal) e.push_back(-x);
    rows.emplace_back(std::move(e));
  }
  rows.push_back(RationalVector::unit(rank_n + 1, 0));
  std::vector<RationalVector> rays;
  try {
    rays = extreme_rays(rows, rank_n + 1);
  } catch (const Error&) {
    throw Error(ErrorCode::UnsupportedGeometry, "halfspace system is unbounded");
  }
  std::vector<RationalVector> verts;
  bool recession = false;
  for (const auto& r : rays) {
    if (r[0].is_zero()) {
      recession = true;
      continue;
    }
    RationalVector x(rank_n);
    for (std::size_t j = 0; j < rank_n; ++j) x[j] = r[j + 1] / r[0];
    verts.push_back(std::move(x));
  }
  if (recession && !verts.empty()) {
    throw Error(ErrorCode::UnsupportedGeometry, "halfspace system is unbounded");
  }
  if (verts.empty()) {
    Polytope p;
    p.rank_ = rank_n;
    return p;
  }
  return from_vertices(std::move(verts));
}

Polytope Polytope::from_both(std::vector<RationalVector> vertices, std::vector<Halfspace> halfspaces) {
  Polytope p;
  p.rank_ = vertices.empty() ? (halfspaces.empty() ? 0 : halfspaces.front().normal.rank())
                             : vertices.front().rank();
  sort_unique(vertices);
  p.vertices_ = std::move(vertices);
  p.halfspaces_ = std::move(halfspaces);
  return p;
}

int Polytope::dimension() const { return affine_hull(vertices_).dimension; }

bool Polytope::contains(const RationalVector& x) const {
  for (const auto& h : halfspaces_)
    if (dot(h.normal, x) > h.offset) return false;
  return true;
}

bool Polytope::is_consistent() const {
  for (const auto& v : vertices_)
    if (!contains(v)) return false;
  if (!full_dimensional()) return true;
  for (const auto& h : halfspaces_) {
    std::size_t tight = 0;
    for (const auto& v : vertices_)
      if (dot(h.normal, v) == h.offset) ++tight;
    if (tight < rank_) return false;
  }
  return true;
}

Polytope Polytope::transformed(const RationalMatrix& a) const {
  const RationalMatrix inv_t = inverse(a).transposed();
  std::vector<RationalVector> verts;
  for (const auto& v : vertices_) verts.push_back(a * v);
  std::vector<Halfspace> hs;
  for (const auto& h : halfspaces_) hs.push_back(Halfspace{inv_t * h.normal, h.offset});
  return from_both(std::move(verts), std::move(hs));
}

Polytope Polytope::scaled(const Rational& s) const {
  std::vector<RationalVector> verts;
  for (const auto& v : vertices_) verts.push_back(v * s);
  if (s.is_zero()) return from_vertices(std::move(verts));
  std::vector<Halfspace> hs;
  const Rational sign = s.sign() > 0 ? Rational(1) : Rational(-1);
  for (const auto& h : halfspaces_) hs.push_back(Halfspace{h.normal * sign, h.offset * s * sign});
  return from_both(std::move(verts), std::move(hs));
}

Polytope Polytope::intersected(const std::vector<Halfspace>& extra) const {
  std::vector<Halfspace> hs = halfspaces_;
  hs.insert(hs.end(), extra.begin(), extra.end());
  return from_halfspaces(rank_, std::move(hs));
}

Rational simplex_volume(const std::vector<RationalVector>& vertices) {
  const std::size_t n = vertices.size() - 1;
  std::vector<RationalVector> rows;
  rows.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) rows.push_back(vertices[i] - vertices[0]);
  return det(RationalMatrix(rows)).abs() / Rational(factorial(static_cast<unsigned>(n)));
}

Triangulation triangulate_points(const std::vector<RationalVector>& points) {
  Triangulation t;
  if (points.empty()) throw Error(ErrorCode::DegeneratePolytope, "empty point set (dimension -1)");
  const std::size_t n = points.front().rank();
  const AffineHull hull = affine_hull(points);
  if (hull.dimension != static_cast<int>(n)) {
    throw Error(ErrorCode::DegeneratePolytope,
                "degenerate polytope: affine hull has dimension " + std::to_string(hull.dimension) +
                    " < " + std::to_string(n));
  }

  // Initial simplex: first affinely independent points in order.
  std::vector<std::size_t> initial{0};
  std::vector<RationalVector> diffs;
  for (std::size_t i = 1; i < points.size() && initial.size() < n + 1; ++i) {
    diffs.push_back(points[i] - points[0]);
    if (rank(diffs) == diffs.size()) {
      initial.push_back(i);
    } else {
      diffs.pop_back();
    }
  }
  t.simplices.push_back(initial);

  RationalVector centre(n);
  for (auto i : initial) centre += points[i];
  centre *= Rational(1) / Rational(static_cast<long>(n + 1));

  struct Facet {
    std::vector<std::size_t> verts;  // sorted
    RationalVector normal;
    Rational offset;
  };
  auto make_facet = [&](std::vector<std::size_t> verts) {
    std::sort(verts.begin(), verts.end());
    std::vector<RationalVector> rows;
    for (std::size_t i = 1; i < verts.size(); ++i) rows.push_back(points[verts[i]] - points[verts[0]]);
    RationalVector normal = nullspace(rows, n).front();
    Rational offset = dot(normal, points[verts[0]]);
    if (dot(normal, centre) > offset) {
      normal = -normal;
      offset = -offset;
    }
    return Facet{std::move(verts), std::move(normal), std::move(offset)};
  };

  std::vector<Facet> boundary;
  for (std::size_t skip = 0; skip < initial.size(); ++skip) {
    std::vector<std::size_t> verts;
    for (std::size_t k = 0; k < initial.size(); ++k)
      if (k != skip) verts.push_back(initial[k]);
    boundary.push_back(make_facet(std::move(verts)));
  }

  std::vector<bool> used(points.size(), false);
  for (auto i : initial) used[i] = true;
  for (std::size_t pi = 0; pi < points.size(); ++pi) {
    if (used[pi]) continue;
    const RationalVector& p = points[pi];
    std::vector<Facet> kept;
    std::map<std::vector<std::size_t>, int> ridges;
    bool any = false;
    for (auto& f : boundary) {
      if (dot(f.normal, p) > f.offset) {
        any = true;
        std::vector<std::size_t> simplex = f.verts;
        simplex.push_back(pi);
        t.simplices.push_back(std::move(simplex));
        for (std::size_t skip = 0; skip < f.verts.size(); ++skip) {
          std::vector<std::size_t> r;
          for (std::size_t k = 0; k < f.verts.size(); ++k)
            if (k != skip) r.push_back(f.verts[k]);
          ++ridges[r];
        }
      } else {
        kept.push_back(std::move(f));
      }
    }
    if (!any) continue;
    for (const auto& [r, count] : ridges) {
      if (count != 1) continue;
      std::vector<std::size_t> verts = r;
      verts.push_back(pi);
      kept.push_back(make_facet(std::move(verts)));
    }
    boundary = std::move(kept);
  }
  return t;
}

Triangulation triangulate(const Polytope& p) { return triangulate_points(p.vertices()); }

Rational volume(const Polytope& p) {
  if (p.empty() || !p.full_dimensional()) return 0;
  const Triangulation t = triangulate(p);
  Rational total = 0;
  std::vector<RationalVector> simplex;
  for (const auto& s : t.simplices) {
    simplex.clear();
    for (auto i : s) simplex.push_back(p.vertices()[i]);
    total += simplex_volume(simplex);
  }
  return total;
}

ReebSlice reeb_slice(const Cone& dual, const RationalVector& xi) {
  if (xi.rank() != dual.rank()) throw Error(ErrorCode::Dimension, "xi rank mismatch");
  std::vector<RationalVector> slice;
  for (const auto& u : dual.rays()) {
    const Rational pairing = dot(u, xi);
    if (pairing.sign() <= 0) {
      throw Error(ErrorCode::NotReebField, "xi = " + xi.str() + " pairs to " + pairing.str() +
                                               " with ray " + u.str());
    }
    slice.push_back(u * pairing.inverse());
  }
  std::vector<Halfspace> hs;
  for (const auto& v : dual.halfspaces()) hs.push_back(Halfspace{-v, Rational(0)});
  std::vector<Halfspace> hq = hs;
  hq.push_back(Halfspace{xi, Rational(1)});
  std::vector<Halfspace> hp = hq;
  hp.push_back(Halfspace{-xi, Rational(-1)});

  std::vector<RationalVector> qverts = slice;
  qverts.emplace_back(dual.rank());
  return ReebSlice{Polytope::from_both(std::move(qverts), std::move(hq)),
                   Polytope::from_both(std::move(slice), std::move(hp))};
}

Polytope okounkov_body(const Cone& dual, const RationalVector& xi, const RationalMatrix& basis) {
  const std::size_t n = dual.rank();
  if (basis.rows() != n || basis.cols() != n) {
    throw Error(ErrorCode::InvalidBasis, "basis must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  if (det(basis) != Rational(1)) {
    throw Error(ErrorCode::InvalidBasis, "basis determinant is " + det(basis).str() + ", expected 1");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& u : dual.rays()) {
      if (dot(u, basis.row(i)).sign() < 0) {
        throw Error(ErrorCode::InvalidBasis, "basis vector " + basis.row(i).str() + " is not in sigma");
      }
    }
  }
  return reeb_slice(dual, xi).q.transformed(basis);
}

Triangulation triangulate_cone(const Cone& dual, const RationalVector& xi) {
  const ReebSlice slice = reeb_slice(dual, xi);
  const std::size_t n = dual.rank();
  std::size_t drop = n;
  for (std::size_t j = n; j-- > 0;) {
    if (!xi[j].is_zero()) {
      drop = j;
      break;
    }
  }
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < n; ++j)
    if (j != drop) keep.push_back(j);
  if (n == 1) return Triangulation{{{0}}};
  // Slice points in ray order, projected injectively to R^{n-1}.
  std::vector<RationalVector> pts;
  for (const auto& u : dual.rays()) pts.push_back(project(u * dot(u, xi).inverse(), keep));
  return triangulate_points(pts);
}

}  // namespace reebvol

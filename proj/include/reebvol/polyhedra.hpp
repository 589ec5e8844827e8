#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "reebvol/linalg.hpp"

namespace reebvol {

/// Extreme rays of the pointed cone {x in R^dim : a . x >= 0 for every row a},
/// as primitive integer vectors in lexicographic order (double description
/// method). Throws Error(UnsupportedGeometry) if the cone is not pointed.
std::vector<RationalVector> extreme_rays(const std::vector<RationalVector>& constraints,
                                         std::size_t dim);

enum class Lattice { N, M };

/// Full-dimensional pointed rational cone. `halfspaces` are the inward facet
/// normals u with <u, x> >= 0, which are exactly the rays of the dual cone.
class Cone {
 public:
  /// Builds the cone generated by `generators`, dropping redundant ones.
  static Cone from_rays(std::vector<RationalVector> generators, Lattice lattice = Lattice::N);

  std::size_t rank() const { return rank_; }
  const std::vector<RationalVector>& rays() const { return rays_; }
  const std::vector<RationalVector>& halfspaces() const { return halfspaces_; }
  Lattice lattice() const { return lattice_; }

  bool contains(const RationalVector& x) const;
  bool contains_in_interior(const RationalVector& x) const;

  friend bool operator==(const Cone&, const Cone&) = default;

 private:
  Cone() = default;
  friend Cone dual_cone(const Cone& c);
  std::size_t rank_ = 0;
  std::vector<RationalVector> rays_;
  std::vector<RationalVector> halfspaces_;
  Lattice lattice_ = Lattice::N;
};

Cone dual_cone(const Cone& c);

/// normal . x <= offset
struct Halfspace {
  RationalVector normal;
  Rational offset;
  friend bool operator==(const Halfspace&, const Halfspace&) = default;
};

/// Bounded polyhedron carrying both descriptions. Vertices are kept in
/// lexicographic order; equalities appear as opposite pairs of halfspaces.
class Polytope {
 public:
  Polytope() = default;

  static Polytope from_vertices(std::vector<RationalVector> points);
  /// Empty result (no vertices) when infeasible. Throws Error(UnsupportedGeometry)
  /// when the system is unbounded.
  static Polytope from_halfspaces(std::size_t rank, std::vector<Halfspace> halfspaces);
  /// Both descriptions supplied by the caller; vertices are sorted but not
  /// otherwise checked (see `is_consistent`).
  static Polytope from_both(std::vector<RationalVector> vertices, std::vector<Halfspace> halfspaces);

  std::size_t rank() const { return rank_; }
  const std::vector<RationalVector>& vertices() const { return vertices_; }
  const std::vector<Halfspace>& halfspaces() const { return halfspaces_; }
  bool empty() const { return vertices_.empty(); }
  /// Dimension of the affine hull; -1 when empty.
  int dimension() const;
  bool full_dimensional() const { return dimension() == static_cast<int>(rank_); }

  bool contains(const RationalVector& x) const;
  /// V-rep/H-rep cross validation.
  bool is_consistent() const;

  /// Image under x -> a x for invertible a.
  Polytope transformed(const RationalMatrix& a) const;
  Polytope scaled(const Rational& s) const;
  /// Adds constraints and recomputes vertices.
  Polytope intersected(const std::vector<Halfspace>& extra) const;

 private:
  std::size_t rank_ = 0;
  std::vector<RationalVector> vertices_;
  std::vector<Halfspace> halfspaces_;
};

/// Affine hull {x : equations[i] . x = offsets[i]} with the coordinates that
/// parametrise it injectively.
struct AffineHull {
  int dimension = -1;
  std::vector<RationalVector> equations;
  std::vector<Rational> offsets;
  std::vector<std::size_t> free_coordinates;
};

AffineHull affine_hull(const std::vector<RationalVector>& points);

struct Triangulation {
  /// Each simplex lists rank+1 indices into the vertex list it was built from.
  std::vector<std::vector<std::size_t>> simplices;
};

/// Placing triangulation of the points in the given order. Throws
/// Error(DegeneratePolytope) if the points do not span the ambient space.
Triangulation triangulate_points(const std::vector<RationalVector>& points);

/// Placing triangulation keyed to the (lexicographic) vertex order of `p`.
Triangulation triangulate(const Polytope& p);

/// |det(v1 - v0, ..., vn - v0)| / n!
Rational simplex_volume(const std::vector<RationalVector>& vertices);

/// Exact Lebesgue volume; zero for lower-dimensional or empty polytopes.
Rational volume(const Polytope& p);

/// #(m p cap Z^n) by recursive coordinate slicing. `jobs` > 1 splits the
/// outermost coordinate range across threads.
mpz_class lattice_count(const Polytope& p, unsigned long m, unsigned jobs = 1);

/// Points of m p cap Z^n in lexicographic order, each exactly once.
void for_each_lattice_point(const Polytope& p, unsigned long m,
                            const std::function<void(const std::vector<mpz_class>&)>& visit);
std::vector<RationalVector> lattice_points(const Polytope& p, unsigned long m);

/// Splits the lattice points of m p into contiguous lexicographic chunks
/// (by outermost coordinate) and visits each chunk on its own worker.
/// `visit(worker, point)` is called sequentially within a worker.
void parallel_lattice_points(const Polytope& p, unsigned long m, unsigned jobs,
                             const std::function<void(unsigned, const std::vector<mpz_class>&)>& visit);

/// Q_xi = {u in dual : <u, xi> <= 1} and its slice P_xi = {<u, xi> = 1}.
struct ReebSlice {
  Polytope q;
  Polytope p;
};

/// Throws Error(NotReebField) if some ray of `dual` pairs non-positively with xi.
ReebSlice reeb_slice(const Cone& dual, const RationalVector& xi);

/// Image of Q_xi under u -> (<u, e_1>, ..., <u, e_n>). Basis rows must lie in
/// the cone dual to `dual` and have determinant 1, else Error(InvalidBasis).
Polytope okounkov_body(const Cone& dual, const RationalVector& xi, const RationalMatrix& basis);

/// Simplicial subcones of `dual` as index tuples into dual.rays(), obtained
/// by triangulating P_xi.
Triangulation triangulate_cone(const Cone& dual, const RationalVector& xi);

}  // namespace reebvol

#include <algorithm>

#include "reebvol/error.hpp"
#include "reebvol/polyhedra.hpp"

namespace reebvol {

Cone Cone::from_rays(std::vector<RationalVector> generators, Lattice lattice) {
  if (generators.empty()) throw Error(ErrorCode::UnsupportedGeometry, "cone without rays");
  const std::size_t n = generators.front().rank();
  for (auto& g : generators) {
    if (g.rank() != n) throw Error(ErrorCode::Dimension, "ray rank mismatch");
    if (g.is_zero()) throw Error(ErrorCode::UnsupportedGeometry, "zero ray");
    g = primitive(g);
  }
  if (reebvol::rank(generators) < n) {
    throw Error(ErrorCode::UnsupportedGeometry, "cone is not full-dimensional");
  }
  // Facets of the cone are the extreme rays of its dual.
  std::vector<RationalVector> facets = extreme_rays(generators, n);
  if (reebvol::rank(facets) < n) throw Error(ErrorCode::UnsupportedGeometry, "cone is not pointed");

  std::sort(generators.begin(), generators.end());
  generators.erase(std::unique(generators.begin(), generators.end()), generators.end());
  std::vector<RationalVector> extreme;
  for (const auto& g : generators) {
    std::vector<RationalVector> tight;
    for (const auto& f : facets)
      if (dot(f, g).is_zero()) tight.push_back(f);
    if (reebvol::rank(tight) + 1 == n) extreme.push_back(g);
  }

  Cone c;
  c.rank_ = n;
  c.rays_ = std::move(extreme);
  c.halfspaces_ = std::move(facets);
  c.lattice_ = lattice;
  return c;
}

bool Cone::contains(const RationalVector& x) const {
  for (const auto& h : halfspaces_)
    if (dot(h, x).sign() < 0) return false;
  return true;
}

bool Cone::contains_in_interior(const RationalVector& x) const {
  for (const auto& h : halfspaces_)
    if (dot(h, x).sign() <= 0) return false;
  return true;
}

Cone dual_cone(const Cone& c) {
  Cone d;
  d.rank_ = c.rank_;
  d.rays_ = c.halfspaces_;
  d.halfspaces_ = c.rays_;
  d.lattice_ = c.lattice_ == Lattice::N ? Lattice::M : Lattice::N;
  return d;
}

}  // namespace reebvol

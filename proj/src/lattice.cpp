#include <algorithm>

#include "lattice_plan.hpp"
#include "reebvol/error.hpp"

namespace reebvol {
namespace detail {
namespace {

mpz_class abs_ceil(const Rational& x) { return x.abs().ceil(); }

}  // namespace

LatticePlan make_plan(const Polytope& p, unsigned long m) {
  LatticePlan plan;
  plan.rank = p.rank();
  if (p.empty()) return plan;
  plan.empty = false;

  std::vector<RationalVector> verts;
  for (const auto& v : p.vertices()) verts.push_back(v * Rational(static_cast<long>(m)));
  std::sort(verts.begin(), verts.end());
  verts.erase(std::unique(verts.begin(), verts.end()), verts.end());

  std::vector<RationalVector> diffs;
  for (std::size_t i = 1; i < verts.size(); ++i) diffs.push_back(verts[i] - verts[0]);
  std::vector<std::size_t> pivots;
  const std::vector<RationalVector> basis = rref(diffs, pivots);
  plan.free = pivots;
  const std::size_t n = plan.rank;
  const std::size_t d = pivots.size();
  const RationalVector& origin = verts[0];

  std::vector<bool> is_free(n, false);
  for (auto f : pivots) is_free[f] = true;
  for (std::size_t c = 0; c < n; ++c) {
    if (is_free[c]) continue;
    Rational constant = origin[c];
    std::vector<Rational> coef(d);
    for (std::size_t j = 0; j < d; ++j) {
      coef[j] = basis[j][c];
      constant -= origin[pivots[j]] * basis[j][c];
    }
    mpz_class den = constant.den();
    for (const auto& x : coef) den = lcm(den, x.den());
    Lift lift{c, (constant * Rational(den)).num(), {}, den};
    for (const auto& x : coef) lift.coef.push_back((x * Rational(den)).num());
    plan.lifts.push_back(std::move(lift));
  }

  mpz_class max_coord = 0;
  for (const auto& v : verts)
    for (const auto& x : v) max_coord = std::max(max_coord, abs_ceil(x));

  mpz_class max_term = 0;
  for (std::size_t k = 0; k < d; ++k) {
    std::vector<RationalVector> proj;
    for (const auto& v : verts) {
      RationalVector y(k + 1);
      for (std::size_t j = 0; j <= k; ++j) y[j] = v[pivots[j]];
      proj.push_back(std::move(y));
    }
    std::vector<SliceConstraint> level;
    const Polytope projection = Polytope::from_vertices(std::move(proj));
    for (const auto& h : projection.halfspaces()) {
      if (h.normal[k].is_zero()) continue;
      const RationalVector a = primitive(h.normal);
      // a = lambda * normal with lambda > 0.
      const Rational lambda = a[k] / h.normal[k];
      SliceConstraint c;
      mpz_class sum = 0;
      for (const auto& x : a) {
        c.a.push_back(x.num());
        sum += ::abs(x.num());
      }
      c.bound = (h.offset * lambda).floor();
      max_term = std::max(max_term, mpz_class(sum * (max_coord + 1) + ::abs(c.bound)));
      level.push_back(std::move(c));
    }
    plan.levels.push_back(std::move(level));
  }
  for (const auto& l : plan.lifts) {
    mpz_class sum = ::abs(l.constant);
    for (const auto& c : l.coef) sum += ::abs(c) * (max_coord + 1);
    max_term = std::max(max_term, sum);
  }
  const mpz_class limit = mpz_class(1) << 60;
  plan.fits_int64 = max_term < limit && max_coord < limit;
  return plan;
}

}  // namespace detail

namespace {

template <class Int>
mpz_class count_with(const detail::LatticePlan& plan, unsigned jobs) {
  const detail::TypedPlan<Int> typed(plan);
  const auto chunks = typed.chunks(jobs);
  std::vector<mpz_class> partial(chunks.size());
  detail::run_chunks(chunks, [&](unsigned w, const Int& lo, const Int& hi) {
    partial[w] = typed.count(lo, hi);
  });
  mpz_class total = 0;
  for (const auto& c : partial) total += c;
  return total;
}

mpz_class to_mpz(long long v) { return mpz_class(static_cast<long>(v)); }
const mpz_class& to_mpz(const mpz_class& v) { return v; }

template <class Int>
void visit_with(const detail::LatticePlan& plan, unsigned jobs,
                const std::function<void(unsigned, const std::vector<mpz_class>&)>& visit) {
  const detail::TypedPlan<Int> typed(plan);
  const auto chunks = typed.chunks(jobs);
  detail::run_chunks(chunks, [&](unsigned w, const Int& lo, const Int& hi) {
    std::vector<mpz_class> point(plan.rank);
    typed.visit(lo, hi, [&](const std::vector<Int>& x) {
      for (std::size_t i = 0; i < x.size(); ++i) point[i] = to_mpz(x[i]);
      visit(w, point);
    });
  });
}

}  // namespace

mpz_class lattice_count(const Polytope& p, unsigned long m, unsigned jobs) {
  const detail::LatticePlan plan = detail::make_plan(p, m);
  if (plan.empty) return 0;
  return plan.fits_int64 ? count_with<long long>(plan, jobs) : count_with<mpz_class>(plan, jobs);
}

void parallel_lattice_points(const Polytope& p, unsigned long m, unsigned jobs,
                             const std::function<void(unsigned, const std::vector<mpz_class>&)>& visit) {
  const detail::LatticePlan plan = detail::make_plan(p, m);
  if (plan.empty) return;
  if (plan.fits_int64) {
    visit_with<long long>(plan, jobs, visit);
  } else {
    visit_with<mpz_class>(plan, jobs, visit);
  }
}

void for_each_lattice_point(const Polytope& p, unsigned long m,
                            const std::function<void(const std::vector<mpz_class>&)>& visit) {
  const detail::LatticePlan plan = detail::make_plan(p, m);
  if (plan.empty) return;
  const bool ordered = plan.lifts.empty();
  if (ordered) {
    parallel_lattice_points(p, m, 1, [&](unsigned, const std::vector<mpz_class>& x) { visit(x); });
    return;
  }
  // Lower-dimensional: enumeration runs over the free coordinates, so
  // restore lexicographic order on the full coordinates.
  std::vector<std::vector<mpz_class>> pts;
  parallel_lattice_points(p, m, 1, [&](unsigned, const std::vector<mpz_class>& x) { pts.push_back(x); });
  std::sort(pts.begin(), pts.end());
  for (const auto& x : pts) visit(x);
}

std::vector<RationalVector> lattice_points(const Polytope& p, unsigned long m) {
  std::vector<RationalVector> out;
  for_each_lattice_point(p, m, [&](const std::vector<mpz_class>& x) {
    RationalVector v(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) v[i] = Rational(x[i]);
    out.push_back(std::move(v));
  });
  return out;
}

}  // namespace reebvol

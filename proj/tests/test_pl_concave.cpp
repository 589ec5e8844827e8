#include <cmath>
#include <functional>
#include <random>

#include "doctest.h"
#include "reebvol/error.hpp"
#include "reebvol/pl_concave.hpp"
#include "test_support.hpp"

using namespace reebvol;
using namespace reebvol::test;

namespace {

AffineForm form(std::initializer_list<long> linear, long constant = 0) { return AffineForm{vec(linear), constant}; }

PLConcave min_of(std::vector<AffineForm> forms) { return PLConcave(std::move(forms)); }

Polytope random_polytope(std::size_t n) {
  for (;;) {
    std::vector<RationalVector> pts;
    for (int i = 0; i < 7; ++i) {
      RationalVector x(n);
      for (std::size_t j = 0; j < n; ++j) x[j] = uniform(-3, 3);
      pts.push_back(x);
    }
    Polytope p = Polytope::from_vertices(pts);
    if (p.full_dimensional()) return p;
  }
}

PLConcave random_pl(std::size_t n, int branches) {
  std::vector<AffineForm> forms;
  for (int b = 0; b < branches; ++b) {
    RationalVector a(n);
    for (std::size_t j = 0; j < n; ++j) a[j] = q(uniform(-4, 4), uniform(1, 3));
    forms.push_back(AffineForm{a, q(uniform(-3, 3), uniform(1, 2))});
  }
  return PLConcave(forms);
}

// Oracle: cut p along every pairwise tie hyperplane, pick the active branch
// on each piece at its vertex barycentre, and integrate the branch power by
// expanding it in simplex coordinates (Dirichlet monomial integrals).

std::vector<Polytope> cut_by_ties(const PLConcave& f, const Polytope& p) {
  std::vector<Polytope> pieces{p};
  const auto& b = f.branches();
  for (std::size_t i = 0; i < b.size(); ++i) {
    for (std::size_t j = i + 1; j < b.size(); ++j) {
      const RationalVector d = b[i].linear - b[j].linear;
      if (d.is_zero()) continue;
      const Rational off = b[j].constant - b[i].constant;
      std::vector<Polytope> next;
      for (const auto& piece : pieces) {
        for (int side : {1, -1}) {
          Polytope half = piece.intersected({Halfspace{d * Rational(side), off * Rational(side)}});
          if (!half.empty() && half.full_dimensional()) next.push_back(half);
        }
      }
      pieces = std::move(next);
    }
  }
  return pieces;
}

// Integral over the standard simplex of (a_0 + sum a_i x_i)^k.
Rational dirichlet_power(const std::vector<Rational>& a, unsigned k) {
  const std::size_t n = a.size() - 1;
  Rational total = 0;
  std::vector<unsigned> e(a.size(), 0);
  std::function<void(std::size_t, unsigned)> rec = [&](std::size_t idx, unsigned left) {
    if (idx == a.size() - 1) {
      e[idx] = left;
      // multinomial * prod a^e * (prod_{i>=1} e_i!) / (n + sum_{i>=1} e_i)!
      mpz_class denom = 1;
      for (unsigned x : e) denom *= factorial(x);
      Rational term = Rational(factorial(k)) / Rational(denom);
      for (std::size_t i = 0; i < a.size(); ++i) term *= pow(a[i], static_cast<int>(e[i]));
      unsigned s = 0;
      mpz_class numer = 1;
      for (std::size_t i = 1; i < a.size(); ++i) {
        s += e[i];
        numer *= factorial(e[i]);
      }
      term *= Rational(numer) / Rational(factorial(static_cast<unsigned>(n) + s));
      total += term;
      return;
    }
    for (unsigned x = 0; x <= left; ++x) {
      e[idx] = x;
      rec(idx + 1, left - x);
    }
  };
  rec(0, k);
  return total;
}

Rational oracle_moment(const PLConcave& f, const Polytope& p, unsigned k) {
  Rational total = 0;
  for (const auto& piece : cut_by_ties(f, p)) {
    RationalVector centre(p.rank());
    for (const auto& v : piece.vertices()) centre += v;
    centre *= Rational(1) / Rational(static_cast<long>(piece.vertices().size()));
    const AffineForm* active = &f.branches().front();
    for (const auto& b : f.branches())
      if (b(centre) < (*active)(centre)) active = &b;
    for (const auto& s : triangulate(piece).simplices) {
      const RationalVector& v0 = piece.vertices()[s[0]];
      std::vector<RationalVector> edges;
      std::vector<Rational> a{(*active)(v0)};
      for (std::size_t i = 1; i < s.size(); ++i) {
        const RationalVector& vi = piece.vertices()[s[i]];
        edges.push_back(vi - v0);
        a.push_back((*active)(vi) - a[0]);
      }
      total += det(RationalMatrix(edges)).abs() * dirichlet_power(a, k);
    }
  }
  return total;
}

}  // namespace

TEST_CASE("evaluate examples") {
  CHECK(PLConcave::linear(vec({1, 0}))(vec({3, 5})) == 3);
  CHECK(min_of({form({1, 0}), form({0, 1})})(vec({2, 1})) == 1);
  CHECK(min_of({form({1, 0}, 3), form({0, 1})})(vec({0, 1})) == 1);
  CHECK_THROWS_AS(PLConcave::linear(vec({1, 0}))(vec({1, 2, 3})), Error);
  CHECK_THROWS_AS(PLConcave({}), Error);
  CHECK_THROWS_AS(min_of({form({1, 0}), form({1, 0, 0})}), Error);
}

TEST_CASE("clamp mode") {
  const PLConcave f = PLConcave({form({1, -1})}, true);
  CHECK(f(vec({0, 2})) == 0);
  CHECK(f(vec({3, 1})) == 2);
}

TEST_CASE("homogenize examples") {
  const PLConcave f = min_of({form({1, 0}, 3), form({0, 1})});
  const PLConcave h = f.homogenized();
  CHECK(h == min_of({form({1, 0}), form({0, 1})}));
  CHECK(h.is_homogeneous());
  CHECK_FALSE(f.is_homogeneous());
  CHECK(h.homogenized() == h);

  // f(m u) / m against the limit at m = 10^6.
  const Rational m(1000000);
  for (const auto& u : {vec({1, 1}), vec({3, 1}), vec({0, 2})}) {
    const Rational approx = f(u * m) / m;
    CHECK((approx - h(u)).abs() <= Rational(3) / m);
  }
}

TEST_CASE("homogenize drops constants exactly") {
  for (int trial = 0; trial < 20; ++trial) {
    const PLConcave f = random_pl(3, 3);
    const PLConcave h = f.homogenized();
    RationalVector u(3);
    for (std::size_t j = 0; j < 3; ++j) u[j] = q(uniform(-5, 5), uniform(1, 4));
    Rational expect = dot(f.branches()[0].linear, u);
    for (const auto& b : f.branches()) expect = min(expect, dot(b.linear, u));
    CHECK(h(u) == expect);
  }
}

TEST_CASE("filtration validation") {
  const Cone dual = dual_cone(orthant(2));
  const ReebSlice s = reeb_slice(dual, vec({1, 1}));
  CHECK_NOTHROW(homogenize(min_of({form({1, 0}, 3), form({0, 1})}), dual, s.q));
  try {
    homogenize(min_of({form({1, -1})}), dual, s.q);
    FAIL("expected an invalid-filtration error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidFiltration);
    CHECK(e.field() == "filtration");
  }
  CHECK_THROWS_AS(homogenize(min_of({form({1, 1}, -1)}), dual, s.q), Error);
  CHECK_NOTHROW(homogenize(PLConcave({form({1, -1})}, true), dual, s.q));
}

TEST_CASE("linearity subdivision examples") {
  const Polytope tri = standard_simplex(2);
  const auto single = linearity_subdivision(PLConcave::linear(vec({1, 0})), tri);
  REQUIRE(single.size() == 1);
  CHECK(single[0].cell.vertices() == tri.vertices());

  const auto split = linearity_subdivision(min_of({form({1, 0}), form({0, 1})}), unit_square());
  REQUIRE(split.size() == 2);
  CHECK(split[0].active == form({1, 0}));
  CHECK(split[0].cell.vertices() == std::vector<RationalVector>{vec({0, 0}), vec({0, 1}), vec({1, 1})});
  CHECK(split[1].cell.vertices() == std::vector<RationalVector>{vec({0, 0}), vec({1, 0}), vec({1, 1})});
  CHECK(volume(split[0].cell) == q(1, 2));
  CHECK(volume(split[1].cell) == q(1, 2));
}

TEST_CASE("linearity subdivision with a zero branch on the simplex") {
  // u1, u2 >= 0 on the simplex, so the constant branch is the minimum
  // everywhere: one cell, the whole simplex, with the zero form active.
  const Polytope tri = standard_simplex(2);
  const PLConcave f = min_of({form({1, 0}), form({0, 1}), form({0, 0})});
  const auto cells = linearity_subdivision(f, tri);
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].active == form({0, 0}));
  CHECK(volume(cells[0].cell) == volume(tri));

  // Sampling oracle: classify interior grid points by the uniquely smallest
  // branch.
  int zero_unique = 0, other_unique = 0;
  for (int a = 1; a < 40; ++a) {
    for (int b = 1; a + b < 40; ++b) {
      const RationalVector u{q(a, 40), q(b, 40)};
      const Rational v0 = u[0], v1 = u[1];
      if (Rational(0) < min(v0, v1)) ++zero_unique;
      else ++other_unique;
    }
  }
  CHECK(zero_unique > 0);
  CHECK(other_unique == 0);
}

TEST_CASE("linearity subdivision covers the polytope") {
  for (std::size_t n : {2u, 3u}) {
    for (int trial = 0; trial < 6; ++trial) {
      const Polytope p = random_polytope(n);
      const PLConcave f = random_pl(n, 3);
      Rational total = 0;
      for (const auto& c : linearity_subdivision(f, p)) {
        total += volume(c.cell);
        for (const auto& v : c.cell.vertices()) CHECK(c.active(v) == f(v));
      }
      CHECK(total == volume(p));
    }
  }
}

TEST_CASE("integrate moment examples") {
  const Polytope tri = standard_simplex(2);
  CHECK(integrate_moment(PLConcave::linear(vec({1, 0})), tri, 1) == q(1, 6));
  CHECK(integrate_moment(min_of({form({1, 0}), form({0, 1})}), tri, 1) == q(1, 12));
  CHECK(integrate_moment(random_pl(2, 3), tri, 0) == q(1, 2));
  CHECK(integrate_moment(PLConcave::linear(vec({1, 0})), tri, 2) == q(1, 12));
  try {
    integrate_moment(PLConcave::linear(vec({1, 0})), tri, 5);
    FAIL("expected an unsupported-degree error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnsupportedDegree);
  }
  CHECK(complete_homogeneous({q(1), q(2)}, 2) == 7);
}

TEST_CASE("integrate moment agrees with the cutting oracle") {
  for (std::size_t n : {2u, 3u}) {
    for (int trial = 0; trial < 5; ++trial) {
      const Polytope p = random_polytope(n);
      const PLConcave f = random_pl(n, 3);
      for (unsigned k = 1; k <= 4; ++k) CHECK(integrate_moment(f, p, k) == oracle_moment(f, p, k));
    }
  }
  const PLConcave clamped = PLConcave({form({1, -2}, 1), form({-1, 1}, 2)}, true);
  const Polytope sq = Polytope::from_vertices({vec({-2, -2}), vec({3, -2}), vec({-2, 3}), vec({3, 3})});
  const PLConcave positive_part = min_of({form({1, -2}, 1), form({-1, 1}, 2)});
  // Clamped integral = integral of the unclamped function over {f >= 0}.
  Rational expect = 0;
  for (const auto& c : linearity_subdivision(positive_part, sq)) {
    const Polytope pos = c.cell.intersected({Halfspace{-c.active.linear, c.active.constant}});
    if (!pos.empty() && pos.full_dimensional()) expect += oracle_moment(PLConcave({c.active}), pos, 2);
  }
  CHECK(integrate_moment(clamped, sq, 2) == expect);
}

TEST_CASE("integrate moment Monte Carlo sanity (non-gating)") {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t n : {2u, 3u}) {
    const Polytope p = random_polytope(n);
    const PLConcave f = random_pl(n, 3);
    std::vector<double> lo(n, 1e9), hi(n, -1e9);
    for (const auto& v : p.vertices()) {
      for (std::size_t j = 0; j < n; ++j) {
        lo[j] = std::min(lo[j], v[j].to_double());
        hi[j] = std::max(hi[j], v[j].to_double());
      }
    }
    double box = 1;
    for (std::size_t j = 0; j < n; ++j) box *= hi[j] - lo[j];
    const int samples = 20000;
    double sum = 0, sum2 = 0;
    for (int s = 0; s < samples; ++s) {
      RationalVector x(n);
      for (std::size_t j = 0; j < n; ++j) x[j] = Rational::parse(std::to_string(static_cast<long>((lo[j] + (hi[j] - lo[j]) * unit(rng())) * 1000)) + "/1000");
      const double val = p.contains(x) ? f(x).to_double() * box : 0.0;
      sum += val;
      sum2 += val * val;
    }
    const double mean = sum / samples;
    const double sigma = std::sqrt((sum2 / samples - mean * mean) / samples);
    const double exact = integrate_moment(f, p, 1).to_double();
    WARN_MESSAGE(std::abs(mean - exact) <= 3 * sigma + 1e-2 * box, "Monte Carlo estimate ", mean, " vs exact ", exact);
  }
}

TEST_CASE("superlevel profile examples") {
  const Polytope tri = standard_simplex(2);
  const SuperlevelProfile prof = superlevel_profile(PLConcave::linear(vec({1, 0})), tri);
  CHECK(prof.breakpoints() == std::vector<Rational>{q(0), q(1)});
  REQUIRE(prof.pieces().size() == 1);
  // (1 - t)^2 / 2
  CHECK(prof.pieces()[0] == SuperlevelProfile::Polynomial{q(1, 2), q(-1), q(1, 2)});
  CHECK(prof.value(0) == q(1, 2));
  CHECK(prof.value(q(1, 3)) == q(2, 9));
  CHECK(prof.value(1) == 0);
  CHECK(prof.value(2) == 0);
  CHECK(prof.integral() == q(1, 6));

  const SuperlevelProfile flat = superlevel_profile(PLConcave::zero(2), tri);
  CHECK(flat.value(0) == q(1, 2));
  CHECK(flat.right_limit(0) == 0);
  CHECK(flat.value(q(1, 100)) == 0);
  CHECK(flat.integral() == 0);
  CHECK(flat.pieces().empty());

  CHECK(prof.csv() == "t_lo,t_hi,c0,c1,c2\n0,1,1/2,-1,1/2\n");
}

TEST_CASE("superlevel profile integrates to the first moment") {
  for (std::size_t n : {2u, 3u}) {
    for (int trial = 0; trial < 5; ++trial) {
      const Polytope p = random_polytope(n);
      PLConcave f = random_pl(n, 3);
      Rational lowest = 0;
      for (const auto& v : subdivision_vertices(f, p)) lowest = min(lowest, f(v));
      f = f.shifted(-lowest);
      const SuperlevelProfile prof = superlevel_profile(f, p);
      CHECK(prof.value(0) == volume(p));
      CHECK(prof.total() == volume(p));
      CHECK(prof.integral() == integrate_moment(f, p, 1));
      // Nonincreasing and continuous at interior breakpoints.
      const auto& bp = prof.breakpoints();
      for (std::size_t i = 1; i + 1 < bp.size(); ++i) {
        CHECK(evaluate_polynomial(prof.pieces()[i - 1], bp[i]) == evaluate_polynomial(prof.pieces()[i], bp[i]));
        CHECK(prof.value(bp[i]) >= prof.right_limit(bp[i]));
        CHECK(prof.value(bp[i - 1]) >= prof.value(bp[i]));
      }
      CHECK(prof.value(prof.top() + 1) == 0);
    }
  }
}

TEST_CASE("legendre examples") {
  const Polytope seg = Polytope::from_vertices({vec({1, 0}), vec({0, 1})});
  CHECK(legendre(PLConcave::linear(vec({1, 0})), seg, vec({0, 0})) == 1);
  const RationalVector v{q(2), q(-3, 2)};
  CHECK(legendre(PLConcave::zero(2), seg, v) == max(-dot(vec({1, 0}), v), -dot(vec({0, 1}), v)));
  // Interior kink of min(u1, u2) on the segment at (1/2, 1/2).
  CHECK(legendre(min_of({form({1, 0}), form({0, 1})}), seg, vec({0, 0})) == q(1, 2));
}

TEST_CASE("legendre is convex in v") {
  const Cone dual = dual_cone(Cone::from_rays({vec({1, 0, 0}), vec({1, 2, 0}), vec({1, 1, 3})}));
  const Polytope p = reeb_slice(dual, vec({3, 2, 1})).p;
  const PLConcave f = min_of({form({1, 0, 0}), form({0, 1, 1}), form({1, 1, -1})});
  for (int trial = 0; trial < 30; ++trial) {
    RationalVector a(3), b(3);
    for (std::size_t j = 0; j < 3; ++j) {
      a[j] = q(uniform(-6, 6), uniform(1, 3));
      b[j] = q(uniform(-6, 6), uniform(1, 3));
    }
    const RationalVector mid = (a + b) * q(1, 2);
    CHECK(legendre(f, p, mid) * 2 <= legendre(f, p, a) + legendre(f, p, b));
  }
}

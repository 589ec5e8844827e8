#include <algorithm>

#include "doctest.h"
#include "reebvol/error.hpp"
#include "reebvol/grading.hpp"
#include "test_support.hpp"

using namespace reebvol;
using namespace reebvol::test;

namespace {

AffineForm form(std::initializer_list<long> linear, long constant = 0) { return AffineForm{vec(linear), constant}; }

GradedSetup orthant_setup(RationalVector xi, PLConcave psi) {
  const std::size_t n = xi.rank();
  return GradedSetup(dual_cone(orthant(n)), std::move(xi), std::move(psi));
}

const PLConcave u1 = PLConcave::linear(vec({1, 0}));
const PLConcave min12 = PLConcave({form({1, 0}), form({0, 1})});

// Brute force: psi at every box point of m Q, sorted.
std::vector<Rational> brute_spectrum(const GradedSetup& g, long m) {
  std::vector<Rational> out;
  for (const auto& u : brute_force_points(g.slice().q, m)) out.push_back(g.psi()(u));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("jumping spectrum examples") {
  const GradedSetup g = orthant_setup(vec({1, 1}), u1);
  const JumpingSpectrum s = jumping_spectrum(g, 2);
  CHECK(s.expanded() == std::vector<Rational>{0, 0, 0, 1, 1, 2});
  CHECK(s.count == 6);
  CHECK(s.values.size() == 3);
  CHECK(s.values[0].second == 3);

  const GradedSetup zero = orthant_setup(vec({1, 1}), PLConcave::zero(2));
  const JumpingSpectrum z = jumping_spectrum(zero, 7);
  CHECK(z.count == lattice_count(zero.slice().q, 7));
  REQUIRE(z.values.size() == 1);
  CHECK(z.values[0].first == 0);

  const GradedSetup shifted = orthant_setup(vec({1, 1}), PLConcave({form({1, 0}, 3), form({0, 1}, 2)}));
  const JumpingSpectrum s0 = jumping_spectrum(shifted, 0);
  CHECK(s0.expanded() == std::vector<Rational>{2});
}

TEST_CASE("setup validation") {
  CHECK_THROWS_AS(orthant_setup(vec({1, -1}), u1), Error);
  try {
    orthant_setup(vec({1, 1}), PLConcave::linear(vec({1, -1})));
    FAIL("expected an invalid-filtration error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidFiltration);
  }
  CHECK_THROWS_AS(orthant_setup(vec({1, 1}), PLConcave::linear(vec({1, 0, 0}))), Error);
}

TEST_CASE("spectrum matches brute force") {
  const std::vector<GradedSetup> setups{
      orthant_setup(vec({1, 2}), min12),
      GradedSetup(dual_cone(a1_cone()), vec({1, 1}), PLConcave({form({1, 1}, 1), form({1, 2})})),
      orthant_setup(RationalVector{q(3, 2), q(1), q(5, 4)},
                    PLConcave({AffineForm{RationalVector{q(1, 2), q(1), q(0)}, q(1, 3)}, form({0, 1, 1})})),
  };
  for (const auto& g : setups) {
    for (long m : {1L, 3L, 8L}) {
      const JumpingSpectrum s = jumping_spectrum(g, static_cast<unsigned long>(m));
      CHECK(s.expanded() == brute_spectrum(g, m));
      CHECK(s.count == lattice_count(g.slice().q, static_cast<unsigned long>(m)));
    }
  }
}

TEST_CASE("spectrum is independent of worker count") {
  const GradedSetup g = orthant_setup(vec({1, 2, 3}), PLConcave({form({1, 0, 0}), form({0, 1, 1}, 1)}));
  const JumpingSpectrum one = jumping_spectrum(g, 40, {false, 1});
  const JumpingSpectrum many = jumping_spectrum(g, 40, {false, 8});
  CHECK(one.values == many.values);
  CHECK(one.sum == many.sum);
}

TEST_CASE("big coefficients take the arbitrary-precision path") {
  const mpz_class huge = mpz_class(1) << 70;
  const PLConcave base({form({1, 0}), form({0, 1})});
  const PLConcave big = base.shifted(Rational(huge));
  const JumpingSpectrum a = jumping_spectrum(orthant_setup(vec({1, 1}), base), 12);
  const JumpingSpectrum b = jumping_spectrum(orthant_setup(vec({1, 1}), big), 12, {false, 3});
  REQUIRE(a.values.size() == b.values.size());
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    CHECK(b.values[i].first == a.values[i].first + Rational(huge));
    CHECK(b.values[i].second == a.values[i].second);
  }
}

TEST_CASE("s_m examples") {
  const GradedSetup g = orthant_setup(vec({1, 1}), u1);
  CHECK(s_m(g, 2) == q(1, 3));
  for (unsigned long m = 1; m <= 20; ++m) CHECK(s_m(g, m) == q(1, 3));
  CHECK(s_m(orthant_setup(vec({1, 1}), PLConcave::zero(2)), 5) == 0);
  CHECK_THROWS_AS(s_m(g, 0), Error);
}

TEST_CASE("T_m and T") {
  const GradedSetup g = orthant_setup(vec({1, 1}), u1);
  for (unsigned long m = 1; m <= 10; ++m) CHECK(t_m(g, m) == 1);
  CHECK(big_t_estimate(g, 10) == 1);
  CHECK(big_t_exact(g) == 1);
  CHECK(big_t_exact(orthant_setup(vec({1, 1}), PLConcave::zero(2))) == 0);

  const GradedSetup h = orthant_setup(vec({1, 1}), min12);
  CHECK(big_t_exact(h) == q(1, 2));
  // Dense grid search over Q.
  Rational grid_max = 0;
  const long k = 60;
  for (long a = 0; a <= k; ++a)
    for (long b = 0; a + b <= k; ++b) grid_max = max(grid_max, min12(RationalVector{q(a, k), q(b, k)}));
  CHECK(grid_max == big_t_exact(h));
  CHECK(big_t_estimate(h, 12) <= big_t_exact(h));
  CHECK(t_m(h, 12) == q(1, 2));
}

TEST_CASE("m T_m is superadditive") {
  // Needs a multiplicative filtration, i.e. superadditive psi: homogeneous
  // branches. Positive constants break psi(u + v) >= psi(u) + psi(v).
  const std::vector<GradedSetup> setups{
      GradedSetup(dual_cone(a1_cone()), vec({2, 1}), PLConcave({form({1, 1}), form({1, 2})})),
      orthant_setup(vec({3, 2}), PLConcave({AffineForm{RationalVector{q(2, 3), q(1, 5)}, 0}, form({0, 1})})),
  };
  for (const auto& g : setups) {
    std::vector<Rational> mt(13);
    for (unsigned long m = 1; m <= 12; ++m) mt[m] = jumping_spectrum(g, m).max_value();
    for (unsigned long a = 1; a <= 6; ++a)
      for (unsigned long b = a; a + b <= 12; ++b) CHECK(mt[a] + mt[b] <= mt[a + b]);
  }
}

TEST_CASE("constant shift moves every jumping number") {
  const GradedSetup g = orthant_setup(vec({1, 2}), min12);
  const Rational c = q(5, 3);
  const GradedSetup gc = orthant_setup(vec({1, 2}), min12.shifted(c));
  for (unsigned long m : {3ul, 10ul}) {
    const JumpingSpectrum a = jumping_spectrum(g, m), b = jumping_spectrum(gc, m);
    REQUIRE(a.values.size() == b.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(b.values[i].first == a.values[i].first + c);
    CHECK(s_m(b) == s_m(a) + c / Rational(static_cast<long>(m)));
  }
}

TEST_CASE("ceiling mode") {
  const GradedSetup g = orthant_setup(vec({1, 1}), PLConcave::linear(RationalVector{q(1, 2), q(0)}));
  const JumpingSpectrum s = jumping_spectrum(g, 2, {true, 1});
  // u1 / 2 over {0,0,0,1/2,1/2,1} rounds up to {0,0,0,1,1,1}.
  CHECK(s.expanded() == std::vector<Rational>{0, 0, 0, 1, 1, 1});
}

TEST_CASE("mu_m CDF") {
  const GradedSetup g = orthant_setup(vec({1, 1}), u1);
  const auto cdf = mu_m_cdf(g, 100);
  CHECK(cdf.back().mass == q(5151, 10000));
  CHECK(cdf.front().t == 0);
  CHECK(cdf.back().t == 1);

  const auto flat = mu_m_cdf(orthant_setup(vec({1, 1}), PLConcave::zero(2)), 10);
  REQUIRE(flat.size() == 1);
  CHECK(flat[0].t == 0);
  CHECK(flat[0].mass == q(66, 100));
}

TEST_CASE("mu_m approaches mu") {
  for (const PLConcave& psi : {u1, min12}) {
    const GradedSetup g = orthant_setup(vec({1, 2}), psi);
    const SuperlevelProfile prof = superlevel_profile(psi.homogenized(), g.slice().q);
    Rational last = -1;
    for (unsigned long m : {10ul, 50ul, 200ul}) {
      const Rational d = cdf_sup_distance(mu_m_cdf(g, m), prof);
      if (last.sign() >= 0) CHECK(d < last);
      last = d;
    }
  }
}

TEST_CASE("cdf distance on a hand example") {
  // f = u1 on the standard triangle: G(t) = 1/2 - (1-t)^2/2 on [0,1].
  const SuperlevelProfile prof = superlevel_profile(u1, standard_simplex(2));
  // One atom of mass 1/2 at t = 1/2: distance max(G(1/2), 1/2 - G(1/2)) = 3/8.
  CHECK(cdf_sup_distance({CdfStep{q(1, 2), q(1, 2)}}, prof) == q(3, 8));
  // Atom at 0 with the right mass: distance sup_t (1/2 - G(t)) = 1/2 at 0+.
  CHECK(cdf_sup_distance({CdfStep{q(0), q(1, 2)}}, prof) == q(1, 2));
}

TEST_CASE("graded S-tilde") {
  const GradedSetup g = orthant_setup(vec({1, 1}), u1);
  for (unsigned long t = 1; t <= 20; ++t) {
    CHECK(graded_s_tilde(g, t) == q(1, 2));
    CHECK(degree_sum(g, t).count == t + 1);
  }
  CHECK(graded_s_tilde(orthant_setup(vec({1, 1}), PLConcave::zero(2)), 4) == 0);
  CHECK(q(2, 3) * graded_s_tilde(g, 9) == s_m(g, 9));

  try {
    graded_s_tilde(orthant_setup(RationalVector{q(1, 2), q(1)}, u1), 3);
    FAIL("expected a quasi-regular error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::QuasiRegularRequired);
  }
  try {
    graded_s_tilde(orthant_setup(vec({2, 2}), u1), 3);
    FAIL("expected an empty-degree error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyDegree);
  }
  CHECK(graded_s_tilde(orthant_setup(vec({2, 2}), u1), 4) == q(1, 4));
}

TEST_CASE("per-degree points match brute force") {
  const GradedSetup g = GradedSetup(dual_cone(a1_cone()), vec({2, 1}), PLConcave({form({1, 1}, 1), form({1, 2})}));
  for (long t : {1L, 4L, 9L}) {
    Rational sum = 0;
    long count = 0;
    for (const auto& u : brute_force_points(g.slice().q, t)) {
      if (dot(u, g.xi()) != Rational(t)) continue;
      ++count;
      sum += g.psi()(u);
    }
    const DegreeSum d = degree_sum(g, static_cast<unsigned long>(t));
    CHECK(d.count == count);
    CHECK(d.sum == sum);
  }
}

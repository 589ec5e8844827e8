#pragma once

// Recursive coordinate slicing over m * p. Internal to the library; shared by
// polytope counting and the jumping-number builders.

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <type_traits>
#include <vector>

#include "reebvol/polyhedra.hpp"

namespace reebvol::detail {

/// a . (y_0 .. y_k) <= bound, with a[k] != 0.
struct SliceConstraint {
  std::vector<mpz_class> a;
  mpz_class bound;
};

/// Dependent coordinate x_c = (constant + sum_j coef[j] y_j) / den.
struct Lift {
  std::size_t coordinate;
  mpz_class constant;
  std::vector<mpz_class> coef;
  mpz_class den;
};

struct LatticePlan {
  std::size_t rank = 0;
  bool empty = true;
  std::vector<std::size_t> free;                     // enumerated coordinates
  std::vector<std::vector<SliceConstraint>> levels;  // one per free coordinate
  std::vector<Lift> lifts;                           // remaining coordinates
  bool fits_int64 = false;
};

LatticePlan make_plan(const Polytope& p, unsigned long m);

inline long long to_ll(const mpz_class& x) { return x.get_si(); }
inline void assign(long long& dst, const mpz_class& src) { dst = src.get_si(); }
inline void assign(mpz_class& dst, const mpz_class& src) { dst = src; }

inline long long floor_div(long long a, long long b) {
  long long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}
inline long long ceil_div(long long a, long long b) { return -floor_div(-a, b); }
inline mpz_class floor_div(const mpz_class& a, const mpz_class& b) {
  mpz_class q;
  mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}
inline mpz_class ceil_div(const mpz_class& a, const mpz_class& b) {
  mpz_class q;
  mpz_cdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

/// Plan coefficients converted once to the working integer type.
template <class Int>
struct TypedPlan {
  struct Constraint {
    std::vector<Int> a;
    Int bound;
  };
  struct TypedLift {
    std::size_t coordinate;
    Int constant;
    std::vector<Int> coef;
    Int den;
  };
  std::size_t rank = 0;
  std::vector<std::size_t> free;
  std::vector<std::vector<Constraint>> levels;
  std::vector<TypedLift> lifts;

  explicit TypedPlan(const LatticePlan& plan) : rank(plan.rank), free(plan.free) {
    for (const auto& lvl : plan.levels) {
      std::vector<Constraint> cs;
      for (const auto& c : lvl) {
        Constraint t;
        t.a.resize(c.a.size());
        for (std::size_t i = 0; i < c.a.size(); ++i) assign(t.a[i], c.a[i]);
        assign(t.bound, c.bound);
        cs.push_back(std::move(t));
      }
      levels.push_back(std::move(cs));
    }
    for (const auto& l : plan.lifts) {
      TypedLift t;
      t.coordinate = l.coordinate;
      assign(t.constant, l.constant);
      assign(t.den, l.den);
      t.coef.resize(l.coef.size());
      for (std::size_t i = 0; i < l.coef.size(); ++i) assign(t.coef[i], l.coef[i]);
      lifts.push_back(std::move(t));
    }
  }

  /// Integer range of free coordinate k given y_0..y_{k-1}; false if empty.
  bool range(std::size_t k, const std::vector<Int>& y, Int& lo, Int& hi) const {
    bool has_lo = false, has_hi = false;
    for (const auto& c : levels[k]) {
      Int rest = c.bound;
      for (std::size_t i = 0; i < k; ++i) rest -= c.a[i] * y[i];
      if (c.a[k] > 0) {
        Int b = floor_div(rest, c.a[k]);
        if (!has_hi || b < hi) hi = b;
        has_hi = true;
      } else {
        Int b = ceil_div(rest, c.a[k]);
        if (!has_lo || b > lo) lo = b;
        has_lo = true;
      }
    }
    return has_lo && has_hi && lo <= hi;
  }

  /// Writes the full point for free values y; false if some lifted coordinate
  /// is not integral.
  bool lift(const std::vector<Int>& y, std::vector<Int>& x) const {
    for (std::size_t j = 0; j < free.size(); ++j) x[free[j]] = y[j];
    for (const auto& l : lifts) {
      Int acc = l.constant;
      for (std::size_t j = 0; j < y.size(); ++j) acc += l.coef[j] * y[j];
      if (l.den != 1) {
        if (acc % l.den != 0) return false;
        acc /= l.den;
      }
      x[l.coordinate] = acc;
    }
    return true;
  }

  template <class F>
  void visit_rec(std::size_t k, std::vector<Int>& y, std::vector<Int>& x, F& f) const {
    if (k == free.size()) {
      if (lift(y, x)) f(static_cast<const std::vector<Int>&>(x));
      return;
    }
    Int lo{}, hi{};
    if (!range(k, y, lo, hi)) return;
    for (Int v = lo; v <= hi; ++v) {
      y[k] = v;
      visit_rec(k + 1, y, x, f);
    }
  }

  /// Visits points whose first free coordinate lies in [lo0, hi0].
  template <class F>
  void visit(const Int& lo0, const Int& hi0, F&& f) const {
    std::vector<Int> y(free.size()), x(rank);
    if (free.empty()) {
      if (lift(y, x)) f(static_cast<const std::vector<Int>&>(x));
      return;
    }
    Int lo{}, hi{};
    if (!range(0, y, lo, hi)) return;
    if (lo < lo0) lo = lo0;
    if (hi > hi0) hi = hi0;
    for (Int v = lo; v <= hi; ++v) {
      y[0] = v;
      visit_rec(1, y, x, f);
    }
  }

  mpz_class count_rec(std::size_t k, std::vector<Int>& y) const {
    Int lo{}, hi{};
    if (!range(k, y, lo, hi)) return 0;
    if (k + 1 == free.size() && lifts.empty()) {
      mpz_class c;
      if constexpr (std::is_same_v<Int, long long>) {
        c = static_cast<long>(hi - lo + 1);
      } else {
        c = hi - lo + 1;
      }
      return c;
    }
    mpz_class total = 0;
    for (Int v = lo; v <= hi; ++v) {
      y[k] = v;
      if (k + 1 == free.size()) {
        std::vector<Int> x(rank);
        if (lift(y, x)) total += 1;
      } else {
        total += count_rec(k + 1, y);
      }
    }
    return total;
  }

  mpz_class count(const Int& lo0, const Int& hi0) const {
    std::vector<Int> y(free.size());
    if (free.empty()) {
      std::vector<Int> x(rank);
      return lift(y, x) ? 1 : 0;
    }
    Int lo{}, hi{};
    if (!range(0, y, lo, hi)) return 0;
    if (lo < lo0) lo = lo0;
    if (hi > hi0) hi = hi0;
    mpz_class total = 0;
    for (Int v = lo; v <= hi; ++v) {
      y[0] = v;
      if (free.size() == 1) {
        std::vector<Int> x(rank);
        if (lift(y, x)) total += 1;
      } else {
        total += count_rec(1, y);
      }
    }
    return total;
  }

  /// Outer range split into `parts` contiguous chunks (possibly fewer).
  std::vector<std::pair<Int, Int>> chunks(unsigned parts) const {
    std::vector<std::pair<Int, Int>> out;
    std::vector<Int> y(free.size());
    Int lo{}, hi{};
    if (free.empty()) {
      out.emplace_back(Int(0), Int(0));
      return out;
    }
    if (!range(0, y, lo, hi)) return out;
    Int width = hi - lo + 1;
    Int p = static_cast<long>(std::max(1u, parts));
    if (p > width) p = width;
    for (Int i = 0; i < p; ++i) {
      Int a = lo + (width * i) / p;
      Int b = lo + (width * (i + 1)) / p - 1;
      out.emplace_back(a, b);
    }
    return out;
  }
};

/// Runs `body(worker, lo, hi)` for each chunk on its own thread.
template <class Int, class Body>
void run_chunks(const std::vector<std::pair<Int, Int>>& chunks, Body&& body) {
  if (chunks.size() <= 1) {
    for (std::size_t i = 0; i < chunks.size(); ++i) body(static_cast<unsigned>(i), chunks[i].first, chunks[i].second);
    return;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> failures(chunks.size());
  threads.reserve(chunks.size());
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    threads.emplace_back([&, i] {
      try {
        body(static_cast<unsigned>(i), chunks[i].first, chunks[i].second);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& f : failures)
    if (f) std::rethrow_exception(f);
}

}  // namespace reebvol::detail

#include <algorithm>
#include <cstdint>

#include "reebvol/error.hpp"
#include "reebvol/polyhedra.hpp"

namespace reebvol {
namespace {

using IntVec = std::vector<mpz_class>;

class Bits {
 public:
  explicit Bits(std::size_t n = 0) : words_((n + 63) / 64, 0) {}
  void set(std::size_t i) { words_[i / 64] |= (std::uint64_t{1} << (i % 64)); }
  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(__builtin_popcountll(w));
    return c;
  }
  Bits operator&(const Bits& o) const {
    Bits r;
    r.words_.resize(words_.size());
    for (std::size_t i = 0; i < words_.size(); ++i) r.words_[i] = words_[i] & o.words_[i];
    return r;
  }
  bool contains(const Bits& o) const {
    for (std::size_t i = 0; i < words_.size(); ++i)
      if ((o.words_[i] & ~words_[i]) != 0) return false;
    return true;
  }

 private:
  std::vector<std::uint64_t> words_;
};

struct Ray {
  IntVec v;
  Bits zeros;
};

IntVec to_primitive_ints(const RationalVector& r) {
  const RationalVector p = primitive(r);
  IntVec out;
  out.reserve(p.rank());
  for (const auto& x : p) out.push_back(x.num());
  return out;
}

mpz_class idot(const IntVec& a, const IntVec& b) {
  mpz_class acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

void make_primitive(IntVec& v) {
  mpz_class g = 0;
  for (const auto& x : v) g = gcd(g, x);
  if (g > 1)
    for (auto& x : v) mpz_divexact(x.get_mpz_t(), x.get_mpz_t(), g.get_mpz_t());
}

}  // namespace

std::vector<RationalVector> extreme_rays(const std::vector<RationalVector>& constraints,
                                         std::size_t dim) {
  std::vector<IntVec> rows;
  for (const auto& c : constraints) {
    if (c.rank() != dim) throw Error(ErrorCode::Dimension, "constraint rank mismatch");
    if (c.is_zero()) continue;
    IntVec r = to_primitive_ints(c);
    if (std::find(rows.begin(), rows.end(), r) == rows.end()) rows.push_back(std::move(r));
  }

  // Greedy initial basis in input order.
  std::vector<std::size_t> basis;
  std::vector<RationalVector> basis_rows;
  for (std::size_t i = 0; i < rows.size() && basis.size() < dim; ++i) {
    RationalVector rv(dim);
    for (std::size_t j = 0; j < dim; ++j) rv[j] = Rational(rows[i][j]);
    basis_rows.push_back(rv);
    if (rank(basis_rows) == basis_rows.size()) {
      basis.push_back(i);
    } else {
      basis_rows.pop_back();
    }
  }
  if (basis.size() < dim) {
    throw Error(ErrorCode::UnsupportedGeometry,
                "cone is not pointed (constraint rank " + std::to_string(basis.size()) +
                    " < " + std::to_string(dim) + ")");
  }

  const std::size_t total = rows.size();
  const RationalMatrix b(basis_rows);
  std::vector<Ray> rays;
  for (std::size_t j = 0; j < dim; ++j) {
    Ray r{to_primitive_ints(solve(b, RationalVector::unit(dim, j))), Bits(total)};
    for (std::size_t i = 0; i < dim; ++i)
      if (i != j) r.zeros.set(basis[i]);
    rays.push_back(std::move(r));
  }

  std::vector<bool> in_basis(total, false);
  for (auto i : basis) in_basis[i] = true;

  for (std::size_t ci = 0; ci < total; ++ci) {
    if (in_basis[ci]) continue;
    const IntVec& a = rows[ci];
    std::vector<mpz_class> val(rays.size());
    std::vector<std::size_t> pos, neg;
    std::vector<Ray> next;
    for (std::size_t k = 0; k < rays.size(); ++k) {
      val[k] = idot(a, rays[k].v);
      if (val[k] > 0) {
        pos.push_back(k);
      } else if (val[k] < 0) {
        neg.push_back(k);
      }
    }
    if (neg.empty()) {
      for (std::size_t k = 0; k < rays.size(); ++k)
        if (val[k] == 0) rays[k].zeros.set(ci);
      continue;
    }
    for (std::size_t k = 0; k < rays.size(); ++k) {
      if (val[k] >= 0) {
        Ray r = rays[k];
        if (val[k] == 0) r.zeros.set(ci);
        next.push_back(std::move(r));
      }
    }
    for (auto p : pos) {
      for (auto q : neg) {
        const Bits common = rays[p].zeros & rays[q].zeros;
        if (common.count() + 2 < dim) continue;
        bool adjacent = true;
        for (std::size_t k = 0; k < rays.size() && adjacent; ++k) {
          if (k == p || k == q) continue;
          if (rays[k].zeros.contains(common)) adjacent = false;
        }
        if (!adjacent) continue;
        IntVec v(dim);
        for (std::size_t j = 0; j < dim; ++j) v[j] = val[p] * rays[q].v[j] - val[q] * rays[p].v[j];
        make_primitive(v);
        Bits z = common;
        z.set(ci);
        next.push_back(Ray{std::move(v), std::move(z)});
      }
    }
    rays = std::move(next);
  }

  std::vector<RationalVector> out;
  out.reserve(rays.size());
  for (const auto& r : rays) {
    RationalVector v(dim);
    for (std::size_t j = 0; j < dim; ++j) v[j] = Rational(r.v[j]);
    out.push_back(std::move(v));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace reebvol

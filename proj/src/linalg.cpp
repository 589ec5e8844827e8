#include "reebvol/linalg.hpp"

#include <utility>

#include "reebvol/error.hpp"

namespace reebvol {

RationalVector RationalVector::unit(std::size_t rank, std::size_t axis) {
  RationalVector v(rank);
  v[axis] = 1;
  return v;
}

bool RationalVector::is_zero() const {
  for (const auto& x : entries_) {
    if (!x.is_zero()) return false;
  }
  return true;
}

bool RationalVector::is_integral() const {
  for (const auto& x : entries_) {
    if (!x.is_integer()) return false;
  }
  return true;
}

static void require_same_rank(const RationalVector& a, const RationalVector& b) {
  if (a.rank() != b.rank()) {
    throw Error(ErrorCode::Dimension, "rank mismatch: " + std::to_string(a.rank()) + " vs " +
                                          std::to_string(b.rank()));
  }
}

RationalVector& RationalVector::operator+=(const RationalVector& o) {
  require_same_rank(*this, o);
  for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] += o.entries_[i];
  return *this;
}

RationalVector& RationalVector::operator-=(const RationalVector& o) {
  require_same_rank(*this, o);
  for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] -= o.entries_[i];
  return *this;
}

RationalVector& RationalVector::operator*=(const Rational& s) {
  for (auto& x : entries_) x *= s;
  return *this;
}

std::string RationalVector::str() const {
  std::string out = "(";
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (i) out += ",";
    out += entries_[i].str();
  }
  return out + ")";
}

Rational dot(const RationalVector& a, const RationalVector& b) {
  require_same_rank(a, b);
  mpq_class acc;
  for (std::size_t i = 0; i < a.rank(); ++i) acc += a[i].raw() * b[i].raw();
  return Rational(acc);
}

RationalVector primitive(const RationalVector& v) {
  if (v.is_zero()) return v;
  mpz_class l = 1;
  for (const auto& x : v) l = lcm(l, x.den());
  mpz_class g = 0;
  std::vector<mpz_class> ints;
  ints.reserve(v.rank());
  for (const auto& x : v) {
    ints.push_back(x.num() * (l / x.den()));
    g = gcd(g, ints.back());
  }
  RationalVector out(v.rank());
  for (std::size_t i = 0; i < v.rank(); ++i) out[i] = Rational(mpz_class(ints[i] / g));
  return out;
}

RationalMatrix::RationalMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows, RationalVector(cols)), cols_(cols) {}

RationalMatrix::RationalMatrix(std::initializer_list<RationalVector> rows)
    : RationalMatrix(std::vector<RationalVector>(rows)) {}

RationalMatrix::RationalMatrix(std::vector<RationalVector> rows) : rows_(std::move(rows)) {
  cols_ = rows_.empty() ? 0 : rows_.front().rank();
  for (const auto& r : rows_) {
    if (r.rank() != cols_) throw Error(ErrorCode::Dimension, "ragged matrix rows");
  }
}

RationalMatrix RationalMatrix::identity(std::size_t n) {
  RationalMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

RationalMatrix RationalMatrix::transposed() const {
  RationalMatrix t(cols_, rows());
  for (std::size_t i = 0; i < rows(); ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = rows_[i][j];
  return t;
}

RationalVector RationalMatrix::operator*(const RationalVector& x) const {
  if (x.rank() != cols_) throw Error(ErrorCode::Dimension, "matrix-vector rank mismatch");
  RationalVector y(rows());
  for (std::size_t i = 0; i < rows(); ++i) y[i] = dot(rows_[i], x);
  return y;
}

RationalMatrix RationalMatrix::operator*(const RationalMatrix& o) const {
  if (o.rows() != cols_) throw Error(ErrorCode::Dimension, "matrix product rank mismatch");
  RationalMatrix ot = o.transposed();
  RationalMatrix r(rows(), o.cols());
  for (std::size_t i = 0; i < rows(); ++i)
    for (std::size_t j = 0; j < o.cols(); ++j) r(i, j) = dot(rows_[i], ot.row(j));
  return r;
}

namespace {

using IntRow = std::vector<mpz_class>;

/// Clears denominators row by row; `scale` accumulates the product of the
/// row multipliers so that det(original) = det(integer) / scale.
std::vector<IntRow> integer_rows(const std::vector<RationalVector>& rows, mpz_class& scale) {
  std::vector<IntRow> out;
  out.reserve(rows.size());
  scale = 1;
  for (const auto& r : rows) {
    mpz_class l = 1;
    for (const auto& x : r) l = lcm(l, x.den());
    IntRow ir;
    ir.reserve(r.rank());
    for (const auto& x : r) ir.push_back(x.num() * (l / x.den()));
    scale *= l;
    out.push_back(std::move(ir));
  }
  return out;
}

/// Bareiss elimination in place on an n x (n + extra) integer matrix.
/// Returns the determinant sign flips via `swaps`; false if singular.
bool bareiss(std::vector<IntRow>& a, std::size_t n, int& swaps) {
  mpz_class prev = 1;
  swaps = 0;
  const std::size_t width = a.empty() ? 0 : a[0].size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    while (p < n && a[p][k] == 0) ++p;
    if (p == n) return false;
    if (p != k) {
      std::swap(a[p], a[k]);
      ++swaps;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < width; ++j) {
        a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]);
        mpz_divexact(a[i][j].get_mpz_t(), a[i][j].get_mpz_t(), prev.get_mpz_t());
      }
      a[i][k] = 0;
    }
    prev = a[k][k];
  }
  return true;
}

}  // namespace

Rational det(const RationalMatrix& m) {
  if (!m.is_square()) {
    throw Error(ErrorCode::Dimension, "det of non-square " + std::to_string(m.rows()) + "x" +
                                          std::to_string(m.cols()) + " matrix");
  }
  const std::size_t n = m.rows();
  if (n == 0) return 1;
  mpz_class scale;
  auto a = integer_rows(m.row_vectors(), scale);
  int swaps = 0;
  if (!bareiss(a, n, swaps)) return 0;
  mpz_class d = a[n - 1][n - 1];
  if (swaps % 2) d = -d;
  return Rational(d, scale);
}

RationalVector solve(const RationalMatrix& a, const RationalVector& b) {
  if (!a.is_square() || b.rank() != a.rows()) {
    throw Error(ErrorCode::Dimension, "solve needs a square system of matching rank");
  }
  const std::size_t n = a.rows();
  std::vector<RationalVector> aug;
  aug.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Rational> r(a.row(i).entries());
    r.push_back(b[i]);
    aug.emplace_back(std::move(r));
  }
  mpz_class scale;
  auto m = integer_rows(aug, scale);
  int swaps = 0;
  if (!bareiss(m, n, swaps)) throw Error(ErrorCode::SingularSystem, "singular system");
  // Back substitution on the upper-triangular integer system.
  RationalVector x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    Rational acc(m[ii][n]);
    for (std::size_t j = ii + 1; j < n; ++j) acc -= Rational(m[ii][j]) * x[j];
    x[ii] = acc / Rational(m[ii][ii]);
  }
  return x;
}

RationalMatrix inverse(const RationalMatrix& a) {
  if (!a.is_square()) throw Error(ErrorCode::Dimension, "inverse of non-square matrix");
  const std::size_t n = a.rows();
  RationalMatrix cols(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const RationalVector c = solve(a, RationalVector::unit(n, j));
    for (std::size_t i = 0; i < n; ++i) cols(i, j) = c[i];
  }
  return cols;
}

std::vector<RationalVector> rref(std::vector<RationalVector> rows, std::vector<std::size_t>& pivots) {
  pivots.clear();
  if (rows.empty()) return rows;
  const std::size_t cols = rows.front().rank();
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows.size(); ++c) {
    std::size_t p = r;
    while (p < rows.size() && rows[p][c].is_zero()) ++p;
    if (p == rows.size()) continue;
    std::swap(rows[p], rows[r]);
    const Rational inv = rows[r][c].inverse();
    rows[r] *= inv;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i == r || rows[i][c].is_zero()) continue;
      const Rational f = rows[i][c];
      for (std::size_t j = c; j < cols; ++j) rows[i][j] -= f * rows[r][j];
    }
    pivots.push_back(c);
    ++r;
  }
  rows.resize(r);
  return rows;
}

std::size_t rank(const std::vector<RationalVector>& rows) {
  std::vector<std::size_t> pivots;
  return rref(rows, pivots).size();
}

std::vector<RationalVector> nullspace(const std::vector<RationalVector>& rows, std::size_t dim) {
  std::vector<std::size_t> pivots;
  const auto r = rref(rows, pivots);
  std::vector<bool> is_pivot(dim, false);
  for (auto p : pivots) is_pivot[p] = true;
  std::vector<RationalVector> basis;
  for (std::size_t f = 0; f < dim; ++f) {
    if (is_pivot[f]) continue;
    RationalVector v(dim);
    v[f] = 1;
    for (std::size_t i = 0; i < r.size(); ++i) v[pivots[i]] = -r[i][f];
    basis.push_back(primitive(v));
  }
  return basis;
}

}  // namespace reebvol

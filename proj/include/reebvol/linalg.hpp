#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "reebvol/rational.hpp"

namespace reebvol {

/// Point of N_R or M_R with exact coordinates.
class RationalVector {
 public:
  RationalVector() = default;
  explicit RationalVector(std::size_t rank) : entries_(rank) {}
  RationalVector(std::initializer_list<Rational> values) : entries_(values) {}
  explicit RationalVector(std::vector<Rational> values) : entries_(std::move(values)) {}

  static RationalVector unit(std::size_t rank, std::size_t axis);

  std::size_t rank() const { return entries_.size(); }
  const Rational& operator[](std::size_t i) const { return entries_[i]; }
  Rational& operator[](std::size_t i) { return entries_[i]; }
  const std::vector<Rational>& entries() const { return entries_; }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  bool is_zero() const;
  bool is_integral() const;

  RationalVector& operator+=(const RationalVector& o);
  RationalVector& operator-=(const RationalVector& o);
  RationalVector& operator*=(const Rational& s);

  friend RationalVector operator+(RationalVector a, const RationalVector& b) { return a += b; }
  friend RationalVector operator-(RationalVector a, const RationalVector& b) { return a -= b; }
  friend RationalVector operator*(RationalVector a, const Rational& s) { return a *= s; }
  friend RationalVector operator*(const Rational& s, RationalVector a) { return a *= s; }
  friend RationalVector operator-(RationalVector a) { return a *= Rational(-1); }

  friend bool operator==(const RationalVector&, const RationalVector&) = default;
  /// Lexicographic order on coordinates.
  friend bool operator<(const RationalVector& a, const RationalVector& b) {
    return a.entries_ < b.entries_;
  }

  std::string str() const;

 private:
  std::vector<Rational> entries_;
};

Rational dot(const RationalVector& a, const RationalVector& b);

/// Smallest positive multiple with coprime integer entries. Zero stays zero.
RationalVector primitive(const RationalVector& v);

class RationalMatrix {
 public:
  RationalMatrix() = default;
  RationalMatrix(std::size_t rows, std::size_t cols);
  RationalMatrix(std::initializer_list<RationalVector> rows);
  explicit RationalMatrix(std::vector<RationalVector> rows);

  static RationalMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_.size(); }
  std::size_t cols() const { return cols_; }
  bool is_square() const { return rows() == cols_; }

  const RationalVector& row(std::size_t i) const { return rows_[i]; }
  const Rational& operator()(std::size_t i, std::size_t j) const { return rows_[i][j]; }
  Rational& operator()(std::size_t i, std::size_t j) { return rows_[i][j]; }
  const std::vector<RationalVector>& row_vectors() const { return rows_; }

  RationalMatrix transposed() const;
  RationalVector operator*(const RationalVector& x) const;
  RationalMatrix operator*(const RationalMatrix& o) const;

  friend bool operator==(const RationalMatrix&, const RationalMatrix&) = default;

 private:
  std::vector<RationalVector> rows_;
  std::size_t cols_ = 0;
};

/// Exact determinant by fraction-free elimination. Throws Error(Dimension)
/// for non-square input.
Rational det(const RationalMatrix& m);

/// Exact x with A x = b. Throws Error(SingularSystem) when det(A) = 0.
RationalVector solve(const RationalMatrix& a, const RationalVector& b);

RationalMatrix inverse(const RationalMatrix& a);

/// Row rank.
std::size_t rank(const std::vector<RationalVector>& rows);

/// Reduced row echelon form; `pivots` receives the pivot column of each
/// nonzero row, left to right.
std::vector<RationalVector> rref(std::vector<RationalVector> rows, std::vector<std::size_t>& pivots);

/// Basis of {x : r . x = 0 for all rows r} in `dim` coordinates.
std::vector<RationalVector> nullspace(const std::vector<RationalVector>& rows, std::size_t dim);

}  // namespace reebvol

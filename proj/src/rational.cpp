#include "reebvol/rational.hpp"

#include <ostream>

#include "reebvol/error.hpp"

namespace reebvol {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Dimension: return "dimension";
    case ErrorCode::SingularSystem: return "singular-system";
    case ErrorCode::UnsupportedGeometry: return "unsupported-geometry";
    case ErrorCode::NotReebField: return "not-a-reeb-field";
    case ErrorCode::InvalidBasis: return "invalid-basis";
    case ErrorCode::DegeneratePolytope: return "degenerate-polytope";
    case ErrorCode::InvalidFiltration: return "invalid-filtration";
    case ErrorCode::UnsupportedDegree: return "unsupported-degree";
    case ErrorCode::QuasiRegularRequired: return "quasi-regular-required";
    case ErrorCode::EmptyDegree: return "empty-degree";
    case ErrorCode::InvalidDirection: return "invalid-direction";
    case ErrorCode::Parse: return "parse";
  }
  return "unknown";
}

Rational::Rational(const mpz_class& num, const mpz_class& den) : q_(num, den) {
  if (den == 0) throw Error(ErrorCode::Dimension, "rational with zero denominator");
  q_.canonicalize();
}

namespace {

bool parse_integer(std::string_view s, mpz_class& out) {
  if (s.empty()) return false;
  std::size_t start = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (start == s.size()) return false;
  for (std::size_t i = start; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  std::string digits(s.substr(s[0] == '+' ? 1 : 0));
  return out.set_str(digits, 10) == 0;
}

}  // namespace

Rational Rational::parse(std::string_view text) {
  const auto slash = text.find('/');
  mpz_class num, den = 1;
  const std::string_view num_part = text.substr(0, slash);
  bool ok = parse_integer(num_part, num);
  if (ok && slash != std::string_view::npos) {
    const std::string_view den_part = text.substr(slash + 1);
    ok = !den_part.empty() && den_part[0] != '-' && den_part[0] != '+' &&
         parse_integer(den_part, den) && den != 0;
  }
  if (!ok) {
    throw Error(ErrorCode::Parse, "not a rational: \"" + std::string(text) + "\"");
  }
  return Rational(num, den);
}

mpz_class Rational::floor() const {
  mpz_class r;
  mpz_fdiv_q(r.get_mpz_t(), q_.get_num_mpz_t(), q_.get_den_mpz_t());
  return r;
}

mpz_class Rational::ceil() const {
  mpz_class r;
  mpz_cdiv_q(r.get_mpz_t(), q_.get_num_mpz_t(), q_.get_den_mpz_t());
  return r;
}

Rational Rational::inverse() const {
  if (is_zero()) throw Error(ErrorCode::SingularSystem, "division by zero");
  return Rational(mpq_class(1 / q_));
}

Rational& Rational::operator/=(const Rational& o) {
  if (o.is_zero()) throw Error(ErrorCode::SingularSystem, "division by zero");
  q_ /= o.q_;
  return *this;
}

std::string Rational::str() const {
  if (is_integer()) return q_.get_num().get_str();
  return q_.get_num().get_str() + "/" + q_.get_den().get_str();
}

std::string Rational::decimal(int digits) const {
  if (digits < 0) digits = 0;
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(digits));
  const mpq_class scaled = ::abs(q_) * scale + mpq_class(1, 2);
  mpz_class rounded;
  mpz_fdiv_q(rounded.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
  std::string body = rounded.get_str();
  if (digits > 0) {
    if (body.size() <= static_cast<std::size_t>(digits)) {
      body.insert(0, static_cast<std::size_t>(digits) + 1 - body.size(), '0');
    }
    body.insert(body.size() - static_cast<std::size_t>(digits), ".");
  }
  const bool negative = sign() < 0 && rounded != 0;
  return negative ? "-" + body : body;
}

Rational min(const Rational& a, const Rational& b) { return b < a ? b : a; }
Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }

Rational pow(const Rational& base, unsigned exponent) {
  Rational r = 1;
  for (unsigned i = 0; i < exponent; ++i) r *= base;
  return r;
}

mpz_class factorial(unsigned n) {
  mpz_class r;
  mpz_fac_ui(r.get_mpz_t(), n);
  return r;
}

std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

}  // namespace reebvol

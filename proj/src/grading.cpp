#include "reebvol/grading.hpp"

#include <algorithm>
#include <map>

#include "lattice_plan.hpp"
#include "reebvol/error.hpp"

namespace reebvol {

GradedSetup::GradedSetup(Cone dual, RationalVector xi, PLConcave psi)
    : dual_(std::move(dual)), xi_(std::move(xi)), psi_(std::move(psi)) {
  if (xi_.rank() != dual_.rank()) throw Error(ErrorCode::Dimension, "xi has the wrong rank", "xi");
  if (psi_.rank() != dual_.rank()) throw Error(ErrorCode::Dimension, "filtration has the wrong rank", "filtration");
  slice_ = reeb_slice(dual_, xi_);
  validate_filtration(psi_, dual_, slice_.q);
}

std::vector<Rational> JumpingSpectrum::expanded() const {
  std::vector<Rational> out;
  for (const auto& [v, mult] : values)
    for (mpz_class i = 0; i < mult; ++i) out.push_back(v);
  return out;
}

namespace {

/// psi scaled by a common denominator so that lattice points give integers.
struct ScaledForms {
  std::vector<std::vector<mpz_class>> a;
  std::vector<mpz_class> c;
  mpz_class den = 1;
  bool clamp = false;

  explicit ScaledForms(const PLConcave& psi) : clamp(psi.clamped()) {
    const auto forms = psi.distinct_branches();
    for (const auto& f : forms) {
      den = lcm(den, f.constant.den());
      for (const auto& x : f.linear) den = lcm(den, x.den());
    }
    for (const auto& f : forms) {
      std::vector<mpz_class> row;
      for (const auto& x : f.linear) row.push_back((x * Rational(den)).num());
      a.push_back(std::move(row));
      c.push_back((f.constant * Rational(den)).num());
    }
  }

  /// Largest |value| over points whose coordinates are bounded by `coord`.
  mpz_class bound(const mpz_class& coord) const {
    mpz_class best = 0;
    for (std::size_t b = 0; b < a.size(); ++b) {
      mpz_class s = ::abs(c[b]);
      for (const auto& x : a[b]) s += ::abs(x) * coord;
      best = std::max(best, s);
    }
    return best;
  }
};

template <class Int>
struct TypedForms {
  std::vector<std::vector<Int>> a;
  std::vector<Int> c;
  bool clamp;

  explicit TypedForms(const ScaledForms& s) : clamp(s.clamp) {
    for (std::size_t b = 0; b < s.a.size(); ++b) {
      std::vector<Int> row(s.a[b].size());
      for (std::size_t j = 0; j < row.size(); ++j) detail::assign(row[j], s.a[b][j]);
      a.push_back(std::move(row));
      Int cc{};
      detail::assign(cc, s.c[b]);
      c.push_back(cc);
    }
  }

  Int operator()(const std::vector<Int>& x) const {
    Int best{};
    for (std::size_t b = 0; b < a.size(); ++b) {
      Int acc = c[b];
      for (std::size_t j = 0; j < x.size(); ++j) acc += a[b][j] * x[j];
      if (b == 0 || acc < best) best = acc;
    }
    if (clamp && best < 0) best = 0;
    return best;
  }
};

mpz_class as_mpz(long long v) { return mpz_class(static_cast<long>(v)); }
const mpz_class& as_mpz(const mpz_class& v) { return v; }

using Tally = std::map<mpz_class, mpz_class>;

template <class Int>
Tally tally_with(const detail::LatticePlan& plan, const ScaledForms& scaled, unsigned jobs) {
  const detail::TypedPlan<Int> typed(plan);
  const TypedForms<Int> forms(scaled);
  const auto chunks = typed.chunks(jobs);
  std::vector<std::map<Int, unsigned long long>> partial(chunks.size());
  detail::run_chunks(chunks, [&](unsigned w, const Int& lo, const Int& hi) {
    auto& local = partial[w];
    typed.visit(lo, hi, [&](const std::vector<Int>& x) { ++local[forms(x)]; });
  });
  Tally out;
  for (const auto& part : partial)
    for (const auto& [k, v] : part) out[as_mpz(k)] += mpz_class(static_cast<unsigned long>(v));
  return out;
}

/// Values of psi (times den) over the lattice points of m p, with counts.
Tally tally(const Polytope& p, unsigned long m, const ScaledForms& scaled, unsigned jobs) {
  const detail::LatticePlan plan = detail::make_plan(p, m);
  if (plan.empty) return {};
  mpz_class coord = 0;
  for (const auto& v : p.vertices())
    for (const auto& x : v) coord = std::max(coord, mpz_class((x * Rational(static_cast<long>(m))).abs().ceil() + 1));
  const mpz_class limit = mpz_class(1) << 60;
  if (plan.fits_int64 && scaled.bound(coord) < limit) return tally_with<long long>(plan, scaled, jobs);
  return tally_with<mpz_class>(plan, scaled, std::max(1u, jobs));
}

std::vector<std::pair<Rational, mpz_class>> to_values(const Tally& t, const mpz_class& den, bool ceiling) {
  std::vector<std::pair<Rational, mpz_class>> out;
  for (const auto& [key, mult] : t) {
    Rational v(key, den);
    if (ceiling) v = Rational(v.ceil());
    if (!out.empty() && out.back().first == v) {
      out.back().second += mult;
    } else {
      out.emplace_back(v, mult);
    }
  }
  return out;
}

void require_positive(unsigned long m, const char* what) {
  if (m == 0) throw Error(ErrorCode::Dimension, std::string(what) + " must be positive");
}

}  // namespace

JumpingSpectrum jumping_spectrum(const GradedSetup& g, unsigned long m, const GradingOptions& opts) {
  const ScaledForms scaled(g.psi());
  JumpingSpectrum spec;
  spec.m = m;
  spec.values = to_values(tally(g.slice().q, m, scaled, opts.jobs), scaled.den, opts.ceiling);
  for (const auto& [v, mult] : spec.values) {
    spec.count += mult;
    spec.sum += v * Rational(mult);
  }
  return spec;
}

Rational s_m(const JumpingSpectrum& spec) {
  require_positive(spec.m, "level m");
  return spec.sum / (Rational(static_cast<long>(spec.m)) * Rational(spec.count));
}

Rational s_m(const GradedSetup& g, unsigned long m, const GradingOptions& opts) {
  return s_m(jumping_spectrum(g, m, opts));
}

Rational t_m(const JumpingSpectrum& spec) {
  require_positive(spec.m, "level m");
  return spec.max_value() / Rational(static_cast<long>(spec.m));
}

Rational t_m(const GradedSetup& g, unsigned long m, const GradingOptions& opts) {
  return t_m(jumping_spectrum(g, m, opts));
}

Rational big_t_estimate(const GradedSetup& g, unsigned long m_max, const GradingOptions& opts) {
  require_positive(m_max, "m_max");
  Rational best = 0;
  for (unsigned long m = 1; m <= m_max; ++m) best = max(best, t_m(g, m, opts));
  return best;
}

Rational big_t_exact(const GradedSetup& g) {
  const PLConcave h = g.psi().homogenized();
  Rational best = 0;
  for (const auto& v : subdivision_vertices(h, g.slice().q)) best = max(best, h(v));
  return best;
}

std::vector<CdfStep> mu_m_cdf(const JumpingSpectrum& spec, std::size_t rank) {
  require_positive(spec.m, "level m");
  const Rational m(static_cast<long>(spec.m));
  const Rational scale = Rational(1) / pow(m, static_cast<int>(rank));
  std::vector<CdfStep> out;
  mpz_class cumulative = 0;
  for (const auto& [v, mult] : spec.values) {
    cumulative += mult;
    out.push_back(CdfStep{v / m, Rational(cumulative) * scale});
  }
  return out;
}

std::vector<CdfStep> mu_m_cdf(const GradedSetup& g, unsigned long m, const GradingOptions& opts) {
  return mu_m_cdf(jumping_spectrum(g, m, opts), g.rank());
}

Rational cdf_sup_distance(const std::vector<CdfStep>& cdf, const SuperlevelProfile& profile) {
  std::vector<Rational> points;
  for (const auto& s : cdf) points.push_back(s.t);
  points.insert(points.end(), profile.breakpoints().begin(), profile.breakpoints().end());
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  const Rational& total = profile.total();
  Rational best = 0;
  Rational below = 0;  // step CDF just left of the current point
  std::size_t k = 0;
  for (const auto& t : points) {
    Rational at = below;
    while (k < cdf.size() && cdf[k].t <= t) at = cdf[k++].mass;
    best = max(best, (below - (total - profile.value(t))).abs());
    best = max(best, (at - (total - profile.right_limit(t))).abs());
    below = at;
  }
  return max(best, (below - total).abs());
}

DegreeSum degree_sum(const GradedSetup& g, unsigned long t, const GradingOptions& opts) {
  if (!g.xi().is_integral()) {
    throw Error(ErrorCode::QuasiRegularRequired, "per-degree sums need an integral Reeb field", "xi");
  }
  const ScaledForms scaled(g.psi());
  DegreeSum out;
  out.t = t;
  for (const auto& [v, mult] : to_values(tally(g.slice().p, t, scaled, opts.jobs), scaled.den, opts.ceiling)) {
    out.count += mult;
    out.sum += v * Rational(mult);
  }
  return out;
}

Rational graded_s_tilde(const GradedSetup& g, unsigned long t, const GradingOptions& opts) {
  require_positive(t, "degree t");
  const DegreeSum d = degree_sum(g, t, opts);
  if (d.count == 0) {
    throw Error(ErrorCode::EmptyDegree, "no lattice points of degree " + std::to_string(t));
  }
  return d.sum / (Rational(static_cast<long>(t)) * Rational(d.count));
}

}  // namespace reebvol

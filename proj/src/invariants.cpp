#include "reebvol/invariants.hpp"

#include <algorithm>
#include <future>
#include <sstream>
#include <variant>

#include "reebvol/error.hpp"

namespace reebvol {
namespace {

Rational mean_over(const PLConcave& f, const Polytope& q) { return integrate_moment(f, q, 1) / volume(q); }

Rational rank_factorial(std::size_t n) { return Rational(factorial(static_cast<unsigned>(n))); }

/// Coordinates of P_xi after dropping the last coordinate j with xi_j != 0:
/// u = a y + b for y in R^(n-1).
struct SliceChart {
  std::size_t dropped;
  std::vector<std::size_t> kept;
  RationalMatrix a;
  RationalVector b;
  Rational jacobian;  // dlambda = dy / |xi_j|
};

SliceChart slice_chart(const RationalVector& xi) {
  const std::size_t n = xi.rank();
  SliceChart c;
  c.dropped = n;
  for (std::size_t j = n; j-- > 0;) {
    if (!xi[j].is_zero()) {
      c.dropped = j;
      break;
    }
  }
  if (c.dropped == n) throw Error(ErrorCode::NotReebField, "xi is zero", "xi");
  for (std::size_t j = 0; j < n; ++j)
    if (j != c.dropped) c.kept.push_back(j);
  const Rational xj = xi[c.dropped];
  c.a = RationalMatrix(n, n - 1);
  for (std::size_t i = 0; i < c.kept.size(); ++i) {
    c.a(c.kept[i], i) = 1;
    c.a(c.dropped, i) = -xi[c.kept[i]] / xj;
  }
  c.b = RationalVector::unit(n, c.dropped) * (Rational(1) / xj);
  c.jacobian = Rational(1) / xj.abs();
  return c;
}

Verdict exact_verdict(std::string name, Rational lhs, Rational rhs, std::string detail = {}) {
  Verdict v;
  v.name = std::move(name);
  v.detail = std::move(detail);
  v.lhs = std::move(lhs);
  v.rhs = std::move(rhs);
  v.status = Verdict::Status::Fail;
  v.status = recheck(v, nullptr);
  return v;
}

Verdict skipped(std::string name, std::string reason, bool gating = true) {
  Verdict v;
  v.name = std::move(name);
  v.detail = std::move(reason);
  v.status = Verdict::Status::Skipped;
  v.gating = gating;
  return v;
}

/// Scale for relative comparisons against a limit that may be zero.
Rational relative_scale(const Rational& limit) { return limit.is_zero() ? Rational(1) : limit.abs(); }

}  // namespace

std::optional<PLConcave> effective_filtration(const PolarizedToricSetup& s) {
  if (s.psi) return s.psi;
  if (s.eta) return PLConcave::linear(*s.eta);
  return std::nullopt;
}

std::optional<RationalMatrix> default_basis(const Cone& sigma) {
  const std::size_t n = sigma.rank();
  if (sigma.rays().size() != n) return std::nullopt;
  std::vector<RationalVector> rows(sigma.rays().rbegin(), sigma.rays().rend());
  const Rational d = det(RationalMatrix(rows));
  if (d.abs() != 1) return std::nullopt;
  if (d.sign() < 0) std::swap(rows[0], rows[1]);
  return RationalMatrix(rows);
}

void validate(const PolarizedToricSetup& s) {
  const std::size_t n = s.sigma.rank();
  if (n < 2 || n > 8) {
    throw Error(ErrorCode::UnsupportedGeometry, "supported ranks are 2..8, got " + std::to_string(n), "sigma_rays");
  }
  if (s.xi.rank() != n) throw Error(ErrorCode::Dimension, "xi has rank " + std::to_string(s.xi.rank()), "xi");
  const Cone dual = dual_cone(s.sigma);
  ReebSlice slice;
  try {
    slice = reeb_slice(dual, s.xi);
  } catch (const Error& e) {
    throw Error(e.code(), e.what(), "xi");
  }
  if (s.eta && s.eta->rank() != n) {
    throw Error(ErrorCode::Dimension, "eta has rank " + std::to_string(s.eta->rank()), "eta");
  }
  if (s.psi) {
    if (s.psi->rank() != n) throw Error(ErrorCode::Dimension, "filtration has the wrong rank", "filtration");
    validate_filtration(*s.psi, dual, slice.q);
  }
  if (s.basis) {
    try {
      okounkov_body(dual, s.xi, *s.basis);
    } catch (const Error& e) {
      throw Error(e.code(), e.what(), "basis");
    }
  }
}

PolarizedToricSetup transport(const PolarizedToricSetup& s, const RationalMatrix& g) {
  std::vector<RationalVector> rays;
  for (const auto& r : s.sigma.rays()) rays.push_back(g * r);
  PolarizedToricSetup out{Cone::from_rays(rays, s.sigma.lattice()), g * s.xi, std::nullopt, std::nullopt, std::nullopt};
  if (s.eta) out.eta = g * *s.eta;
  const RationalVector origin(s.xi.rank());
  if (s.psi) out.psi = s.psi->pulled_back(g.transposed(), origin);
  if (s.basis) {
    std::vector<RationalVector> rows;
    for (const auto& e : s.basis->row_vectors()) rows.push_back(g * e);
    if (det(g).sign() < 0) std::swap(rows[0], rows[1]);
    out.basis = RationalMatrix(rows);
  }
  return out;
}

Rational vol_xi(const Cone& sigma, const RationalVector& xi) {
  const Cone dual = dual_cone(sigma);
  const auto& rays = dual.rays();
  Rational total = 0;
  for (const auto& s : triangulate_cone(dual, xi).simplices) {
    std::vector<RationalVector> u;
    Rational prod = 1;
    for (std::size_t i : s) {
      u.push_back(rays[i]);
      prod *= dot(rays[i], xi);
    }
    total += det(RationalMatrix(u)).abs() / prod;
  }
  return total;
}

Rational d_vol(const Cone& sigma, const RationalVector& xi, const RationalVector& eta) {
  if (eta.rank() != xi.rank()) throw Error(ErrorCode::InvalidDirection, "eta has the wrong rank", "eta");
  const Cone dual = dual_cone(sigma);
  const auto& rays = dual.rays();
  Rational total = 0;
  for (const auto& s : triangulate_cone(dual, xi).simplices) {
    std::vector<RationalVector> u;
    Rational prod = 1, log_derivative = 0;
    for (std::size_t i : s) {
      u.push_back(rays[i]);
      const Rational p = dot(rays[i], xi);
      if (p.sign() <= 0) throw Error(ErrorCode::InvalidDirection, "ray pairing vanishes along eta", "eta");
      prod *= p;
      log_derivative += dot(rays[i], eta) / p;
    }
    total += det(RationalMatrix(u)).abs() * log_derivative / prod;
  }
  return total;
}

Rational s_exact(const Cone& sigma, const RationalVector& xi, const PLConcave& psi) {
  const Cone dual = dual_cone(sigma);
  const ReebSlice slice = reeb_slice(dual, xi);
  return mean_over(homogenize(psi, dual, slice.q), slice.q);
}

Rational energy_tc(const Cone& sigma, const RationalVector& xi, const RationalVector& eta) {
  const Rational n1(static_cast<long>(xi.rank() + 1));
  return d_vol(sigma, xi, eta) / (n1 * vol_xi(sigma, xi));
}

SliceEnergy energy_pxi(const Cone& sigma, const RationalVector& xi, const PLConcave& psi) {
  const Cone dual = dual_cone(sigma);
  const ReebSlice slice = reeb_slice(dual, xi);
  const PLConcave h = homogenize(psi, dual, slice.q);
  const SliceChart chart = slice_chart(xi);
  std::vector<RationalVector> pts;
  for (const auto& v : slice.p.vertices()) {
    RationalVector y(chart.kept.size());
    for (std::size_t i = 0; i < chart.kept.size(); ++i) y[i] = v[chart.kept[i]];
    pts.push_back(std::move(y));
  }
  const Polytope flat = Polytope::from_vertices(std::move(pts));
  const Rational integral = integrate_moment(h.pulled_back(chart.a, chart.b), flat, 1) * chart.jacobian;
  const Rational n1(static_cast<long>(xi.rank() + 1));
  SliceEnergy e;
  e.slice_measure = volume(flat) * chart.jacobian;
  e.cone_normalized = integral / (n1 * vol_xi(sigma, xi));
  e.paper_normalized = integral / (n1 * e.slice_measure);
  return e;
}

const char* to_string(Verdict::Status s) {
  switch (s) {
    case Verdict::Status::Pass: return "PASS";
    case Verdict::Status::Fail: return "FAIL";
    case Verdict::Status::Skipped: return "SKIPPED";
  }
  return "?";
}

bool strictly_decreasing(const std::vector<TracePoint>& trace) {
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (trace[i].error.is_zero() && trace[i - 1].error.is_zero()) continue;
    if (!(trace[i].error < trace[i - 1].error)) return false;
  }
  return true;
}

Verdict::Status recheck(const Verdict& v, const std::vector<TracePoint>* trace) {
  if (v.status == Verdict::Status::Skipped) return v.status;
  bool ok = v.monotone_only || (v.tolerance ? (v.lhs - v.rhs).abs() <= *v.tolerance * v.scale : v.lhs == v.rhs);
  if (!v.monotone_trace.empty() || v.monotone_only) ok = ok && trace != nullptr && strictly_decreasing(*trace);
  return ok ? Verdict::Status::Pass : Verdict::Status::Fail;
}

std::vector<Verdict> homogeneity_check(const PolarizedToricSetup& s, const Rational& c) {
  if (c.sign() <= 0) throw Error(ErrorCode::InvalidDirection, "scale must be positive", "c");
  const std::string detail = "c=" + c.str();
  std::vector<Verdict> out;
  const RationalVector cxi = s.xi * c;
  if (const auto psi = effective_filtration(s)) {
    out.push_back(exact_verdict("prop3.13-hom", s_exact(s.sigma, cxi, *psi) * c, s_exact(s.sigma, s.xi, *psi), detail));
  } else {
    out.push_back(skipped("prop3.13-hom", "no filtration"));
  }
  out.push_back(exact_verdict("prop3.13-vol", vol_xi(s.sigma, cxi) * pow(c, static_cast<int>(s.xi.rank())),
                              vol_xi(s.sigma, s.xi), detail));
  return out;
}

ContinuityTrace continuity_scan(const Cone& sigma, const PLConcave& psi, const std::vector<RationalVector>& path) {
  ContinuityTrace out;
  for (std::size_t k = 0; k < path.size(); ++k) {
    try {
      out.values.push_back(s_exact(sigma, path[k], psi));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NotReebField && e.code() != ErrorCode::Dimension) throw;
      throw Error(e.code(), e.what(), "path[" + std::to_string(k) + "]");
    }
    if (k > 0) {
      out.jumps.push_back((out.values[k] - out.values[k - 1]).abs());
      out.max_jump = max(out.max_jump, out.jumps.back());
    }
  }
  return out;
}

QuasiRegularResult quasi_regular_check(const PolarizedToricSetup& s, unsigned long t_max, const Rational& tolerance,
                                       const GradingOptions& opts) {
  if (!s.xi.is_integral()) {
    throw Error(ErrorCode::QuasiRegularRequired, "S-tilde needs an integral Reeb field", "xi");
  }
  const auto psi = effective_filtration(s);
  if (!psi) throw Error(ErrorCode::InvalidFiltration, "no filtration", "filtration");
  const std::size_t n = s.xi.rank();
  const GradedSetup g(dual_cone(s.sigma), s.xi, *psi);
  const Rational S = s_exact(s.sigma, s.xi, *psi);
  const Rational ratio(static_cast<long>(n), static_cast<long>(n + 1));

  // Largest non-empty degree <= t.
  auto populated = [&](unsigned long t) {
    for (; t >= 1; --t) {
      DegreeSum d = degree_sum(g, t, opts);
      if (d.count > 0) return d;
    }
    throw Error(ErrorCode::EmptyDegree, "no populated degree up to " + std::to_string(t_max));
  };
  if (t_max < 2) throw Error(ErrorCode::EmptyDegree, "t_max must be at least 2");
  std::vector<DegreeSum> sums{populated(t_max)};
  for (int k = 0; k < 3 && sums.back().t >= 2; ++k) {
    try {
      sums.push_back(populated(sums.back().t / 2));
    } catch (const Error&) {
      break;
    }
  }
  if (sums.size() < 2) throw Error(ErrorCode::EmptyDegree, "need two populated degrees for extrapolation");

  QuasiRegularResult r;
  for (auto it = sums.rbegin(); it != sums.rend(); ++it) {
    const Rational st = it->sum / (Rational(it->t) * Rational(it->count));
    r.trace.push_back(TracePoint{it->t, st, (ratio * st - S).abs()});
  }
  // S~_t = a + b / t + O(1/t^2): eliminate b with the two largest degrees.
  const DegreeSum& d1 = sums[0];
  const DegreeSum& d2 = sums[1];
  const Rational t1(d1.t), t2(d2.t);
  const Rational s1 = d1.sum / (t1 * Rational(d1.count));
  const Rational s2 = d2.sum / (t2 * Rational(d2.count));
  r.extrapolated = (t1 * s1 - t2 * s2) / (t1 - t2);
  r.count_leading = Rational(d1.count) / pow(t1, static_cast<int>(n - 1));
  r.count_leading_expected = vol_xi(s.sigma, s.xi) / rank_factorial(n - 1);

  Verdict v;
  v.name = "lem3.17b";
  v.detail = "t1=" + std::to_string(d1.t) + ",t2=" + std::to_string(d2.t);
  v.lhs = S;
  v.rhs = ratio * r.extrapolated;
  v.tolerance = tolerance;
  v.scale = relative_scale(S);
  v.status = Verdict::Status::Fail;
  v.status = recheck(v, nullptr);
  r.verdict = v;
  return r;
}

const std::vector<TracePoint>* InvariantReport::trace(const std::string& name) const {
  if (name == "s_m_trace") return &s_m_trace;
  if (name == "vol_trace") return &vol_trace;
  if (name == "cdf_trace") return &cdf_trace;
  if (name == "s_tilde_trace") return &s_tilde_trace;
  return nullptr;
}

bool InvariantReport::passed() const {
  return std::all_of(verdicts.begin(), verdicts.end(),
                     [](const Verdict& v) { return !v.gating || v.status != Verdict::Status::Fail; });
}

namespace {

struct LevelResult {
  unsigned long m;
  Rational s_m;
  mpz_class count;
  std::optional<Rational> cdf_distance;
  std::string cdf_error;
};

template <class F>
auto launch(unsigned jobs, F&& f) {
  return std::async(jobs > 1 ? std::launch::async : std::launch::deferred, std::forward<F>(f));
}

std::string matrix_str(const RationalMatrix& m) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < m.rows(); ++i) os << (i ? "," : "") << m.row(i).str();
  os << "]";
  return os.str();
}

}  // namespace

InvariantReport consistency_report(const PolarizedToricSetup& s, const ReportOptions& opts) {
  validate(s);
  const std::size_t n = s.sigma.rank();
  const Cone dual = dual_cone(s.sigma);
  const ReebSlice slice = reeb_slice(dual, s.xi);
  const auto psi = effective_filtration(s);
  const GradingOptions gopts{opts.ceiling, std::max(1u, opts.jobs)};

  InvariantReport r;
  r.rank = n;
  r.vol_xi = vol_xi(s.sigma, s.xi);
  r.vol_delta = volume(slice.q);

  // Filtration-independent routes first; filtration routes run concurrently.
  std::optional<PLConcave> h;
  std::string psi_problem = "no filtration (give psi or eta)";
  if (psi) {
    try {
      h = homogenize(*psi, dual, slice.q);
    } catch (const Error& e) {
      psi_problem = e.what();
    }
  }

  auto profile_f = launch(opts.jobs, [&]() -> std::optional<SuperlevelProfile> {
    if (!h) return std::nullopt;
    return superlevel_profile(*h, slice.q);
  }).share();

  std::vector<std::future<LevelResult>> levels;
  if (h) {
    for (unsigned long m : opts.m_grid) {
      levels.push_back(launch(opts.jobs, [&, m]() {
        const GradedSetup g(dual, s.xi, *psi);
        const JumpingSpectrum spec = jumping_spectrum(g, m, gopts);
        LevelResult lr{m, s_m(spec), spec.count, std::nullopt, {}};
        try {
          const auto& prof = profile_f.get();
          if (prof) lr.cdf_distance = cdf_sup_distance(mu_m_cdf(spec, n), *prof);
        } catch (const Error& e) {
          lr.cdf_error = e.what();
        }
        return lr;
      }));
    }
  }

  auto qr_f = launch(opts.jobs, [&]() -> std::variant<QuasiRegularResult, std::string> {
    if (!h) return psi_problem;
    try {
      return quasi_regular_check(s, opts.t_max, opts.tolerance, gopts);
    } catch (const Error& e) {
      return std::string(e.what());
    }
  });

  std::vector<std::future<std::vector<Verdict>>> hom;
  for (const auto& c : opts.homogeneity) {
    hom.push_back(launch(opts.jobs, [&, c]() { return homogeneity_check(s, c); }));
  }

  // Exact routes.
  if (s.eta) {
    r.d_vol = d_vol(s.sigma, s.xi, *s.eta);
    r.energy_tc = *r.d_vol / (Rational(static_cast<long>(n + 1)) * r.vol_xi);
  }
  if (h) {
    r.s_exact = mean_over(*h, slice.q);
    Rational top = 0;
    for (const auto& v : subdivision_vertices(*h, slice.q)) top = max(top, (*h)(v));
    r.big_t = top;
    r.energy_pxi = energy_pxi(s.sigma, s.xi, *psi);
  }

  if (s.eta) {
    const Rational lhs = mean_over(PLConcave::linear(*s.eta), slice.q);
    r.verdicts.push_back(exact_verdict("thm4.2", lhs, *r.energy_tc, "mean of <u,eta> over Q vs D_-eta vol/((n+1)vol)"));
  } else {
    r.verdicts.push_back(skipped("thm4.2", "no eta"));
  }

  // Scale constant from a reference filtration: the linear form of the sum
  // of the rays of sigma, which is positive on the dual cone.
  {
    RationalVector ref(n);
    for (const auto& ray : s.sigma.rays()) ref += ray;
    const PLConcave ref_psi = PLConcave::linear(ref);
    const Rational ref_s = s_exact(s.sigma, s.xi, ref_psi);
    const SliceEnergy ref_e = energy_pxi(s.sigma, s.xi, ref_psi);
    r.c_reference = ref_s / ref_e.paper_normalized;
  }
  if (h) {
    if (!r.energy_pxi->paper_normalized.is_zero()) r.c_n_ratio = *r.s_exact / r.energy_pxi->paper_normalized;
    r.verdicts.push_back(exact_verdict("thm6.4-Cn", *r.s_exact, *r.c_reference * r.energy_pxi->paper_normalized,
                                       "S vs C(n) E(P_xi) with C(n)=" + r.c_reference->str()));
  } else {
    r.verdicts.push_back(skipped("thm6.4-Cn", psi_problem));
  }

  // Convergence checks along the m-grid.
  const Rational nfact = rank_factorial(n);
  std::string cdf_problem;
  for (auto& f : levels) {
    const LevelResult lr = f.get();
    const Rational m(lr.m);
    r.s_m_trace.push_back(TracePoint{lr.m, lr.s_m, (lr.s_m - *r.s_exact).abs()});
    const Rational normalized = nfact * Rational(lr.count) / pow(m, static_cast<int>(n));
    r.vol_trace.push_back(TracePoint{lr.m, normalized, (normalized - r.vol_xi).abs()});
    if (lr.cdf_distance) {
      r.cdf_trace.push_back(TracePoint{lr.m, *lr.cdf_distance, *lr.cdf_distance});
    } else if (cdf_problem.empty()) {
      cdf_problem = lr.cdf_error.empty() ? "no profile" : lr.cdf_error;
    }
  }
  if (!r.s_m_trace.empty()) {
    Verdict v;
    v.name = "cor3.12";
    v.detail = "|S_m - S| strictly decreasing over the m-grid, final within tolerance";
    v.lhs = r.s_m_trace.back().value;
    v.rhs = *r.s_exact;
    v.tolerance = opts.tolerance;
    v.scale = relative_scale(*r.s_exact);
    v.monotone_trace = "s_m_trace";
    v.status = Verdict::Status::Fail;
    v.status = recheck(v, &r.s_m_trace);
    r.verdicts.push_back(v);

    Verdict w;
    w.name = "thm3.3-vol";
    w.detail = "|n! N_m / m^n - vol(xi)| strictly decreasing over the m-grid";
    w.lhs = r.vol_trace.back().value;
    w.rhs = r.vol_xi;
    w.monotone_trace = "vol_trace";
    w.monotone_only = true;
    w.status = Verdict::Status::Fail;
    w.status = recheck(w, &r.vol_trace);
    r.verdicts.push_back(w);
  } else {
    r.verdicts.push_back(skipped("cor3.12", h ? "empty m-grid" : psi_problem));
    r.verdicts.push_back(skipped("thm3.3-vol", h ? "empty m-grid" : psi_problem));
  }
  if (!r.cdf_trace.empty() && cdf_problem.empty()) {
    Verdict v;
    v.name = "thm3.11-weak";
    v.detail = "CDF sup-distance mu_m vs mu, relative to the mass of mu";
    v.lhs = r.cdf_trace.back().value;
    v.rhs = 0;
    v.tolerance = Rational(2, 100);
    v.scale = r.vol_delta;
    v.monotone_trace = "cdf_trace";
    v.status = Verdict::Status::Fail;
    v.status = recheck(v, &r.cdf_trace);
    r.verdicts.push_back(v);
  } else {
    r.verdicts.push_back(skipped("thm3.11-weak", !h ? psi_problem : cdf_problem.empty() ? "empty m-grid" : cdf_problem));
  }

  auto qr = qr_f.get();
  if (auto* res = std::get_if<QuasiRegularResult>(&qr)) {
    r.s_tilde_trace = res->trace;
    r.s_tilde_extrapolated = res->extrapolated;
    r.verdicts.push_back(res->verdict);
    std::ostringstream os;
    os << "per-degree count N_t/t^(n-1) at t=" << res->trace.back().index << " is " << res->count_leading.str()
       << "; vol(xi)/(n-1)! is " << res->count_leading_expected.str() << " (informative)";
    r.notes.push_back(os.str());
  } else {
    r.verdicts.push_back(skipped("lem3.17b", std::get<std::string>(qr)));
  }

  for (auto& f : hom)
    for (auto& v : f.get()) r.verdicts.push_back(std::move(v));

  std::optional<RationalMatrix> basis = s.basis ? s.basis : default_basis(s.sigma);
  if (basis && h) {
    const Polytope delta = okounkov_body(dual, s.xi, *basis);
    r.basis = matrix_str(*basis);
    r.vol_delta = volume(delta);
    const PLConcave g = h->pulled_back(inverse(*basis), RationalVector(n));
    r.verdicts.push_back(exact_verdict("prop6.1-okounkov", integrate_moment(g, delta, 1), integrate_moment(*h, slice.q, 1),
                                       "integral of G over Delta vs homogenised psi over Q"));
    r.verdicts.push_back(exact_verdict("prop6.1-volume", r.vol_delta, volume(slice.q), "vol(Delta) vs vol(Q)"));
  } else {
    r.basis = "none";
    const std::string why = !basis ? "no unimodular basis in sigma; Delta-dependent values in Q coordinates" : psi_problem;
    r.verdicts.push_back(skipped("prop6.1-okounkov", why, false));
  }

  r.notes.push_back("mu_m and mu have total mass vol(Delta) = vol(xi)/n!; a normalisation to mass vol(xi) differs by n!");
  return r;
}

}  // namespace reebvol

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "reebvol/grading.hpp"
#include "reebvol/pl_concave.hpp"
#include "reebvol/polyhedra.hpp"

namespace reebvol {

/// Cone sigma in N with Reeb field xi, optional test-configuration direction
/// eta, filtration psi and Okounkov basis (rows e_i in sigma, det 1).
struct PolarizedToricSetup {
  Cone sigma;
  RationalVector xi;
  std::optional<RationalVector> eta;
  std::optional<PLConcave> psi;
  std::optional<RationalMatrix> basis;
};

/// Rank 2..8, matching ranks, xi Reeb, psi a valid filtration, basis valid.
/// Errors carry the offending field ("xi", "eta", "filtration", "basis").
void validate(const PolarizedToricSetup& s);

/// The filtration used by psi-dependent routes: psi, else <u, eta>.
std::optional<PLConcave> effective_filtration(const PolarizedToricSetup& s);

/// Rays of sigma reordered to a det +1 basis when they form a Z-basis.
std::optional<RationalMatrix> default_basis(const Cone& sigma);

/// Simultaneous change of N-coordinates by g in GL(n, Z); M moves by g^-T.
PolarizedToricSetup transport(const PolarizedToricSetup& s, const RationalMatrix& g);

/// n! vol(Q_xi), summed over simplicial subcones: |det U| / prod <u_i, xi>.
Rational vol_xi(const Cone& sigma, const RationalVector& xi);

/// d/de vol(xi - e eta) at e = 0.
Rational d_vol(const Cone& sigma, const RationalVector& xi, const RationalVector& eta);

/// Mean of the homogenised psi over Q_xi.
Rational s_exact(const Cone& sigma, const RationalVector& xi, const PLConcave& psi);

/// d_vol / ((n + 1) vol_xi).
Rational energy_tc(const Cone& sigma, const RationalVector& xi, const RationalVector& eta);

struct SliceEnergy {
  /// Slice measure rescaled so that the slice has mass vol(xi).
  Rational paper_normalized;
  /// Slice measure lambda with int_Q f = int_0^1 int_P f(s w) s^(n-1) dlambda ds.
  Rational cone_normalized;
  /// lambda(P_xi).
  Rational slice_measure;
};

/// Integral of the homogenised psi over P_xi divided by (n + 1) vol(xi),
/// under both normalisations.
SliceEnergy energy_pxi(const Cone& sigma, const RationalVector& xi, const PLConcave& psi);

struct TracePoint {
  unsigned long index;  // m or t
  Rational value;
  Rational error;
};

struct Verdict {
  enum class Status { Pass, Fail, Skipped };

  std::string name;
  std::string detail;
  Status status = Status::Skipped;
  bool gating = true;
  Rational lhs = 0;
  Rational rhs = 0;
  /// Absent: exact equality. Present: |lhs - rhs| <= tolerance * scale.
  std::optional<Rational> tolerance;
  Rational scale = 1;
  /// Name of a trace whose errors must be strictly decreasing (or zero).
  std::string monotone_trace;
  /// Only the trace is checked; lhs and rhs are informative.
  bool monotone_only = false;
};

const char* to_string(Verdict::Status s);

/// Evaluates the comparison encoded in v (status ignored); skipped verdicts
/// stay skipped.
Verdict::Status recheck(const Verdict& v, const std::vector<TracePoint>* trace);

/// Errors strictly decreasing, except that they may stay at zero.
bool strictly_decreasing(const std::vector<TracePoint>& trace);

/// S(c xi) c = S(xi) ("prop3.13-hom") and vol(c xi) c^n = vol(xi) ("prop3.13-vol").
std::vector<Verdict> homogeneity_check(const PolarizedToricSetup& s, const Rational& c);

struct ContinuityTrace {
  std::vector<Rational> values;
  std::vector<Rational> jumps;  // |S_{k+1} - S_k|
  Rational max_jump = 0;
};

/// Exact S along a path of Reeb fields. A non-Reeb point raises
/// Error(NotReebField) with field "path[k]".
ContinuityTrace continuity_scan(const Cone& sigma, const PLConcave& psi, const std::vector<RationalVector>& path);

struct QuasiRegularResult {
  Verdict verdict;
  std::vector<TracePoint> trace;  // (t, S~_t, |n/(n+1) S~_t - S|)
  Rational extrapolated = 0;      // Richardson estimate of lim S~_t
  /// N_t1 / t1^(n-1) against vol(xi) / (n-1)!; informative only.
  Rational count_leading = 0;
  Rational count_leading_expected = 0;
};

QuasiRegularResult quasi_regular_check(const PolarizedToricSetup& s, unsigned long t_max, const Rational& tolerance,
                                       const GradingOptions& opts = {});

struct ReportOptions {
  std::vector<unsigned long> m_grid{25, 50, 100, 200, 400};
  unsigned long t_max = 200;
  Rational tolerance{1, 100};
  std::vector<Rational> homogeneity{Rational(1, 3), Rational(2), Rational(7, 2)};
  bool ceiling = false;
  unsigned jobs = 1;
};

struct InvariantReport {
  std::size_t rank = 0;
  std::string basis;  // "none" or the rows used
  Rational vol_xi;
  Rational vol_delta;
  std::optional<Rational> d_vol;
  std::optional<Rational> energy_tc;
  std::optional<Rational> s_exact;
  std::optional<Rational> big_t;
  std::optional<SliceEnergy> energy_pxi;
  std::optional<Rational> c_n_ratio;
  std::optional<Rational> c_reference;
  std::optional<Rational> s_tilde_extrapolated;
  std::vector<TracePoint> s_m_trace;
  std::vector<TracePoint> vol_trace;
  std::vector<TracePoint> cdf_trace;
  std::vector<TracePoint> s_tilde_trace;
  std::vector<Verdict> verdicts;
  std::vector<std::string> notes;

  const std::vector<TracePoint>* trace(const std::string& name) const;
  /// All gating verdicts pass or are skipped.
  bool passed() const;
};

InvariantReport consistency_report(const PolarizedToricSetup& s, const ReportOptions& opts = {});

}  // namespace reebvol

#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "reebvol/pl_concave.hpp"
#include "reebvol/polyhedra.hpp"

namespace reebvol {

/// Weight monoid, Reeb field and filtration function. Construction validates
/// the Reeb condition and nonnegativity of psi.
class GradedSetup {
 public:
  GradedSetup(Cone dual, RationalVector xi, PLConcave psi);

  const Cone& dual() const { return dual_; }
  const RationalVector& xi() const { return xi_; }
  const PLConcave& psi() const { return psi_; }
  const ReebSlice& slice() const { return slice_; }
  std::size_t rank() const { return dual_.rank(); }

 private:
  Cone dual_;
  RationalVector xi_;
  PLConcave psi_;
  ReebSlice slice_;
};

struct GradingOptions {
  /// Jumping numbers rounded up to integers.
  bool ceiling = false;
  unsigned jobs = 1;
};

/// Sorted jumping numbers at level m, stored run-length encoded.
struct JumpingSpectrum {
  unsigned long m = 0;
  std::vector<std::pair<Rational, mpz_class>> values;  // (value, multiplicity), increasing
  mpz_class count = 0;                                  // N_m
  Rational sum = 0;                                     // with multiplicity

  const Rational& max_value() const { return values.back().first; }
  std::vector<Rational> expanded() const;
};

/// Multiset {psi(u) : u in m Q_xi cap M}.
JumpingSpectrum jumping_spectrum(const GradedSetup& g, unsigned long m, const GradingOptions& opts = {});

/// sum / (m N_m); m >= 1.
Rational s_m(const JumpingSpectrum& spec);
Rational s_m(const GradedSetup& g, unsigned long m, const GradingOptions& opts = {});

/// max / m; m >= 1.
Rational t_m(const JumpingSpectrum& spec);
Rational t_m(const GradedSetup& g, unsigned long m, const GradingOptions& opts = {});

/// sup of T_m over 1 <= m <= m_max.
Rational big_t_estimate(const GradedSetup& g, unsigned long m_max, const GradingOptions& opts = {});

/// lim T_m: the maximum of the homogenised psi on Q_xi, attained at a vertex
/// of its linearity subdivision.
Rational big_t_exact(const GradedSetup& g);

/// CDF step of an atomic measure: mass of (-inf, t].
struct CdfStep {
  Rational t;
  Rational mass;
};

/// CDF of mu_m = m^-n sum_j delta(a_{m,j} / m); total mass N_m / m^n.
std::vector<CdfStep> mu_m_cdf(const JumpingSpectrum& spec, std::size_t rank);
std::vector<CdfStep> mu_m_cdf(const GradedSetup& g, unsigned long m, const GradingOptions& opts = {});

/// sup_t |F(t) - G(t)| where F is the step CDF and G(t) = total - vol{f > t}
/// is the CDF of the pushforward of Lebesgue measure by f.
Rational cdf_sup_distance(const std::vector<CdfStep>& cdf, const SuperlevelProfile& profile);

/// Lattice points of degree exactly t, i.e. in t P_xi.
struct DegreeSum {
  unsigned long t = 0;
  mpz_class count = 0;  // N_t
  Rational sum = 0;
};

/// Throws Error(QuasiRegularRequired) unless xi is integral.
DegreeSum degree_sum(const GradedSetup& g, unsigned long t, const GradingOptions& opts = {});

/// sum / (t N_t). Throws Error(EmptyDegree) when N_t = 0.
Rational graded_s_tilde(const GradedSetup& g, unsigned long t, const GradingOptions& opts = {});

}  // namespace reebvol

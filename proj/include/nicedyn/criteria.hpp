#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nicedyn/measure.hpp"

namespace nicedyn {

/// Forward-invariant bounded set A as a point cloud with its neighbourhood data.
struct InvariantTarget {
  std::vector<cplx> cloud;
  double eps = 0.0;
  double K = 0.0;                   ///< sup of sampled |f'| on the eps-neighbourhood
  double invariance_defect = 0.0;   ///< max dist(f(a), cloud)
  double min_pole_distance = 0.0;   ///< from the cloud to the nearest pole

  double distance(cplx z) const;
};

/// Builds a target; throws "pole in neighbourhood" if a pole lies within 2 eps
/// of the cloud.
InvariantTarget make_invariant_target(const DynamicalMap& map, std::vector<cplx> cloud, double eps,
                                      std::size_t samples_per_point = 256);

struct Annulus {
  int k = 0;
  double r_in = 0.0, r_out = 0.0;
  double value = 0.0;
  double coarse = 0.0;   ///< estimate at half resolution
  double error = 0.0;    ///< |value - coarse|
  std::size_t nodes = 0;
  bool flagged = false;
};

struct AnnulusSeries {
  std::string form;  ///< "log_dist" or "ks"
  double r0 = 0.0;
  double exponent = 0.0;
  std::vector<Annulus> annuli;
  bool any_flagged() const;
};

struct Verdict {
  Finiteness verdict = Finiteness::inconclusive;
  double q = 0.0;
  std::string note;
};

Verdict verdict(const AnnulusSeries& series);

struct LogDistOptions {
  int radial_nodes = 16;        ///< Gauss-Legendre nodes per annulus (fine level)
  double arc_spacing = 0.05;    ///< target arc length between theta nodes (fine level)
  int min_theta_nodes = 256;
  bool clamp = true;            ///< max(0, -log dist); false keeps the raw -log
  /// Replaces -log dist(f(z), A) when set (synthetic oracle integrands).
  std::function<double(cplx)> integrand;
};

/// Annulus quadrature of (-log dist(f(z), A)) / |z|^s over doubling annuli from r0.
AnnulusSeries log_dist_integral(const DynamicalMap& map, const InvariantTarget& target, double r0, double s,
                                int annuli, const LogDistOptions& opt = {});

struct NevanlinnaValue {
  double value = 0.0;
  double error = 0.0;            ///< trapezoid halving difference
  std::size_t nodes = 0;
  std::size_t refined = 0;       ///< intervals refined for large integrand
  std::size_t excluded = 0;      ///< nodes where f hit a
};

/// m(r, a) = ∫_0^{2π} log+ 1/|f(r e^{iθ}) - a| dθ.
NevanlinnaValue nevanlinna_m(const DynamicalMap& map, cplx a, double r, std::size_t nodes = 65536);

struct KsOptions {
  int radial_nodes = 8;
  std::size_t min_theta_nodes = 4096;
  /// Replaces m(r, a) when set.
  std::function<double(double)> m_override;
};

/// Doubling-annulus quadrature of m(r, a) / r^{1 + 2/M} from r0.
AnnulusSeries ks_integral(const DynamicalMap& map, cplx a, int M, double r0, int annuli, const KsOptions& opt = {});

struct EscapeSample {
  cplx x{};
  double dist = 0.0;      ///< dist(f(x), cloud)
  int n = 0;              ///< 0 if the orbit did not escape within the cap
  double bound = 0.0;     ///< (log eps - log dist) / log K
  bool escaped = false;
  bool ok = true;
};

struct EscapeReport {
  double K = 0.0;
  double eps = 0.0;
  std::vector<EscapeSample> samples;
  std::size_t escaped = 0;
  std::size_t violations = 0;
  std::size_t flagged = 0;     ///< did not escape within the cap
  double c1 = 0.0, c2 = 0.0;   ///< fit n ≈ -c1 log dist - c2
  double predicted_slope = 0.0;
  bool pass() const { return violations == 0; }
};

EscapeReport escape_time_bound_check(const DynamicalMap& map, const InvariantTarget& target,
                                     const std::vector<cplx>& points, int n_cap = 500);

/// Points x with f(x) within eps of the cloud, |f(x) - a| log-uniform in [d_min, eps].
std::vector<cplx> escape_samples(const DynamicalMap& map, const InvariantTarget& target, std::size_t count,
                                 double d_min, std::uint64_t seed, bool real_only = false);

}  // namespace nicedyn

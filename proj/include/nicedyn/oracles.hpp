#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nicedyn/induce.hpp"

namespace nicedyn {

struct BirkhoffEstimate {
  std::size_t length = 0;     ///< iterations performed
  std::size_t burn_in = 0;
  std::string observable = "return_time";
  std::size_t returns = 0;
  double mean = 0.0;
  double error = 0.0;         ///< batch-means standard error
  std::size_t batches = 0;
  std::size_t reseeds = 0;    ///< restarts after floating-point traps
  bool truncated = false;     ///< orbit left the numeric range
};

/// Mean first-return time to U along a forward orbit of length N from `start`.
BirkhoffEstimate birkhoff_return_time(const DynamicalMap& map, const Region& U, Support support, cplx start,
                                      std::size_t N, std::size_t burn_in = 1000, std::uint64_t seed = 1,
                                      std::size_t batches = 20);

/// Batch means of a sequence: mean and standard error over `batches` batches.
std::pair<double, double> batch_means(const std::vector<double>& xs, std::size_t batches);

enum class OracleIntegrand {
  power,            ///< r^alpha on [a, b]
  power_log,        ///< r^alpha log r on [a, b]
  unit_annulus,     ///< 1 over {a <= |z| <= b} (area)
  sine_semicircle,  ///< 2 r sin θ over θ in [0, π]
};
std::string to_string(OracleIntegrand tag);
OracleIntegrand oracle_integrand_from_string(const std::string& s);

struct OracleDomain {
  double a = 1.0, b = 2.0;
  double alpha = 0.0;
  double r = 1.0;
};

struct QuadratureValue {
  double value = 0.0;
  double error = 0.0;  ///< Richardson estimate from the half-node rule
  std::size_t nodes = 0;
};

/// Composite Simpson reference value with a Richardson error bound.
QuadratureValue brute_quadrature(OracleIntegrand tag, const OracleDomain& dom, std::size_t nodes = 1000000);
double closed_form(OracleIntegrand tag, const OracleDomain& dom);

/// Plain periodic trapezoid for m(r, a) at a dense node count.
QuadratureValue brute_nevanlinna(const DynamicalMap& map, cplx a, double r, std::size_t nodes = 1000000);

/// ∫∫ r^{1-s} dr dθ over {a <= |z| <= b}.
double annulus_power_closed_form(double a, double b, double s);

/// Chebyshev acim 1/(π sqrt(x(1-x))) mass of [a, b] ⊂ [0, 1].
double chebyshev_acim_mass(double a, double b);

/// Escape time of 2z from dist d < eps of 0: least n >= 1 with 2^(n-1) d > eps.
int doubling_escape_time(double d, double eps);

}  // namespace nicedyn

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nicedyn/induce.hpp"

namespace nicedyn {

/// Value of exp(p)|Df|_rho^t with the conventions of conformal measures.
struct JacobianValue {
  double value = 1.0;
  bool infinite = false;   ///< |Df|^t = infinity
  bool zero_mass = false;  ///< the point itself carries no mass
};

JacobianValue conformal_jacobian(const ConformalSpec& spec, const DynamicalMap& map, const SpherePoint& z);

/// Sample points of a partition cell, jittered inside a regular stratification.
std::vector<cplx> stratified_samples(const Box& cell, bool one_dimensional, std::size_t count, std::uint64_t seed);

/// Ulam discretisation of the induced map on a grid partition of U.
struct UlamModel {
  GridPartition partition;
  Support support = Support::planar;
  std::vector<double> cell_mass;         ///< reference mass of cell ∩ U
  std::vector<std::size_t> row_start;    ///< CSR row offsets
  std::vector<std::size_t> col;
  std::vector<double> weight;
  std::vector<double> escaping;          ///< escaping fraction of each row
  std::size_t samples_per_cell = 0;
  std::size_t dropped = 0;
  std::vector<std::string> warnings;

  std::size_t size() const { return cell_mass.size(); }
  /// Mass-weighted escaping fraction.
  double escaping_mass() const;
  /// Largest |1 - row sum| including the escaping column.
  double row_sum_defect() const;
};

UlamModel build_ulam(const DynamicalMap& map, const ReturnMap& rm, double h, std::size_t samples_per_cell,
                     std::uint64_t seed);

struct InducedDensity {
  std::vector<double> rho;   ///< density per cell
  std::vector<double> pi;    ///< cell masses of the invariant probability
  double normalization = 0.0;
  double residual = 0.0;
  int iterations = 0;
  std::vector<double> residual_history;
  double escaping_mass = 0.0;
  std::size_t reachable = 0;
  bool positive = false;     ///< rho > 0 on every reachable cell
  std::vector<std::string> warnings;

  double max_cell_mass() const;
};

InducedDensity stationary_density(const UlamModel& model, double tol = 1e-11, int max_iterations = 20000);

/// L1 distance of two densities, the finer one averaged onto the coarser grid.
double density_l1_distance(const UlamModel& coarse, const InducedDensity& a, const UlamModel& fine,
                           const InducedDensity& b);

/// Fifth percentile of the density over cells centred in a disk.
double density_floor(const UlamModel& model, const InducedDensity& density, const Disk& disk);

/// nu(U_j) for every return component, normalised over the captured components.
std::vector<double> component_masses(const UlamModel& model, const InducedDensity& density, const ReturnMap& rm);

struct DistortionTrial {
  int k = 0;
  double ratio = 1.0;   ///< [m(φ^-k A)/m(φ^-k B)] / [m(A)/m(B)]
  double bound = 1.0;   ///< C^(t k)
  double margin = 1.0;  ///< multiplicative sampling margin
  bool inconclusive = false;
  bool pass = true;
};

struct DistortionReport {
  double C = 1.0;
  std::vector<DistortionTrial> trials;
  std::size_t violations = 0;
  std::size_t inconclusive = 0;
  bool pass() const { return violations == 0; }
};

/// Forward-sampled check of the distortion sandwich for cell sets A and B.
DistortionTrial folklore_distortion_check(const DynamicalMap& map, const ReturnMap& rm, const UlamModel& model,
                                          const std::vector<std::size_t>& A, const std::vector<std::size_t>& B,
                                          int k, std::size_t samples, std::uint64_t seed, double t = 2.0);

/// Runs `pairs` random pairs of cell sets for each k in ks.
DistortionReport folklore_distortion_suite(const DynamicalMap& map, const ReturnMap& rm, const UlamModel& model,
                                           const std::vector<int>& ks, std::size_t pairs, std::size_t samples,
                                           std::uint64_t seed, double t = 2.0);

enum class Finiteness { finite, divergent, inconclusive };
std::string to_string(Finiteness v);

struct Shell {
  int return_time = 0;
  double mass = 0.0;          ///< nu of the components with this return time
  double contribution = 0.0;  ///< return_time * mass
  double partial_sum = 0.0;
};

struct SpreadMassEstimate {
  std::vector<double> component_mass;
  std::vector<double> contributions;
  std::vector<Shell> shells;
  double truncated_total = 0.0;
  double tail_ratio = 0.0;
  double tail_amplitude = 0.0;
  double tail_mass = 0.0;
  double tail_contribution = 0.0;
  double total = 0.0;
  int complete_depth = 0;
  Finiteness verdict = Finiteness::inconclusive;
  std::string note;
};

/// Spread mass from component return times and nu-masses. Shells deeper than
/// `complete_depth` are ignored (their enumeration is incomplete).
SpreadMassEstimate spread_mass(const std::vector<int>& return_times, const std::vector<double>& nu,
                               int complete_depth);
SpreadMassEstimate spread_mass(const InducedDensity& density, const UlamModel& model, const ReturnMap& rm);

struct TailSample {
  double modulus = 0.0;
  cplx w{};
  cplx preimage{};
  double rho_bound = 0.0;
  double scaled = 0.0;  ///< rho_bound |w|^(t + t/M)
};

struct TailReport {
  cplx pole{};
  int order = 1;
  double t = 2.0;
  double exponent = 4.0;
  double c0 = 0.0;
  double c = 0.0;  ///< inf of the scaled bound
  double c_max = 0.0;
  double variation = 0.0;
  std::vector<TailSample> samples;
  bool pass() const { return c > 0 && variation < 10.0; }
};

/// Lower bound rho(w) >= c0/|f'(z_p(w))|^t for w on rays of |w| in [r0, r1],
/// z_p(w) the preimage of w within `capture` of the pole.
TailReport density_tail_check(const DynamicalMap& map, cplx pole, int order, double c0, double r0, double r1,
                              double t = 2.0, std::size_t samples = 64, double capture = 1.0);

}  // namespace nicedyn

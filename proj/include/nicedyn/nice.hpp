#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nicedyn/geometry.hpp"
#include "nicedyn/maps.hpp"
#include "nicedyn/pullback.hpp"

namespace nicedyn {

struct NiceSetParams {
  cplx center{};
  double R = 0.4;
  double r = 0.1;
  double kappa = 1.2;
  int n_max = 24;
  double eps_min_factor = 1e-4;  ///< cells of diameter below r * factor are pruned
  int k_max = 64;
  int retry_limit = 6;
  int resolution = 512;          ///< samples on the base circle
  int raster_resolution = 1024;
  int boundary_vertices = 1024;
  std::size_t max_cells = 200000;
  std::size_t max_return_cells = 5000;
  MetricTag metric = MetricTag::spherical;
};

struct NiceDiagnostics {
  std::size_t n_cells = 0;
  std::size_t visited = 0;
  std::size_t pruned = 0;
  double max_truncated_diameter = 0.0;
  int retries = 0;
  int depth_reached = 0;
  bool cap_hit = false;
  double pixel = 0.0;
  double boundary_accuracy = 0.0;  ///< distance bound between computed and exact boundary
  int raster_resolution = 0;
  std::optional<int> period;        ///< set when the centre is periodic
  std::optional<double> periodic_ratio;  ///< diameter ratio along the z-periodic chain
  int return_depth = 0;
  bool return_cap_hit = false;
  std::vector<std::string> branch_errors;
  std::vector<std::string> warnings;
};

struct NiceSet {
  NiceSetParams params;                  ///< r is the radius finally used
  std::vector<PullbackCell> cells;       ///< pullbacks of B(z, r) merged into the set
  Region region;
  double theta = 0.0;
  bool theta_vacuous = false;
  std::vector<PullbackCell> return_cells;  ///< first-return pullbacks of the region
  NiceDiagnostics diagnostics;
};

/// Pullback context for cells of the region U of a nice set.
PullbackContext nice_context(const DynamicalMap& map, const NiceSetParams& params, int resolution);

NiceSet construct_nice_set(const DynamicalMap& map, const NiceSetParams& params, const PostSingularCloud& cloud);

struct FirstReturnSearch {
  std::vector<PullbackCell> components;
  int depth_reached = 0;
  bool cap_hit = false;
  std::size_t visited = 0;
  std::size_t pruned = 0;
  std::size_t anomalies = 0;  ///< cells whose vertices disagree with the centre classification
  std::vector<std::string> branch_errors;
};

/// Pullbacks V of U with V inside U and f^k(V) disjoint from U for 0 < k < n.
/// Cells disjoint from U are expanded; enumeration stops at a complete depth
/// once `max_components` would be exceeded.
FirstReturnSearch first_return_cells(const DynamicalMap& map, const Region& U, const NiceSetParams& params,
                                     int max_depth, std::size_t max_components, double min_diameter,
                                     int resolution = 256);

struct NicenessViolation {
  cplx boundary_point{};
  int iterate = 0;
  cplx landing{};
};

struct NicenessReport {
  int n_checked = 0;
  int samples = 0;
  std::vector<NicenessViolation> violations;
  std::size_t indeterminate = 0;
  std::size_t escaped = 0;
  bool pass() const { return violations.empty(); }
};

/// Landings strictly inside U count as violations only when they clear the
/// propagated boundary error tol + |Df^n| * boundary_accuracy; otherwise the
/// sample is indeterminate.
NicenessReport verify_niceness(const DynamicalMap& map, const Region& U, double boundary_accuracy, int n_check,
                               int samples);
NicenessReport verify_niceness(const DynamicalMap& map, const NiceSet& U, int n_check, int samples);

struct InclusionReport {
  bool inner_ok = true;
  bool outer_ok = true;
  std::optional<cplx> witness;
  double max_radius = 0.0;
  bool pass() const { return inner_ok && outer_ok; }
};

InclusionReport verify_inclusion(const Region& U, cplx center, double r, double kappa, int samples);
InclusionReport verify_inclusion(const NiceSet& U, int samples);

struct ExpansionReport {
  double theta = 0.0;
  bool vacuous = false;
  std::size_t n_cells = 0;
  bool pass() const { return vacuous || theta > 1.0; }
};

ExpansionReport verify_expansion(const std::vector<PullbackCell>& return_cells);
ExpansionReport verify_expansion(const NiceSet& U);

/// All pullback cells of U up to `depth` (depth 0 gives U itself).
std::vector<PullbackCell> pullback_cells_of(const DynamicalMap& map, const NiceSet& U, int depth,
                                            std::vector<std::string>* errors = nullptr);

/// Mutation used to exercise the niceness check: moves `fraction` of the
/// boundary vertices, the ones nearest the largest return cell, into it.
Region corrupt_boundary(const NiceSet& U, double fraction);

}  // namespace nicedyn

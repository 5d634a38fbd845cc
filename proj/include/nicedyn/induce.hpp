#pragma once

#include <string>
#include <vector>

#include "nicedyn/nice.hpp"

namespace nicedyn {

/// Reference measure used for masses: planar area, or one-dimensional
/// Lebesgue measure on the real axis for real maps whose Julia set lies in R.
enum class Support { planar, real_line };
std::string to_string(Support s);
Support support_from_string(const std::string& s);

/// Reference mass of a region.
double reference_mass(const Region& region, Support support);

struct ReturnComponent {
  Region domain;
  int return_time = 0;
  BranchWord word;
  cplx center{};
  double deriv_min = 0.0, deriv_max = 0.0;  ///< euclidean |Df^r| over the domain
  double distortion_bound = 1.0;
  double koebe_s = 0.0;
  double mass = 0.0;       ///< reference mass of the domain
  bool point_mass = false; ///< diameter below geometric tolerance
};

struct ReturnCaps {
  int t_max = 40;
  std::size_t max_components = 5000;
};

/// Finds the component containing a point.
class ComponentLocator {
 public:
  ComponentLocator() = default;
  ComponentLocator(const std::vector<ReturnComponent>& components, Support support, const Box& bounds);
  /// Index of the component containing p, or -1.
  long locate(cplx p, const std::vector<ReturnComponent>& components) const;

 private:
  Support support_ = Support::planar;
  // real_line: sorted disjoint intervals with their component
  std::vector<double> lo_, hi_;
  std::vector<long> owner_;
  // planar: bucket grid of candidate components
  Box bounds_;
  int n_ = 0;
  std::vector<std::vector<long>> buckets_;
};

struct ReturnMap {
  Region base;
  cplx center{};
  double R = 0.0;
  Support support = Support::planar;
  double base_mass = 0.0;
  std::vector<ReturnComponent> components;
  ReturnCaps caps;
  double captured_mass_fraction = 0.0;
  int depth_reached = 0;
  bool cap_hit = false;
  std::size_t anomalies = 0;
  std::vector<std::string> warnings;
  ComponentLocator locator;

  long locate(cplx p) const { return locator.locate(p, components); }
  double max_distortion() const;
};

/// Koebe distortion constant ((1+s)/(1-s))^4; s >= 1 throws "no Koebe buffer".
double koebe_constant(double s);
double distortion_bound(const ReturnComponent& c);

ReturnMap first_return_components(const DynamicalMap& map, const NiceSet& U, const ReturnCaps& caps,
                                  Support support);

/// Assembles a return map from already computed first-return cells.
ReturnMap assemble_return_map(const Region& base, cplx center, double R, Support support,
                              std::vector<PullbackCell> cells, const ReturnCaps& caps);

/// Applies the first-return map: f^{r_c}(z). Returns false if z is in no component.
bool apply_return(const DynamicalMap& map, const ReturnMap& rm, cplx z, cplx& image, long* component = nullptr);

struct ForwardMismatch {
  cplx point{};
  long component = -1;
  int expected = 0;
  int observed = 0;
};

struct ForwardValidation {
  std::size_t points = 0;
  std::size_t in_components = 0;
  std::size_t agree = 0;
  std::size_t escaping = 0;      ///< in no component and no return within t_max
  std::size_t unmatched = 0;     ///< in no component yet returning within the enumerated depth
  std::vector<ForwardMismatch> mismatches;
  double agreement() const { return in_components ? double(agree) / in_components : 1.0; }
};

/// Forward-iteration cross-check on a grid of about `grid_points` points of U.
ForwardValidation validate_return_forward(const DynamicalMap& map, const ReturnMap& rm, std::size_t grid_points);

/// Sample points of U: equispaced on U ∩ R (real_line) or a square grid (planar).
std::vector<cplx> grid_points_in(const Region& U, Support support, std::size_t count);

struct ConformalSpec {
  double t = 2.0;
  double p = 0.0;
  MetricTag metric = MetricTag::euclidean;
};

/// exp(p r) |Df^r(z)|_rho^t for the component containing z.
double return_jacobian(const DynamicalMap& map, const ReturnComponent& c, const ConformalSpec& spec, cplx z);

}  // namespace nicedyn

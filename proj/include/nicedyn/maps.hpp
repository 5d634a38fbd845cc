#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "nicedyn/polynomial.hpp"

namespace nicedyn {

/// A point of the Riemann sphere: a finite complex value or the single
/// canonical point at infinity.
class SpherePoint {
 public:
  SpherePoint() = default;
  SpherePoint(cplx v);  // NOLINT: implicit from finite values is convenient
  static SpherePoint infinity();

  bool is_infinite() const { return infinite_; }
  bool is_finite() const { return !infinite_; }
  /// Finite value; throws Error("infinite point") on infinity.
  cplx value() const;

  bool operator==(const SpherePoint& o) const {
    return infinite_ == o.infinite_ && (infinite_ || value_ == o.value_);
  }

 private:
  cplx value_{};
  bool infinite_ = false;
};

/// Chordal distance on the sphere (in [0, 2]); used for deduplication.
double chordal_distance(const SpherePoint& a, const SpherePoint& b);

enum class MetricTag { euclidean, spherical };

enum class SingularKind { critical, asymptotic };

struct SingularValue {
  SpherePoint point;
  SingularKind kind;
};

struct Pole {
  SpherePoint location;
  int order = 1;
};

/// Sheet chosen at each inverse step. For rational maps: index into the
/// preimages of the current point sorted by (re, im). For tangent maps: the
/// integer k of arctan(w / lambda) + k pi.
struct BranchWord {
  std::vector<long> steps;
  std::size_t depth() const { return steps.size(); }
  bool operator==(const BranchWord&) const = default;
};

/// Disk in the plane.
struct Disk {
  cplx center{};
  double radius = 0.0;
};

/// Restricts the enumeration of tangent-family sheets: either explicitly to
/// |k| <= k_cap or to the sheets whose preimage falls in a disk.
struct BranchWindow {
  std::optional<Disk> disk;
  std::optional<int> k_cap;
};

class DynamicalMap {
 public:
  enum class Kind { rational, tangent };

  /// Rational map num/den (ascending coefficients). Rejects common roots and
  /// degree below `min_degree` (2 for genuine dynamics; synthetic test maps
  /// like 2z or 1/z pass min_degree = 1).
  static DynamicalMap rational(std::vector<cplx> num, std::vector<cplx> den,
                               int min_degree = 2);
  /// lambda * tan(z). Pole window and sheet cap both use k_max.
  static DynamicalMap tangent(cplx lambda, int k_max = 64);

  Kind kind() const { return kind_; }
  bool is_rational() const { return kind_ == Kind::rational; }
  int degree() const { return degree_; }
  const Polynomial& numerator() const { return num_; }
  const Polynomial& denominator() const { return den_; }
  cplx lambda() const { return lambda_; }
  int k_max() const { return k_max_; }

  const std::vector<Pole>& poles() const { return poles_; }
  const std::vector<SingularValue>& singular_values() const { return singular_; }
  const std::vector<SpherePoint>& omitted_values() const { return omitted_; }
  /// Finite critical points (rational kind); empty for tangent.
  const std::vector<cplx>& critical_points() const { return critical_points_; }

  // Fast finite-plane kernels. Near poles they return non-finite values.
  cplx value(cplx z) const;
  cplx derivative(cplx z) const;
  void value_and_derivative(cplx z, cplx& f, cplx& df) const;
  /// Numerically stable log|f(z) - a|. For the tangent family and a = +-i
  /// lambda this avoids the cancellation in tan(z) -> +-i as |Im z| grows.
  double log_abs_difference(cplx z, cplx a) const;
  /// Distance from z to the nearest finite pole (tangent: closed form).
  double distance_to_pole(cplx z) const;
  bool is_omitted(cplx w, double tol = 1e-12) const;

  /// Preimages of a finite w, sorted by the sheet identifier convention of
  /// BranchWord. Rational: all roots of num - w den (count = degree when
  /// w != f(infinity)). Tangent: sheets selected by the window.
  std::vector<std::pair<cplx, long>> preimages(cplx w, const BranchWindow& window) const;

 private:
  DynamicalMap() = default;
  void analyse_rational();
  void analyse_tangent();

  Kind kind_ = Kind::rational;
  Polynomial num_, den_, dnum_, dden_;
  cplx lambda_{1.0, 0.0};
  int k_max_ = 64;
  int degree_ = 0;
  std::vector<Pole> poles_;
  std::vector<SingularValue> singular_;
  std::vector<SpherePoint> omitted_;
  std::vector<cplx> critical_points_;
};

struct Evaluation {
  SpherePoint value;
  bool overflow = false;
};

/// f(z) on the sphere. Rational maps at infinity use degree comparison.
/// Tangent kind at infinity throws Error("essential singularity").
Evaluation evaluate(const DynamicalMap& map, const SpherePoint& z);

struct DerivativeValue {
  double norm = 0.0;                 ///< |Df|_rho, may be +inf
  std::optional<cplx> complex_value; ///< f'(z) when euclidean and finite
};

/// |Df(z)| in the requested metric. Euclidean rejects infinity.
DerivativeValue derivative(const DynamicalMap& map, const SpherePoint& z, MetricTag metric);

struct PostSingularCloud {
  std::vector<SpherePoint> points;
  int depth = 0;
  bool truncated = false;       ///< cap reached or an orbit left the numeric range
  std::string truncation_note;

  std::vector<cplx> finite_points() const;
  bool contains_infinity() const;
};

/// Union of forward orbits of the singular values up to `depth` iterations.
PostSingularCloud post_singular_orbit(const DynamicalMap& map, int depth, std::size_t cap = 10000);

struct InverseImage {
  SpherePoint point;
  BranchWord word;  // depth 1
};

struct InverseImageResult {
  std::vector<InverseImage> images;
  bool omitted = false;
  double max_residual = 0.0;
};

/// Depth-one inverse images of w with their sheet identifiers.
InverseImageResult inverse_images(const DynamicalMap& map, const SpherePoint& w,
                                  const BranchWindow& window = {});

}  // namespace nicedyn

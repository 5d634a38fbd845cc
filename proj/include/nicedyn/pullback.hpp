#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nicedyn/geometry.hpp"
#include "nicedyn/maps.hpp"

namespace nicedyn {

/// A pullback g_word(base) of a base region under an inverse branch of f^n.
/// Besides the polygon, the cell keeps per-vertex data needed to continue the
/// branch one more step: the base point each vertex maps to under f^n and
/// log|Df^n| there, plus a spoke joining the image of the base centre to
/// vertex 0, used to fix the starting sheet of the continuation.
struct PullbackCell {
  Region region;
  BranchWord word;
  int depth = 0;
  double deriv_min = 1.0;  ///< lower bound on |Df^depth| over the cell
  double deriv_max = 1.0;

  cplx center{};                 ///< g_word(base centre)
  double log_deriv_center = 0.0; ///< euclidean log|Df^n| at the centre
  std::vector<cplx> base;        ///< f^n(vertex i)
  std::vector<double> log_deriv; ///< euclidean log|Df^n(vertex i)|
  std::vector<cplx> spoke;       ///< from center to vertex 0 (inclusive)
  std::vector<cplx> spoke_base;
};

/// Fixed data of the base region all cells are pulled back from.
struct PullbackContext {
  cplx center{};
  double R = 1.0;               ///< Koebe buffer radius: branches are univalent on B(center, R)
  double koebe_s = 0.0;         ///< max |base vertex - center| / R
  double base_diameter = 1.0;
  int resolution = 512;
  int min_vertices = 32;
  MetricTag metric = MetricTag::spherical;
  BranchWindow window;          ///< tangent sheets considered at each step
};

/// Root cell for the base disk B(center, radius) sampled at ctx.resolution points.
PullbackCell disk_cell(const Disk& base, PullbackContext& ctx);
/// Root cell for an arbitrary region containing ctx.center, resampled to ctx.resolution points.
PullbackCell region_cell(const Region& base, PullbackContext& ctx);

/// One more inverse step on the given sheet of the parent's centre.
/// Errors: "monodromy" when the continuation cannot be kept on one sheet,
/// "branch undefined" when the path runs into a pole.
PullbackCell pull_back(const DynamicalMap& map, const PullbackCell& parent, long sheet,
                       const PullbackContext& ctx);

/// Sheet identifiers available above the parent's centre.
std::vector<long> sheets_of(const DynamicalMap& map, const PullbackCell& parent, const PullbackContext& ctx);

/// g_word(B(z, r)) for a full word; the empty word returns the disk itself.
PullbackCell pullback_disk(const DynamicalMap& map, const BranchWord& word, const Disk& base, int resolution,
                           double R, MetricTag metric = MetricTag::euclidean);

/// g_word(w) for a point w of B(center, R): the segment center -> w is
/// continued through every step of the word.
cplx pull_point(const DynamicalMap& map, const BranchWord& word, cplx center, cplx w,
                const BranchWindow& window = {});

/// Metric conversion of a euclidean log|Df^n| given the point and its image.
double metric_log_deriv(double log_euclid, cplx x, cplx image, MetricTag metric);

struct Decision {
  bool record = false;
  bool expand = false;
};

struct BfsLimits {
  int max_depth = 24;
  std::size_t max_cells = 200000;     ///< bound on the frontier / record size
  std::size_t max_records = 200000;
};

struct BfsResult {
  std::vector<PullbackCell> records;
  int depth_reached = 0;
  bool cap_hit = false;
  std::size_t visited = 0;
  std::vector<std::string> branch_errors;
};

/// Level-by-level enumeration of pullbacks of `root`. `decide` is called on
/// every child; recorded cells are returned in deterministic word order.
BfsResult breadth_first_pullbacks(const DynamicalMap& map, const PullbackCell& root, const PullbackContext& ctx,
                                  const BfsLimits& limits,
                                  const std::function<Decision(const PullbackCell&)>& decide);

}  // namespace nicedyn

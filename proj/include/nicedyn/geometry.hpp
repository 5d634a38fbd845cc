#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nicedyn/maps.hpp"

namespace nicedyn {

/// Planar region bounded by a closed, positively oriented polyline
/// (first vertex repeated at the end). Holes found during contour
/// extraction are kept separately so they can be filled later.
struct Region {
  std::vector<cplx> boundary;
  std::vector<std::vector<cplx>> holes;

  /// Number of distinct boundary vertices.
  std::size_t size() const { return boundary.empty() ? 0 : boundary.size() - 1; }
};

/// Closes the polyline, orients it positively and rejects degenerate input.
Region make_region(std::vector<cplx> vertices);
Region disk_region(cplx center, double radius, int samples);

struct Box {
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;

  bool intersects(const Box& o) const {
    return xmin <= o.xmax && o.xmin <= xmax && ymin <= o.ymax && o.ymin <= ymax;
  }
  bool contains(cplx p) const {
    return p.real() >= xmin && p.real() <= xmax && p.imag() >= ymin && p.imag() <= ymax;
  }
  double diagonal() const;
  Box inflated(double d) const { return {xmin - d, xmax + d, ymin - d, ymax + d}; }
};

Box bounding_box(const Region& region);
Box bounding_box(std::span<const cplx> points);

double signed_area(std::span<const cplx> closed);
/// Area of the outer boundary minus holes.
double area(const Region& region);
double perimeter(const Region& region);
double diameter(const Region& region);
/// Containment tolerance band: 1e-9 * diameter.
double tol_geom(const Region& region);

enum class Containment { inside, outside, indeterminate };

/// Winding-number containment. Points within `tol` of the boundary are
/// indeterminate. The default tolerance is tol_geom(region).
Containment contains(const Region& region, cplx p);
Containment contains(const Region& region, cplx p, double tol);
/// Distance from p to the nearest boundary segment (outer and holes).
double boundary_distance(const Region& region, cplx p);

enum class PairRelation { disjoint, a_inside_b, b_inside_a, identical, overlapping };
std::string to_string(PairRelation r);

/// Nested / disjoint / identical / overlapping. The area of each region lying
/// outside (inside) the other is sampled on a grid; fractions below 1e-3 count
/// as empty, so boundary contact within numerical accuracy is not overlap.
PairRelation classify_pair(const Region& a, const Region& b);

struct RasterOptions {
  int resolution = 1024;
  int max_resolution = 2048;
  double length_tol = 0.01;
  /// Pixels are marked when their centre lies within this many pixel widths
  /// of a cell, so the traced region contains the exact union.
  double dilation_pixels = 1.4142135623730951;
  std::optional<Box> clip;
};

struct UnionResult {
  Region region;  ///< outer contour plus holes
  double pixel = 0.0;
  int resolution = 0;
  double boundary_length = 0.0;
};

/// Indices of the cells connected to the one containing `seed`, where two
/// cells are adjacent when their interiors overlap.
std::vector<std::size_t> overlap_component(std::span<const Region> cells, cplx seed);

/// Connected component of the union of `cells` containing `seed`: members
/// from overlap_component, drawn on a raster and traced.
UnionResult union_component_detailed(std::span<const Region> cells, cplx seed,
                                     const RasterOptions& options = {});
Region union_component(std::span<const Region> cells, cplx seed, const RasterOptions& options = {});

/// Smallest simply connected superset: the outer contour alone.
Region fill_simply_connected(const Region& region);

struct CloudDistance {
  double value = 0.0;
  bool empty_cloud = false;
};

/// Minimum distance between boundary vertices and the finite cloud points
/// (zero if a cloud point lies inside the region).
CloudDistance distance(const Region& region, const PostSingularCloud& cloud);

/// Symmetric vertex-to-polyline Hausdorff distance.
double hausdorff_distance(const Region& a, const Region& b);

/// n points equally spaced by arclength along the outer boundary (open list).
std::vector<cplx> resample_boundary(const Region& region, int n);

/// Intervals of the real axis lying inside the region (even-odd over all loops).
std::vector<std::pair<double, double>> real_axis_intervals(const Region& region);

/// Uniform partition of a region used by the Ulam discretisation. In the
/// one-dimensional variant the cells are intervals of the real axis clipped
/// to the region; otherwise they are h x h squares whose centre is inside.
struct GridPartition {
  Box bounds;
  double h = 0.0;
  bool one_dimensional = false;
  std::vector<Box> cells;

  std::size_t size() const { return cells.size(); }
  cplx center(std::size_t j) const {
    const Box& b = cells[j];
    return {0.5 * (b.xmin + b.xmax), 0.5 * (b.ymin + b.ymax)};
  }
  /// Nominal (un-clipped in 2D) reference mass of the cell.
  double nominal_mass(std::size_t j) const {
    const Box& b = cells[j];
    return one_dimensional ? (b.xmax - b.xmin) : (b.xmax - b.xmin) * (b.ymax - b.ymin);
  }
  /// Index of the cell containing p, or -1.
  long locate(cplx p) const;

  std::vector<long> index_;  // row-major lookup, -1 for unoccupied
  int nx = 0, ny = 0;
};

GridPartition make_grid_partition(const Region& region, double h, bool one_dimensional);

}  // namespace nicedyn

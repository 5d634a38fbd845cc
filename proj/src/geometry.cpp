#include "nicedyn/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "nicedyn/error.hpp"

namespace nicedyn {

namespace {

double segment_distance(cplx p, cplx a, cplx b) {
  cplx d = b - a;
  double len2 = std::norm(d);
  double t = len2 > 0 ? std::clamp(((p - a) * std::conj(d)).real() / len2, 0.0, 1.0) : 0.0;
  return std::abs(p - (a + t * d));
}

// Sunday's winding number; loop given closed.
int winding(std::span<const cplx> loop, cplx p) {
  int w = 0;
  for (std::size_t i = 0; i + 1 < loop.size(); ++i) {
    cplx a = loop[i], b = loop[i + 1];
    double cross = (b.real() - a.real()) * (p.imag() - a.imag()) -
                   (p.real() - a.real()) * (b.imag() - a.imag());
    if (a.imag() <= p.imag()) {
      if (b.imag() > p.imag() && cross > 0) ++w;
    } else if (b.imag() <= p.imag() && cross < 0) {
      --w;
    }
  }
  return w;
}

double loop_distance(std::span<const cplx> loop, cplx p) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < loop.size(); ++i)
    best = std::min(best, segment_distance(p, loop[i], loop[i + 1]));
  return best;
}

double loop_length(std::span<const cplx> loop) {
  double s = 0;
  for (std::size_t i = 0; i + 1 < loop.size(); ++i) s += std::abs(loop[i + 1] - loop[i]);
  return s;
}

std::vector<cplx> close_positive(std::vector<cplx> v) {
  if (v.size() >= 2 && v.front() == v.back()) v.pop_back();
  v.push_back(v.front());
  if (signed_area(v) < 0) std::reverse(v.begin(), v.end());
  return v;
}

// Binary raster with out-of-range reads returning false.
struct Mask {
  int nx = 0, ny = 0;
  std::vector<unsigned char> bits;
  Mask(int x, int y) : nx(x), ny(y), bits(static_cast<std::size_t>(x) * y, 0) {}
  bool at(int i, int j) const {
    return i >= 0 && j >= 0 && i < nx && j < ny && bits[static_cast<std::size_t>(j) * nx + i];
  }
  void set(int i, int j, unsigned char v = 1) { bits[static_cast<std::size_t>(j) * nx + i] = v; }
};

struct Grid {
  double x0, y0, p;
  int nx, ny;
  cplx pixel_center(int i, int j) const { return {x0 + (i + 0.5) * p, y0 + (j + 0.5) * p}; }
  cplx corner(int i, int j) const { return {x0 + i * p, y0 + j * p}; }
};

void rasterize_loop(std::span<const cplx> loop, const Grid& g, double dilation, Mask& m) {
  Box bb = bounding_box(loop);
  int j0 = std::max(0, static_cast<int>(std::floor((bb.ymin - g.y0) / g.p - 0.5)));
  int j1 = std::min(g.ny - 1, static_cast<int>(std::ceil((bb.ymax - g.y0) / g.p - 0.5)));
  std::vector<double> xs;
  for (int j = j0; j <= j1; ++j) {
    double y = g.y0 + (j + 0.5) * g.p;
    xs.clear();
    for (std::size_t k = 0; k + 1 < loop.size(); ++k) {
      cplx a = loop[k], b = loop[k + 1];
      if ((a.imag() <= y && b.imag() > y) || (b.imag() <= y && a.imag() > y)) {
        double t = (y - a.imag()) / (b.imag() - a.imag());
        xs.push_back(a.real() + t * (b.real() - a.real()));
      }
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      int i0 = std::max(0, static_cast<int>(std::ceil((xs[k] - g.x0) / g.p - 0.5)));
      int i1 = std::min(g.nx - 1, static_cast<int>(std::floor((xs[k + 1] - g.x0) / g.p - 0.5)));
      for (int i = i0; i <= i1; ++i) m.set(i, j);
    }
  }
  // Dilate along the edges so thin parts and shared boundaries stay connected.
  for (std::size_t k = 0; k + 1 < loop.size(); ++k) {
    cplx a = loop[k], b = loop[k + 1];
    double xmin = std::min(a.real(), b.real()) - dilation, xmax = std::max(a.real(), b.real()) + dilation;
    double ymin = std::min(a.imag(), b.imag()) - dilation, ymax = std::max(a.imag(), b.imag()) + dilation;
    int i0 = std::max(0, static_cast<int>(std::floor((xmin - g.x0) / g.p - 0.5)));
    int i1 = std::min(g.nx - 1, static_cast<int>(std::ceil((xmax - g.x0) / g.p - 0.5)));
    int jj0 = std::max(0, static_cast<int>(std::floor((ymin - g.y0) / g.p - 0.5)));
    int jj1 = std::min(g.ny - 1, static_cast<int>(std::ceil((ymax - g.y0) / g.p - 0.5)));
    for (int j = jj0; j <= jj1; ++j)
      for (int i = i0; i <= i1; ++i)
        if (!m.at(i, j) && segment_distance(g.pixel_center(i, j), a, b) <= dilation) m.set(i, j);
  }
}

// 4-connected flood from (si, sj) over pixels where `m` equals `value`.
Mask flood(const Mask& m, int si, int sj, bool value) {
  Mask out(m.nx, m.ny);
  std::vector<std::pair<int, int>> stack{{si, sj}};
  out.set(si, sj);
  while (!stack.empty()) {
    auto [i, j] = stack.back();
    stack.pop_back();
    const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      int a = i + di[k], b = j + dj[k];
      if (a < 0 || b < 0 || a >= m.nx || b >= m.ny) continue;
      if (out.at(a, b) || m.at(a, b) != value) continue;
      out.set(a, b);
      stack.push_back({a, b});
    }
  }
  return out;
}

// Complement pixels not connected to the frame.
Mask holes_of(const Mask& filled) {
  // Pad by one pixel so the complement is connected around the frame.
  Mask padded(filled.nx + 2, filled.ny + 2);
  for (int j = 0; j < filled.ny; ++j)
    for (int i = 0; i < filled.nx; ++i)
      if (filled.at(i, j)) padded.set(i + 1, j + 1);
  Mask outside = flood(padded, 0, 0, false);
  Mask holes(filled.nx, filled.ny);
  for (int j = 0; j < filled.ny; ++j)
    for (int i = 0; i < filled.nx; ++i)
      if (!filled.at(i, j) && !outside.at(i + 1, j + 1)) holes.set(i, j);
  return holes;
}

// Remove diagonal-only contacts so the contour is a simple curve.
void fix_pinches(Mask& m) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (int j = 0; j + 1 < m.ny; ++j)
      for (int i = 0; i + 1 < m.nx; ++i) {
        bool a = m.at(i, j), b = m.at(i + 1, j), c = m.at(i, j + 1), d = m.at(i + 1, j + 1);
        if ((a && d && !b && !c) || (b && c && !a && !d)) {
          m.set(i, j);
          m.set(i + 1, j);
          m.set(i, j + 1);
          m.set(i + 1, j + 1);
          changed = true;
        }
      }
  }
}

// Crack-following trace of the outer contour of a 4-connected blob;
// returns midpoints of the traversed pixel edges as a closed CCW loop.
std::vector<cplx> trace(const Mask& m, const Grid& g) {
  int si = -1, sj = -1;
  for (int j = 0; j < m.ny && si < 0; ++j)
    for (int i = 0; i < m.nx; ++i)
      if (m.at(i, j)) {
        si = i;
        sj = j;
        break;
      }
  if (si < 0) throw Error("degenerate region", "empty raster");
  const int dx[4] = {1, 0, -1, 0}, dy[4] = {0, 1, 0, -1};
  auto ahead = [&](int x, int y, int d, bool left) -> bool {
    switch (d) {
      case 0: return left ? m.at(x, y) : m.at(x, y - 1);
      case 1: return left ? m.at(x - 1, y) : m.at(x, y);
      case 2: return left ? m.at(x - 1, y - 1) : m.at(x - 1, y);
      default: return left ? m.at(x, y - 1) : m.at(x - 1, y - 1);
    }
  };
  std::vector<cplx> pts;
  int x = si, y = sj, d = 0;
  const std::size_t limit = 4 * static_cast<std::size_t>(m.nx + 2) * (m.ny + 2);
  for (std::size_t step = 0; step < limit; ++step) {
    pts.push_back(0.5 * (g.corner(x, y) + g.corner(x + dx[d], y + dy[d])));
    x += dx[d];
    y += dy[d];
    if (!ahead(x, y, d, true)) d = (d + 1) % 4;
    else if (ahead(x, y, d, false)) d = (d + 3) % 4;
    if (x == si && y == sj && d == 0) break;
  }
  pts.push_back(pts.front());
  return pts;
}

}  // namespace

double Box::diagonal() const { return std::hypot(xmax - xmin, ymax - ymin); }

double signed_area(std::span<const cplx> closed) {
  double s = 0;
  for (std::size_t i = 0; i + 1 < closed.size(); ++i)
    s += closed[i].real() * closed[i + 1].imag() - closed[i + 1].real() * closed[i].imag();
  return 0.5 * s;
}

Region make_region(std::vector<cplx> vertices) {
  if (vertices.size() >= 2 && vertices.front() == vertices.back()) vertices.pop_back();
  if (vertices.size() < 3) throw Error("degenerate region", "fewer than three vertices");
  for (cplx v : vertices)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw Error("degenerate region", "non-finite vertex");
  Region r;
  r.boundary = close_positive(std::move(vertices));
  if (std::abs(signed_area(r.boundary)) <= 0.0) throw Error("degenerate region", "zero area");
  return r;
}

Region disk_region(cplx center, double radius, int samples) {
  std::vector<cplx> v(samples);
  for (int k = 0; k < samples; ++k)
    v[k] = center + std::polar(radius, 2 * std::numbers::pi * k / samples);
  return make_region(std::move(v));
}

Box bounding_box(std::span<const cplx> points) {
  Box b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
        std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (cplx p : points) {
    b.xmin = std::min(b.xmin, p.real());
    b.xmax = std::max(b.xmax, p.real());
    b.ymin = std::min(b.ymin, p.imag());
    b.ymax = std::max(b.ymax, p.imag());
  }
  return b;
}

Box bounding_box(const Region& region) { return bounding_box(std::span<const cplx>(region.boundary)); }

double area(const Region& region) {
  double a = std::abs(signed_area(region.boundary));
  for (const auto& h : region.holes) a -= std::abs(signed_area(h));
  return a;
}

double perimeter(const Region& region) {
  double s = loop_length(region.boundary);
  for (const auto& h : region.holes) s += loop_length(h);
  return s;
}

double diameter(const Region& region) {
  // Convex hull (monotone chain), then the farthest pair on the hull.
  std::vector<cplx> p(region.boundary.begin(), region.boundary.end());
  if (!p.empty()) p.pop_back();
  auto less = [](cplx a, cplx b) { return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag()); };
  std::sort(p.begin(), p.end(), less);
  p.erase(std::unique(p.begin(), p.end()), p.end());
  if (p.size() < 2) return 0.0;
  auto cross = [](cplx o, cplx a, cplx b) {
    return (a.real() - o.real()) * (b.imag() - o.imag()) - (a.imag() - o.imag()) * (b.real() - o.real());
  };
  std::vector<cplx> hull(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p[i]) <= 0) --k;
    hull[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], p[i]) <= 0) --k;
    hull[k++] = p[i];
  }
  hull.resize(k - 1);
  double best = 0;
  for (std::size_t i = 0; i < hull.size(); ++i)
    for (std::size_t j = i + 1; j < hull.size(); ++j) best = std::max(best, std::abs(hull[i] - hull[j]));
  return best;
}

double tol_geom(const Region& region) { return 1e-9 * bounding_box(region).diagonal(); }

double boundary_distance(const Region& region, cplx p) {
  double d = loop_distance(region.boundary, p);
  for (const auto& h : region.holes) d = std::min(d, loop_distance(h, p));
  return d;
}

Containment contains(const Region& region, cplx p) { return contains(region, p, tol_geom(region)); }

Containment contains(const Region& region, cplx p, double tol) {
  if (!std::isfinite(p.real()) || !std::isfinite(p.imag())) return Containment::outside;
  Box bb = bounding_box(region);
  if (!bb.inflated(tol).contains(p)) return Containment::outside;
  if (boundary_distance(region, p) <= tol) return Containment::indeterminate;
  bool in = winding(region.boundary, p) != 0;
  for (const auto& h : region.holes)
    if (in && winding(h, p) != 0) in = false;
  return in ? Containment::inside : Containment::outside;
}

std::string to_string(PairRelation r) {
  switch (r) {
    case PairRelation::disjoint: return "disjoint";
    case PairRelation::a_inside_b: return "a_inside_b";
    case PairRelation::b_inside_a: return "b_inside_a";
    case PairRelation::identical: return "identical";
    case PairRelation::overlapping: return "overlapping";
  }
  return "unknown";
}

namespace {

// Fraction of the area of `a` lying outside `b` and inside `b`, estimated on
// a uniform grid of sample points over the bounding box of `a`.
std::pair<double, double> outside_inside_fraction(const Region& a, const Region& b) {
  constexpr int n = 48;
  Box bb = bounding_box(a);
  double tol = tol_geom(b);
  std::size_t in_a = 0, out_b = 0, in_b = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      cplx p{bb.xmin + (i + 0.5) * (bb.xmax - bb.xmin) / n, bb.ymin + (j + 0.5) * (bb.ymax - bb.ymin) / n};
      if (contains(a, p) != Containment::inside) continue;
      ++in_a;
      if (contains(b, p, tol) == Containment::outside) ++out_b;
      else ++in_b;
    }
  if (in_a == 0) return {0.0, 0.0};
  return {double(out_b) / in_a, double(in_b) / in_a};
}

}  // namespace

PairRelation classify_pair(const Region& a, const Region& b) {
  constexpr double tol = 1e-3;
  if (!bounding_box(a).intersects(bounding_box(b))) return PairRelation::disjoint;
  auto [a_out, a_in] = outside_inside_fraction(a, b);
  auto [b_out, b_in] = outside_inside_fraction(b, a);
  if (a_in <= tol && b_in <= tol) return PairRelation::disjoint;
  bool a_sub = a_out <= tol, b_sub = b_out <= tol;
  if (a_sub && b_sub) return PairRelation::identical;
  if (a_sub) return PairRelation::a_inside_b;
  if (b_sub) return PairRelation::b_inside_a;
  return PairRelation::overlapping;
}

namespace {

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) {
    for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

bool some_vertex_inside(const Region& a, const Region& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (contains(b, a.boundary[i]) == Containment::inside) return true;
  return false;
}

bool edges_cross(const Region& a, const Region& b, const Box& overlap) {
  auto orient = [](cplx p, cplx q, cplx r) {
    return (q.real() - p.real()) * (r.imag() - p.imag()) - (q.imag() - p.imag()) * (r.real() - p.real());
  };
  for (std::size_t i = 0; i + 1 < a.boundary.size(); ++i) {
    cplx p = a.boundary[i], q = a.boundary[i + 1];
    if (!overlap.intersects(bounding_box(std::span<const cplx>(&a.boundary[i], 2)))) continue;
    for (std::size_t j = 0; j + 1 < b.boundary.size(); ++j) {
      cplx r = b.boundary[j], t = b.boundary[j + 1];
      double d1 = orient(p, q, r), d2 = orient(p, q, t), d3 = orient(r, t, p), d4 = orient(r, t, q);
      if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
    }
  }
  return false;
}

// Open interiors intersect.
bool cells_overlap(const Region& a, const Region& b, const Box& ba, const Box& bb) {
  if (!ba.intersects(bb)) return false;
  if (some_vertex_inside(a, b) || some_vertex_inside(b, a)) return true;
  Box ov{std::max(ba.xmin, bb.xmin), std::min(ba.xmax, bb.xmax), std::max(ba.ymin, bb.ymin),
         std::min(ba.ymax, bb.ymax)};
  return edges_cross(a, b, ov);
}

}  // namespace

std::vector<std::size_t> overlap_component(std::span<const Region> cells, cplx seed) {
  std::vector<Box> boxes(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) boxes[i] = bounding_box(cells[i]);
  std::optional<std::size_t> start;
  for (std::size_t i = 0; i < cells.size() && !start; ++i)
    if (boxes[i].contains(seed) && contains(cells[i], seed) != Containment::outside) start = i;
  if (!start) throw Error("degenerate region", "seed not covered by any cell");
  std::vector<std::size_t> order(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return boxes[a].xmin < boxes[b].xmin || (boxes[a].xmin == boxes[b].xmin && a < b);
  });
  DisjointSets sets(cells.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    std::size_t i = order[k];
    for (std::size_t l = k + 1; l < order.size() && boxes[order[l]].xmin <= boxes[i].xmax; ++l) {
      std::size_t j = order[l];
      if (boxes[j].ymin > boxes[i].ymax || boxes[i].ymin > boxes[j].ymax) continue;
      if (sets.find(i) == sets.find(j)) continue;
      if (cells_overlap(cells[i], cells[j], boxes[i], boxes[j])) sets.unite(i, j);
    }
  }
  std::vector<std::size_t> members;
  std::size_t root = sets.find(*start);
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (sets.find(i) == root) members.push_back(i);
  return members;
}

UnionResult union_component_detailed(std::span<const Region> all_cells, cplx seed, const RasterOptions& options) {
  if (all_cells.empty()) throw Error("degenerate region", "no cells to merge");
  // Connectivity comes from exact polygon overlap; the raster only draws the
  // members, so dilation can never bridge two separate components.
  std::vector<Region> member_cells;
  for (std::size_t i : overlap_component(all_cells, seed)) member_cells.push_back(all_cells[i]);
  std::span<const Region> cells(member_cells);
  Box box = bounding_box(cells[0]);
  for (const Region& c : cells) {
    Box b = bounding_box(c);
    box = {std::min(box.xmin, b.xmin), std::max(box.xmax, b.xmax), std::min(box.ymin, b.ymin),
           std::max(box.ymax, b.ymax)};
  }
  if (options.clip) {
    const Box& c = *options.clip;
    box = {std::max(box.xmin, c.xmin), std::min(box.xmax, c.xmax), std::max(box.ymin, c.ymin),
           std::min(box.ymax, c.ymax)};
  }
  double span = std::max(box.xmax - box.xmin, box.ymax - box.ymin);
  if (!(span > 0)) throw Error("degenerate region", "empty bounding box");
  box = box.inflated(0.02 * span);
  span *= 1.04;

  UnionResult result;
  double previous = -1.0;
  for (int res = options.resolution;; res *= 2) {
    Grid g{box.xmin, box.ymin, span / res, 0, 0};
    g.nx = static_cast<int>(std::ceil((box.xmax - box.xmin) / g.p)) + 1;
    g.ny = static_cast<int>(std::ceil((box.ymax - box.ymin) / g.p)) + 1;
    Mask m(g.nx, g.ny);
    double dil = options.dilation_pixels * g.p;
    Box view{g.x0, g.x0 + g.nx * g.p, g.y0, g.y0 + g.ny * g.p};
    for (const Region& c : cells)
      if (bounding_box(c).inflated(dil).intersects(view)) rasterize_loop(c.boundary, g, dil, m);

    int si = static_cast<int>(std::floor((seed.real() - g.x0) / g.p));
    int sj = static_cast<int>(std::floor((seed.imag() - g.y0) / g.p));
    if (si < 0 || sj < 0 || si >= g.nx || sj >= g.ny) throw Error("degenerate region", "seed outside raster");
    if (!m.at(si, sj)) {
      bool covered = false;
      for (const Region& c : cells)
        if (contains(c, seed) != Containment::outside) covered = true;
      if (!covered) throw Error("degenerate region", "seed not covered by any cell");
      m.set(si, sj);
    }
    Mask comp = flood(m, si, sj, true);
    Mask holes = holes_of(comp);
    for (std::size_t k = 0; k < comp.bits.size(); ++k) comp.bits[k] |= holes.bits[k];
    fix_pinches(comp);
    Mask hole_mask = holes;  // holes are reported, the outer contour is traced from the filled blob
    Region r;
    r.boundary = close_positive(trace(comp, g));
    // Trace each hole as its own blob.
    Mask remaining = hole_mask;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        if (remaining.at(i, j)) {
          Mask h = flood(remaining, i, j, true);
          for (std::size_t k = 0; k < h.bits.size(); ++k)
            if (h.bits[k]) remaining.bits[k] = 0;
          fix_pinches(h);
          r.holes.push_back(close_positive(trace(h, g)));
        }
    double length = loop_length(r.boundary);
    result.region = std::move(r);
    result.pixel = g.p;
    result.resolution = res;
    result.boundary_length = length;
    if (previous > 0 && std::abs(length - previous) <= options.length_tol * previous) break;
    if (res * 2 > options.max_resolution) break;
    previous = length;
  }
  return result;
}

Region union_component(std::span<const Region> cells, cplx seed, const RasterOptions& options) {
  return union_component_detailed(cells, seed, options).region;
}

Region fill_simply_connected(const Region& region) {
  Region r;
  r.boundary = region.boundary;
  return r;
}

CloudDistance distance(const Region& region, const PostSingularCloud& cloud) {
  CloudDistance out;
  auto pts = cloud.finite_points();
  if (pts.empty()) {
    out.value = std::numeric_limits<double>::infinity();
    out.empty_cloud = true;
    return out;
  }
  double best = std::numeric_limits<double>::infinity();
  for (cplx q : pts) {
    if (contains(region, q) != Containment::outside) return out;
    best = std::min(best, boundary_distance(region, q));
  }
  out.value = best;
  return out;
}

double hausdorff_distance(const Region& a, const Region& b) {
  double h = 0;
  for (std::size_t i = 0; i < a.size(); ++i) h = std::max(h, loop_distance(b.boundary, a.boundary[i]));
  for (std::size_t i = 0; i < b.size(); ++i) h = std::max(h, loop_distance(a.boundary, b.boundary[i]));
  return h;
}

std::vector<cplx> resample_boundary(const Region& region, int n) {
  const auto& loop = region.boundary;
  double total = loop_length(loop);
  std::vector<cplx> out;
  out.reserve(n);
  std::size_t seg = 0;
  double before = 0;
  for (int k = 0; k < n; ++k) {
    double s = total * k / n;
    while (seg + 2 < loop.size() && before + std::abs(loop[seg + 1] - loop[seg]) < s) {
      before += std::abs(loop[seg + 1] - loop[seg]);
      ++seg;
    }
    double len = std::abs(loop[seg + 1] - loop[seg]);
    double t = len > 0 ? std::clamp((s - before) / len, 0.0, 1.0) : 0.0;
    out.push_back(loop[seg] + t * (loop[seg + 1] - loop[seg]));
  }
  return out;
}

std::vector<std::pair<double, double>> real_axis_intervals(const Region& region) {
  std::vector<double> xs;
  auto scan = [&](const std::vector<cplx>& loop) {
    for (std::size_t i = 0; i + 1 < loop.size(); ++i) {
      cplx a = loop[i], b = loop[i + 1];
      bool au = a.imag() >= 0, bu = b.imag() >= 0;
      if (au != bu) xs.push_back(a.real() - a.imag() * (b.real() - a.real()) / (b.imag() - a.imag()));
    }
  };
  scan(region.boundary);
  for (const auto& h : region.holes) scan(h);
  std::sort(xs.begin(), xs.end());
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i + 1 < xs.size(); i += 2)
    if (xs[i + 1] > xs[i]) out.emplace_back(xs[i], xs[i + 1]);
  return out;
}

long GridPartition::locate(cplx p) const {
  if (one_dimensional) {
    if (std::abs(p.imag()) > 0) return -1;
    int i = static_cast<int>(std::floor((p.real() - bounds.xmin) / h));
    if (i < 0 || i >= nx) return -1;
    long j = index_[i];
    if (j < 0) return -1;
    const Box& b = cells[j];
    return (p.real() >= b.xmin && p.real() <= b.xmax) ? j : -1;
  }
  int i = static_cast<int>(std::floor((p.real() - bounds.xmin) / h));
  int k = static_cast<int>(std::floor((p.imag() - bounds.ymin) / h));
  if (i < 0 || k < 0 || i >= nx || k >= ny) return -1;
  return index_[static_cast<std::size_t>(k) * nx + i];
}

GridPartition make_grid_partition(const Region& region, double h, bool one_dimensional) {
  if (!(h > 0)) throw Error("degenerate region", "grid spacing must be positive");
  GridPartition g;
  g.h = h;
  g.one_dimensional = one_dimensional;
  if (one_dimensional) {
    auto iv = real_axis_intervals(region);
    if (iv.empty()) throw Error("degenerate region", "region does not meet the real axis");
    double lo = iv.front().first, hi = iv.back().second;
    g.bounds = {lo, hi, 0, 0};
    g.nx = std::max(1, static_cast<int>(std::ceil((hi - lo) / h)));
    g.ny = 1;
    g.index_.assign(g.nx, -1);
    for (int i = 0; i < g.nx; ++i) {
      double a = lo + i * h, b = std::min(hi, a + h);
      // Clip the cell to the interval containing its midpoint.
      double mid = 0.5 * (a + b);
      for (auto [s, t] : iv)
        if (mid >= s && mid <= t) {
          g.index_[i] = static_cast<long>(g.cells.size());
          g.cells.push_back({std::max(a, s), std::min(b, t), 0, 0});
          break;
        }
    }
    return g;
  }
  Box bb = bounding_box(region);
  g.bounds = bb;
  g.nx = std::max(1, static_cast<int>(std::ceil((bb.xmax - bb.xmin) / h)));
  g.ny = std::max(1, static_cast<int>(std::ceil((bb.ymax - bb.ymin) / h)));
  g.index_.assign(static_cast<std::size_t>(g.nx) * g.ny, -1);
  for (int k = 0; k < g.ny; ++k)
    for (int i = 0; i < g.nx; ++i) {
      Box c{bb.xmin + i * h, bb.xmin + (i + 1) * h, bb.ymin + k * h, bb.ymin + (k + 1) * h};
      cplx mid{0.5 * (c.xmin + c.xmax), 0.5 * (c.ymin + c.ymax)};
      if (contains(region, mid) == Containment::inside) {
        g.index_[static_cast<std::size_t>(k) * g.nx + i] = static_cast<long>(g.cells.size());
        g.cells.push_back(c);
      }
    }
  if (g.cells.empty()) throw Error("degenerate region", "no grid cell centre inside region");
  return g;
}

}  // namespace nicedyn

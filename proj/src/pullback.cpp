#include "nicedyn/pullback.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "nicedyn/error.hpp"
#include "nicedyn/parallel.hpp"

namespace nicedyn {

namespace {

constexpr int kSpokeSamples = 16;
constexpr int kMaxRefinements = 3;

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// Newton solve of f(y) = w from y.
cplx newton(const DynamicalMap& map, cplx w, cplx y) {
  for (int it = 0; it < 60; ++it) {
    if (map.distance_to_pole(y) <= 1e-12 * (1.0 + std::abs(y)))
      throw Error("branch undefined", "continuation reached a pole");
    cplx f, df;
    map.value_and_derivative(y, f, df);
    if (!finite(f) || !finite(df) || df == cplx{}) throw Error("branch undefined", "non-finite map value on path");
    cplx delta = (f - w) / df;
    y -= delta;
    if (std::abs(delta) <= 4e-16 * (1.0 + std::abs(y))) break;
  }
  cplx f = map.value(y);
  if (!finite(f) || std::abs(f - w) > 1e-9 * (1.0 + std::abs(w)))
    throw Error("root-finding non-convergence", "Newton step did not reach the path point");
  return y;
}

// Moves the preimage y of a onto the preimage of b on the same sheet.
cplx step(const DynamicalMap& map, cplx y, cplx a, cplx b, int level = 0) {
  cplx df = map.derivative(y);
  if (!finite(df) || df == cplx{}) throw Error("branch undefined", "derivative vanished on path");
  cplx predicted = y + (b - a) / df;
  cplx next = newton(map, b, predicted);
  double move = std::abs(next - y);
  if (move > 0 && std::abs(next - predicted) > 0.5 * move) {
    if (level >= kMaxRefinements)
      throw Error("monodromy", "preimage jumped between sheets after " + std::to_string(kMaxRefinements) +
                                   " refinements");
    cplx mid = 0.5 * (a + b);
    cplx y_mid = step(map, y, a, mid, level + 1);
    return step(map, y_mid, mid, b, level + 1);
  }
  return next;
}

std::vector<cplx> continue_path(const DynamicalMap& map, const std::vector<cplx>& path, cplx y0) {
  std::vector<cplx> out(path.size());
  out[0] = y0;
  for (std::size_t i = 1; i < path.size(); ++i) out[i] = step(map, out[i - 1], path[i - 1], path[i]);
  return out;
}

double largest_gap(const std::vector<cplx>& closed) {
  double g = 0;
  for (std::size_t i = 0; i + 1 < closed.size(); ++i) g = std::max(g, std::abs(closed[i + 1] - closed[i]));
  return g;
}

// Bounds on |Df^n| over the cell from vertex data plus Koebe control of
// log|Dg| between samples. Extremes of log|Dg| sit on the boundary since it
// is harmonic on the cell.
void set_bounds(PullbackCell& c, const PullbackContext& ctx) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < c.log_deriv.size(); ++i) {
    double v = metric_log_deriv(c.log_deriv[i], c.region.boundary[i], c.base[i], ctx.metric);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  std::vector<cplx> closed_base = c.base;
  closed_base.push_back(c.base.front());
  double s = std::min(ctx.koebe_s, 0.999);
  double eta = 0.5 * largest_gap(closed_base) * (2 * s + 4) / (ctx.R * (1 - s * s));
  c.deriv_min = std::exp(lo - eta);
  c.deriv_max = std::exp(hi + eta);
}

PullbackCell root_from_points(std::vector<cplx> pts, PullbackContext& ctx) {
  PullbackCell c;
  c.center = ctx.center;
  c.base = pts;
  c.log_deriv.assign(pts.size(), 0.0);
  Region r = make_region(pts);
  if (r.boundary.front() != pts.front()) throw Error("degenerate region", "base boundary must be positively oriented");
  c.region = std::move(r);
  for (int k = 0; k <= kSpokeSamples; ++k) c.spoke.push_back(ctx.center + (pts[0] - ctx.center) * (double(k) / kSpokeSamples));
  c.spoke_base = c.spoke;
  double s = 0;
  for (cplx p : pts) s = std::max(s, std::abs(p - ctx.center));
  ctx.koebe_s = s / ctx.R;
  if (ctx.koebe_s >= 1) throw Error("no Koebe buffer", "base region reaches the buffer radius R");
  ctx.base_diameter = diameter(c.region);
  return c;
}

}  // namespace

double metric_log_deriv(double log_euclid, cplx x, cplx image, MetricTag metric) {
  if (metric == MetricTag::euclidean) return log_euclid;
  return log_euclid + std::log1p(std::norm(x)) - std::log1p(std::norm(image));
}

PullbackCell disk_cell(const Disk& base, PullbackContext& ctx) {
  ctx.center = base.center;
  std::vector<cplx> pts(ctx.resolution);
  for (int k = 0; k < ctx.resolution; ++k)
    pts[k] = base.center + std::polar(base.radius, 2 * std::numbers::pi * k / ctx.resolution);
  return root_from_points(std::move(pts), ctx);
}

PullbackCell region_cell(const Region& base, PullbackContext& ctx) {
  if (contains(base, ctx.center) != Containment::inside)
    throw Error("degenerate region", "base centre must lie inside the base region");
  if (static_cast<int>(base.size()) == ctx.resolution) {
    // Reuse the vertices so pulled-back cells share the exact base polygon.
    return root_from_points(std::vector<cplx>(base.boundary.begin(), base.boundary.end() - 1), ctx);
  }
  return root_from_points(resample_boundary(base, ctx.resolution), ctx);
}

std::vector<long> sheets_of(const DynamicalMap& map, const PullbackCell& parent, const PullbackContext& ctx) {
  std::vector<long> ids;
  for (auto& [x, id] : map.preimages(parent.center, ctx.window)) ids.push_back(id);
  return ids;
}

PullbackCell pull_back(const DynamicalMap& map, const PullbackCell& parent, long sheet, const PullbackContext& ctx) {
  cplx yc{};
  bool found = false;
  for (auto& [x, id] : map.preimages(parent.center, ctx.window))
    if (id == sheet) {
      yc = x;
      found = true;
    }
  if (!found) throw Error("branch undefined", "no sheet " + std::to_string(sheet) + " above the cell centre");

  PullbackCell c;
  c.word = parent.word;
  c.word.steps.push_back(sheet);
  c.depth = parent.depth + 1;
  c.center = yc;
  c.log_deriv_center = parent.log_deriv_center + std::log(std::abs(map.derivative(yc)));
  c.spoke = continue_path(map, parent.spoke, yc);
  c.spoke_base = parent.spoke_base;

  const auto& path = parent.region.boundary;  // closed, starts at vertex 0
  std::vector<cplx> pts = continue_path(map, path, c.spoke.back());
  double scale = largest_gap(pts);
  if (std::abs(pts.back() - pts.front()) > std::max(1e-6 * scale, 1e-12 * (1.0 + std::abs(pts.front()))))
    throw Error("monodromy", "continuation around the boundary did not close");
  pts.pop_back();

  std::size_t n = pts.size();
  std::vector<double> logd(n);
  for (std::size_t i = 0; i < n; ++i) logd[i] = parent.log_deriv[i] + std::log(std::abs(map.derivative(pts[i])));
  std::vector<cplx> base = parent.base;

  // Small cells do not need the full resolution; Koebe keeps them round.
  Box bb = bounding_box(std::span<const cplx>(pts));
  double rel = bb.diagonal() / ctx.base_diameter;
  std::size_t target = std::max<std::size_t>(ctx.min_vertices, static_cast<std::size_t>(std::ceil(ctx.resolution * rel)));
  while (n > target && n % 2 == 0 && n / 2 >= static_cast<std::size_t>(ctx.min_vertices)) {
    for (std::size_t i = 0; i < n / 2; ++i) {
      pts[i] = pts[2 * i];
      logd[i] = logd[2 * i];
      base[i] = base[2 * i];
    }
    n /= 2;
    pts.resize(n);
    logd.resize(n);
    base.resize(n);
  }

  c.region.boundary = pts;
  c.region.boundary.push_back(pts.front());
  if (!(signed_area(c.region.boundary) > 0)) throw Error("degenerate region", "pulled-back boundary lost orientation");
  c.base = std::move(base);
  c.log_deriv = std::move(logd);
  set_bounds(c, ctx);
  return c;
}

PullbackCell pullback_disk(const DynamicalMap& map, const BranchWord& word, const Disk& base, int resolution,
                           double R, MetricTag metric) {
  PullbackContext ctx;
  ctx.R = R;
  ctx.resolution = resolution;
  ctx.min_vertices = resolution;  // keep every sample
  ctx.metric = metric;
  PullbackCell c = disk_cell(base, ctx);
  for (long s : word.steps) c = pull_back(map, c, s, ctx);
  return c;
}

cplx pull_point(const DynamicalMap& map, const BranchWord& word, cplx center, cplx w, const BranchWindow& window) {
  constexpr int samples = 64;
  std::vector<cplx> path(samples + 1);
  for (int k = 0; k <= samples; ++k) path[k] = center + (w - center) * (double(k) / samples);
  for (long s : word.steps) {
    cplx yc{};
    bool found = false;
    for (auto& [x, id] : map.preimages(path[0], window))
      if (id == s) {
        yc = x;
        found = true;
      }
    if (!found) throw Error("branch undefined", "no sheet " + std::to_string(s));
    path = continue_path(map, path, yc);
  }
  return path.back();
}

BfsResult breadth_first_pullbacks(const DynamicalMap& map, const PullbackCell& root, const PullbackContext& ctx,
                                  const BfsLimits& limits,
                                  const std::function<Decision(const PullbackCell&)>& decide) {
  BfsResult out;
  std::vector<PullbackCell> frontier{root};
  struct Slot {
    std::vector<PullbackCell> record, expand;
    std::vector<std::string> errors;
    std::size_t visited = 0;
  };
  for (int depth = 1; depth <= limits.max_depth && !frontier.empty(); ++depth) {
    std::vector<Slot> slots(frontier.size());
    parallel_for(frontier.size(), [&](std::size_t i) {
      Slot& slot = slots[i];
      for (long s : sheets_of(map, frontier[i], ctx)) {
        try {
          PullbackCell child = pull_back(map, frontier[i], s, ctx);
          ++slot.visited;
          Decision d = decide(child);
          if (d.record && d.expand) {
            slot.record.push_back(child);
            slot.expand.push_back(std::move(child));
          } else if (d.record) {
            slot.record.push_back(std::move(child));
          } else if (d.expand) {
            slot.expand.push_back(std::move(child));
          }
        } catch (const Error& e) {
          if (e.kind() != "monodromy" && e.kind() != "branch undefined" && e.kind() != "root-finding non-convergence" &&
              e.kind() != "degenerate region")
            throw;
          std::string w;
          for (long t : frontier[i].word.steps) w += std::to_string(t) + ".";
          slot.errors.push_back(e.kind() + " at word " + w + std::to_string(s));
        }
      }
    });
    std::size_t n_records = out.records.size(), n_next = 0;
    for (auto& s : slots) {
      n_records += s.record.size();
      n_next += s.expand.size();
    }
    if (n_records > limits.max_records) {
      // Stop on a complete level so truncation is by depth, never partial.
      out.cap_hit = true;
      break;
    }
    std::vector<PullbackCell> next;
    next.reserve(n_next);
    for (auto& s : slots) {
      out.visited += s.visited;
      for (auto& c : s.record) out.records.push_back(std::move(c));
      for (auto& c : s.expand) next.push_back(std::move(c));
      for (auto& e : s.errors) out.branch_errors.push_back(std::move(e));
    }
    out.depth_reached = depth;
    if (next.size() > limits.max_cells) {
      out.cap_hit = true;
      break;
    }
    frontier = std::move(next);
  }
  return out;
}

}  // namespace nicedyn

#include "nicedyn/nice.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>

#include "nicedyn/error.hpp"
#include "nicedyn/parallel.hpp"

namespace nicedyn {

namespace {

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

std::optional<int> period_of(const DynamicalMap& map, cplx z) {
  cplx x = z;
  for (int p = 1; p <= 12; ++p) {
    x = map.value(x);
    if (!finite(x)) return std::nullopt;
    if (std::abs(x - z) < 1e-9 * (1.0 + std::abs(z))) return p;
  }
  return std::nullopt;
}

// Smallest |Df^p| over a polar sample grid of B(z, rho).
double min_periodic_derivative(const DynamicalMap& map, cplx z, double rho, int p) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 8; ++i)
    for (int k = 0; k < 64; ++k) {
      cplx x = z + std::polar(rho * i / 8.0, 2 * std::numbers::pi * k / 64);
      double d = 1.0;
      for (int s = 0; s < p; ++s) {
        cplx f, df;
        map.value_and_derivative(x, f, df);
        d *= std::abs(df);
        x = f;
      }
      best = std::min(best, d);
      if (i == 0) break;
    }
  return best;
}

// Warns when the orbit of z is attracted to a cycle or escapes.
std::optional<std::string> fatou_warning(const DynamicalMap& map, cplx z) {
  std::vector<cplx> orbit{z};
  for (int n = 0; n < 400; ++n) {
    cplx x = map.value(orbit.back());
    if (!finite(x) || std::abs(x) > 1e8) {
      if (map.is_rational() && map.numerator().degree() > map.denominator().degree() + 1)
        return std::string("centre orbit escapes to infinity; the centre is likely in the Fatou set");
      return std::nullopt;
    }
    orbit.push_back(x);
  }
  cplx last = orbit.back();
  for (int p = 1; p <= 16; ++p) {
    cplx prev = orbit[orbit.size() - 1 - p];
    if (std::abs(prev - last) < 1e-10 * (1.0 + std::abs(last))) {
      double mult = 1.0;
      cplx x = last;
      for (int s = 0; s < p; ++s) {
        mult *= std::abs(map.derivative(x));
        x = map.value(x);
      }
      if (mult < 1.0) return "centre orbit converges to an attracting cycle of period " + std::to_string(p);
      return std::nullopt;
    }
  }
  return std::nullopt;
}

std::vector<Region> regions_of(const std::vector<PullbackCell>& cells) {
  std::vector<Region> out;
  out.reserve(cells.size());
  for (const auto& c : cells) out.push_back(c.region);
  return out;
}

}  // namespace

PullbackContext nice_context(const DynamicalMap& map, const NiceSetParams& params, int resolution) {
  PullbackContext ctx;
  ctx.center = params.center;
  ctx.R = params.R;
  ctx.resolution = resolution;
  ctx.metric = params.metric;
  if (!map.is_rational()) ctx.window.k_cap = params.k_max;
  return ctx;
}

FirstReturnSearch first_return_cells(const DynamicalMap& map, const Region& U, const NiceSetParams& params,
                                     int max_depth, std::size_t max_components, double min_diameter,
                                     int resolution) {
  FirstReturnSearch out;
  if (max_depth <= 0) return out;
  PullbackContext ctx = nice_context(map, params, resolution);
  PullbackCell root = region_cell(U, ctx);
  Box ub = bounding_box(U);
  std::atomic<std::size_t> pruned{0}, anomalies{0};
  auto decide = [&](const PullbackCell& c) {
    Decision d;
    Box cb = bounding_box(c.region);
    bool small = cb.diagonal() < min_diameter;
    if (cb.intersects(ub) && contains(U, c.center) != Containment::outside) {
      d.record = true;
      return d;
    }
    if (cb.intersects(ub)) {
      std::size_t in = 0;
      for (std::size_t i = 0; i < c.region.size(); ++i)
        if (contains(U, c.region.boundary[i]) == Containment::inside) ++in;
      if (10 * in > c.region.size()) ++anomalies;
    }
    if (small) ++pruned;
    else d.expand = true;
    return d;
  };
  BfsLimits limits;
  limits.max_depth = max_depth;
  limits.max_records = max_components;
  limits.max_cells = params.max_cells;
  BfsResult res = breadth_first_pullbacks(map, root, ctx, limits, decide);
  out.components = std::move(res.records);
  out.depth_reached = res.depth_reached;
  out.cap_hit = res.cap_hit;
  out.visited = res.visited;
  out.pruned = pruned;
  out.anomalies = anomalies;
  out.branch_errors = std::move(res.branch_errors);
  return out;
}

NiceSet construct_nice_set(const DynamicalMap& map, const NiceSetParams& input, const PostSingularCloud& cloud) {
  if (!(input.r > 0) || !(input.R > 0)) throw Error("invalid parameters", "radii must be positive");
  if (!(input.kappa > 1)) throw Error("invalid parameters", "kappa must exceed 1");
  if (!(input.r < input.R)) throw Error("invalid parameters", "r must be smaller than R");
  if (!(input.kappa * input.r < input.R)) throw Error("invalid parameters", "kappa * r must be smaller than R");
  const cplx z = input.center;
  double cloud_dist = std::numeric_limits<double>::infinity();
  for (cplx q : cloud.finite_points()) cloud_dist = std::min(cloud_dist, std::abs(q - z));
  if (!(cloud_dist > input.R))
    throw Error("post-singular proximity",
                "dist(z, cloud) = " + std::to_string(cloud_dist) + " does not exceed R = " + std::to_string(input.R));

  NiceDiagnostics diag;
  if (auto w = fatou_warning(map, z)) diag.warnings.push_back(*w);
  diag.period = period_of(map, z);

  NiceSetParams params = input;
  for (int attempt = 0; attempt <= input.retry_limit; ++attempt) {
    if (attempt > 0) params.r *= 0.5;
    diag.retries = attempt;
    const double r = params.r, kr = params.kappa * r;
    if (diag.period && min_periodic_derivative(map, z, kr, *diag.period) <= 1.0) continue;

    PullbackContext ctx = nice_context(map, params, params.resolution);
    PullbackCell root = disk_cell(Disk{z, r}, ctx);
    const double eps = r * params.eps_min_factor;
    const Box near{z.real() - 2 * kr, z.real() + 2 * kr, z.imag() - 2 * kr, z.imag() + 2 * kr};
    std::atomic<std::size_t> pruned{0};
    std::mutex trunc_mutex;
    double max_trunc = 0.0;
    auto decide = [&](const PullbackCell& c) {
      Decision d;
      Box cb = bounding_box(c.region);
      d.record = cb.intersects(near);
      if (cb.diagonal() >= eps) {
        d.expand = true;
      } else {
        ++pruned;
        std::lock_guard<std::mutex> lock(trunc_mutex);
        max_trunc = std::max(max_trunc, cb.diagonal());
      }
      return d;
    };
    BfsLimits limits;
    limits.max_depth = params.n_max;
    limits.max_cells = params.max_cells;
    limits.max_records = params.max_cells;
    BfsResult bfs = breadth_first_pullbacks(map, root, ctx, limits, decide);

    std::vector<Region> regions = regions_of(bfs.records);
    regions.push_back(root.region);
    RasterOptions ropt;
    ropt.resolution = params.raster_resolution;
    ropt.max_resolution = 2 * params.raster_resolution;
    ropt.clip = near;
    UnionResult uni = union_component_detailed(regions, z, ropt);
    Region filled = fill_simply_connected(uni.region);
    Region region = make_region(resample_boundary(filled, params.boundary_vertices));

    if (!verify_inclusion(region, z, r, params.kappa, 720).pass()) continue;

    NiceSet U;
    U.params = params;
    U.region = std::move(region);
    // Keep only the cells merged into the set.
    for (auto& c : bfs.records)
      if (contains(U.region, c.center) != Containment::outside) U.cells.push_back(std::move(c));

    FirstReturnSearch ret = first_return_cells(map, U.region, params, params.n_max, params.max_return_cells, eps);
    ExpansionReport ex = verify_expansion(ret.components);
    if (!ex.pass())
      throw Error("expansion failure", "theta = " + std::to_string(ex.theta) +
                                           " is not above 1; the centre may be near a parabolic point");
    U.theta = ex.theta;
    U.theta_vacuous = ex.vacuous;
    U.return_cells = std::move(ret.components);

    diag.n_cells = U.cells.size();
    diag.visited = bfs.visited;
    diag.pruned = pruned;
    diag.max_truncated_diameter = max_trunc;
    diag.depth_reached = bfs.depth_reached;
    diag.cap_hit = bfs.cap_hit;
    diag.pixel = uni.pixel;
    diag.raster_resolution = uni.resolution;
    diag.boundary_accuracy = 3.0 * uni.pixel;
    diag.return_depth = ret.depth_reached;
    diag.return_cap_hit = ret.cap_hit;
    diag.branch_errors = std::move(bfs.branch_errors);
    for (auto& e : ret.branch_errors) diag.branch_errors.push_back(std::move(e));
    if (ret.anomalies > 0)
      diag.warnings.push_back(std::to_string(ret.anomalies) + " pullbacks of U straddle its boundary");
    if (bfs.cap_hit) diag.warnings.push_back("pullback enumeration stopped at the cell cap");

    // Geometric convergence along the z-periodic chain.
    if (diag.period) {
      std::vector<double> diams;
      for (const auto& c : U.cells)
        if (std::abs(c.center - z) < 1e-9 * (1.0 + std::abs(z)) && c.depth % *diag.period == 0)
          diams.push_back(diameter(c.region));
      std::sort(diams.rbegin(), diams.rend());
      double worst = 0.0;
      for (std::size_t i = 1; i < diams.size() && i < 8; ++i) worst = std::max(worst, diams[i] / diams[i - 1]);
      if (diams.size() >= 2) diag.periodic_ratio = worst;
      if (diams.size() >= 2 && worst >= 0.9)
        diag.warnings.push_back("z-periodic chain does not contract geometrically");
    }
    U.diagnostics = std::move(diag);
    return U;
  }
  throw Error("no kappa-nice radius found",
              "inclusion or periodic expansion failed after " + std::to_string(input.retry_limit) + " halvings of r");
}

NicenessReport verify_niceness(const DynamicalMap& map, const Region& U, double boundary_accuracy, int n_check,
                               int samples) {
  NicenessReport rep;
  rep.n_checked = n_check;
  rep.samples = samples;
  std::vector<cplx> pts = resample_boundary(U, samples);
  const double tol = tol_geom(U);
  enum class Outcome { clean, violation, indeterminate, escaped };
  std::vector<Outcome> outcome(pts.size(), Outcome::clean);
  std::vector<NicenessViolation> found(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) {
    cplx x = pts[i];
    double log_d = 0.0;
    bool indeterminate = false;
    for (int n = 1; n <= n_check; ++n) {
      cplx f, df;
      map.value_and_derivative(x, f, df);
      if (!finite(f) || !finite(df) || std::abs(f) > 1e8) {
        outcome[i] = indeterminate ? Outcome::indeterminate : Outcome::escaped;
        return;
      }
      log_d += std::log(std::abs(df));
      x = f;
      if (contains(U, x, tol) == Containment::outside) continue;
      double allowance = tol + std::exp(log_d) * boundary_accuracy;
      if (boundary_distance(U, x) > allowance) {
        outcome[i] = Outcome::violation;
        found[i] = {pts[i], n, x};
        return;
      }
      indeterminate = true;
    }
    outcome[i] = indeterminate ? Outcome::indeterminate : Outcome::clean;
  });
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (outcome[i] == Outcome::violation) rep.violations.push_back(found[i]);
    else if (outcome[i] == Outcome::indeterminate) ++rep.indeterminate;
    else if (outcome[i] == Outcome::escaped) ++rep.escaped;
  }
  return rep;
}

NicenessReport verify_niceness(const DynamicalMap& map, const NiceSet& U, int n_check, int samples) {
  return verify_niceness(map, U.region, U.diagnostics.boundary_accuracy, n_check, samples);
}

InclusionReport verify_inclusion(const Region& U, cplx center, double r, double kappa, int samples) {
  InclusionReport rep;
  double tol = tol_geom(U);
  // a polyline inscribed in the circle misses it by the chord sagitta
  double edge = 0.0;
  for (std::size_t i = 0; i < U.size(); ++i) edge = std::max(edge, std::abs(U.boundary[i + 1] - U.boundary[i]));
  double inner_tol = std::max(tol, edge * edge / (4 * r));
  for (int k = 0; k < samples; ++k) {
    cplx p = center + std::polar(r, 2 * std::numbers::pi * k / samples);
    if (contains(U, p, inner_tol) == Containment::outside) {
      rep.inner_ok = false;
      if (!rep.witness) rep.witness = p;
    }
  }
  cplx far{};
  for (std::size_t i = 0; i < U.size(); ++i) {
    double d = std::abs(U.boundary[i] - center);
    if (d > rep.max_radius) {
      rep.max_radius = d;
      far = U.boundary[i];
    }
  }
  if (rep.max_radius > kappa * r + tol) {
    rep.outer_ok = false;
    if (!rep.witness) rep.witness = far;
  }
  return rep;
}

InclusionReport verify_inclusion(const NiceSet& U, int samples) {
  return verify_inclusion(U.region, U.params.center, U.params.r, U.params.kappa, samples);
}

ExpansionReport verify_expansion(const std::vector<PullbackCell>& return_cells) {
  ExpansionReport rep;
  rep.n_cells = return_cells.size();
  if (return_cells.empty()) {
    rep.vacuous = true;
    rep.theta = std::numeric_limits<double>::infinity();
    return rep;
  }
  rep.theta = std::numeric_limits<double>::infinity();
  for (const auto& c : return_cells) rep.theta = std::min(rep.theta, c.deriv_min);
  return rep;
}

ExpansionReport verify_expansion(const NiceSet& U) { return verify_expansion(U.return_cells); }

std::vector<PullbackCell> pullback_cells_of(const DynamicalMap& map, const NiceSet& U, int depth,
                                            std::vector<std::string>* errors) {
  if (depth > U.params.n_max) throw Error("invalid argument", "depth exceeds the construction depth cap");
  PullbackContext ctx = nice_context(map, U.params, 256);
  PullbackCell root = region_cell(U.region, ctx);
  std::vector<PullbackCell> out{root};
  if (depth <= 0) return out;
  BfsLimits limits;
  limits.max_depth = depth;
  BfsResult res = breadth_first_pullbacks(map, root, ctx, limits, [](const PullbackCell&) {
    return Decision{true, true};
  });
  for (auto& c : res.records) out.push_back(std::move(c));
  if (errors)
    for (auto& e : res.branch_errors) errors->push_back(std::move(e));
  return out;
}

Region corrupt_boundary(const NiceSet& U, double fraction) {
  if (U.return_cells.empty()) throw Error("invalid argument", "corruption needs at least one return cell");
  const PullbackCell* target = &U.return_cells.front();
  double best = -1.0;
  for (const auto& c : U.return_cells) {
    double a = area(c.region);
    if (a > best) {
      best = a;
      target = &c;
    }
  }
  std::vector<cplx> v(U.region.boundary.begin(), U.region.boundary.end() - 1);
  std::size_t k = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(fraction * v.size())));
  std::vector<std::size_t> order(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) order[i] = i;
  cplx c = target->center;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(v[a] - c) < std::abs(v[b] - c); });
  double depth = 0.15 * diameter(target->region);
  for (std::size_t j = 0; j < k; ++j) {
    cplx d = v[order[j]] - c;
    v[order[j]] = c + (std::abs(d) > 0 ? d / std::abs(d) : cplx{1, 0}) * depth;
  }
  Region r;
  r.boundary = v;
  r.boundary.push_back(v.front());
  return r;
}

}  // namespace nicedyn

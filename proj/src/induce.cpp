#include "nicedyn/induce.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nicedyn/error.hpp"
#include "nicedyn/parallel.hpp"

namespace nicedyn {

namespace {

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// Membership in U used by forward checks; on the real line the intervals of
// U ∩ R decide it exactly.
struct Membership {
  const Region* region;
  Support support;
  std::vector<std::pair<double, double>> intervals;
  bool operator()(cplx z) const {
    if (support == Support::real_line && z.imag() == 0.0) {
      for (auto [a, b] : intervals)
        if (z.real() > a && z.real() < b) return true;
      return false;
    }
    return contains(*region, z) == Containment::inside;
  }
};

Membership membership(const Region& U, Support support) {
  Membership m{&U, support, {}};
  if (support == Support::real_line) m.intervals = real_axis_intervals(U);
  return m;
}

}  // namespace

std::string to_string(Support s) { return s == Support::planar ? "planar" : "real_line"; }

Support support_from_string(const std::string& s) {
  if (s == "planar") return Support::planar;
  if (s == "real_line") return Support::real_line;
  throw Error("invalid parameters", "unknown reference support '" + s + "'");
}

double reference_mass(const Region& region, Support support) {
  if (support == Support::planar) return area(region);
  double len = 0.0;
  for (auto [a, b] : real_axis_intervals(region)) len += b - a;
  return len;
}

double koebe_constant(double s) {
  if (!(s < 1.0)) throw Error("no Koebe buffer", "s = " + std::to_string(s) + " must be below 1");
  return std::pow((1 + s) / (1 - s), 4);
}

double distortion_bound(const ReturnComponent& c) { return koebe_constant(c.koebe_s); }

ComponentLocator::ComponentLocator(const std::vector<ReturnComponent>& components, Support support,
                                   const Box& bounds)
    : support_(support), bounds_(bounds) {
  if (support == Support::real_line) {
    std::vector<std::tuple<double, double, long>> iv;
    for (std::size_t i = 0; i < components.size(); ++i)
      for (auto [a, b] : real_axis_intervals(components[i].domain)) iv.emplace_back(a, b, static_cast<long>(i));
    std::sort(iv.begin(), iv.end());
    for (auto& [a, b, o] : iv) {
      lo_.push_back(a);
      hi_.push_back(b);
      owner_.push_back(o);
    }
    return;
  }
  n_ = std::max(1, static_cast<int>(std::sqrt(double(components.size()))));
  buckets_.assign(static_cast<std::size_t>(n_) * n_, {});
  double wx = (bounds.xmax - bounds.xmin) / n_, wy = (bounds.ymax - bounds.ymin) / n_;
  for (std::size_t c = 0; c < components.size(); ++c) {
    Box b = bounding_box(components[c].domain);
    int i0 = std::clamp(static_cast<int>((b.xmin - bounds.xmin) / wx), 0, n_ - 1);
    int i1 = std::clamp(static_cast<int>((b.xmax - bounds.xmin) / wx), 0, n_ - 1);
    int j0 = std::clamp(static_cast<int>((b.ymin - bounds.ymin) / wy), 0, n_ - 1);
    int j1 = std::clamp(static_cast<int>((b.ymax - bounds.ymin) / wy), 0, n_ - 1);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) buckets_[static_cast<std::size_t>(j) * n_ + i].push_back(static_cast<long>(c));
  }
}

long ComponentLocator::locate(cplx p, const std::vector<ReturnComponent>& components) const {
  if (support_ == Support::real_line && p.imag() == 0.0) {
    auto it = std::upper_bound(lo_.begin(), lo_.end(), p.real());
    if (it == lo_.begin()) return -1;
    std::size_t k = static_cast<std::size_t>(it - lo_.begin()) - 1;
    return (p.real() < hi_[k]) ? owner_[k] : -1;
  }
  if (support_ == Support::real_line) {
    for (std::size_t c = 0; c < components.size(); ++c)
      if (contains(components[c].domain, p) == Containment::inside) return static_cast<long>(c);
    return -1;
  }
  if (n_ == 0 || !bounds_.contains(p)) return -1;
  double wx = (bounds_.xmax - bounds_.xmin) / n_, wy = (bounds_.ymax - bounds_.ymin) / n_;
  int i = std::clamp(static_cast<int>((p.real() - bounds_.xmin) / wx), 0, n_ - 1);
  int j = std::clamp(static_cast<int>((p.imag() - bounds_.ymin) / wy), 0, n_ - 1);
  for (long c : buckets_[static_cast<std::size_t>(j) * n_ + i])
    if (contains(components[c].domain, p) == Containment::inside) return c;
  return -1;
}

double ReturnMap::max_distortion() const {
  double c = 1.0;
  for (const auto& comp : components) c = std::max(c, comp.distortion_bound);
  return c;
}

ReturnMap assemble_return_map(const Region& base, cplx center, double R, Support support,
                              std::vector<PullbackCell> cells, const ReturnCaps& caps) {
  ReturnMap rm;
  rm.base = base;
  rm.center = center;
  rm.R = R;
  rm.support = support;
  rm.caps = caps;
  rm.base_mass = reference_mass(base, support);
  double s = 0.0;
  for (std::size_t i = 0; i < base.size(); ++i) s = std::max(s, std::abs(base.boundary[i] - center));
  s /= R;
  const double C = koebe_constant(s);
  const double tiny = tol_geom(base);
  std::sort(cells.begin(), cells.end(), [](const PullbackCell& a, const PullbackCell& b) {
    return a.depth < b.depth || (a.depth == b.depth && a.word.steps < b.word.steps);
  });
  double captured = 0.0;
  for (auto& c : cells) {
    ReturnComponent rc;
    rc.return_time = c.depth;
    rc.word = c.word;
    rc.center = c.center;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double v : c.log_deriv) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    rc.deriv_min = std::exp(lo);
    rc.deriv_max = std::exp(hi);
    rc.koebe_s = s;
    rc.distortion_bound = C;
    rc.point_mass = bounding_box(c.region).diagonal() < tiny;
    rc.domain = std::move(c.region);
    rc.mass = reference_mass(rc.domain, support);
    captured += rc.mass;
    rm.components.push_back(std::move(rc));
  }
  rm.captured_mass_fraction = rm.base_mass > 0 ? std::min(1.0, captured / rm.base_mass) : 0.0;
  rm.locator = ComponentLocator(rm.components, support, bounding_box(base));
  return rm;
}

ReturnMap first_return_components(const DynamicalMap& map, const NiceSet& U, const ReturnCaps& caps,
                                  Support support) {
  if (caps.t_max <= 0) throw Error("no returns within caps", "t_max must be positive");
  NiceSetParams params = U.params;
  params.max_cells = std::max<std::size_t>(params.max_cells, 4 * caps.max_components);
  const double tiny = 1e-12 * diameter(U.region);
  FirstReturnSearch found = first_return_cells(map, U.region, params, caps.t_max, caps.max_components, tiny,
                                               static_cast<int>(U.region.size()));
  if (found.components.empty())
    throw Error("no returns within caps", "no first-return component up to depth " + std::to_string(caps.t_max));
  ReturnMap rm = assemble_return_map(U.region, U.params.center, U.params.R, support, std::move(found.components), caps);
  rm.depth_reached = found.depth_reached;
  rm.cap_hit = found.cap_hit;
  rm.anomalies = found.anomalies;
  if (found.cap_hit)
    rm.warnings.push_back("component cap reached; enumeration complete up to return time " +
                          std::to_string(found.depth_reached));
  if (!found.branch_errors.empty())
    rm.warnings.push_back(std::to_string(found.branch_errors.size()) + " branches failed to continue");
  return rm;
}

bool apply_return(const DynamicalMap& map, const ReturnMap& rm, cplx z, cplx& image, long* component) {
  long c = rm.locate(z);
  if (component) *component = c;
  if (c < 0) return false;
  cplx x = z;
  for (int k = 0; k < rm.components[c].return_time; ++k) {
    x = map.value(x);
    if (!finite(x)) return false;
  }
  image = x;
  return true;
}

std::vector<cplx> grid_points_in(const Region& U, Support support, std::size_t count) {
  std::vector<cplx> pts;
  if (support == Support::real_line) {
    auto iv = real_axis_intervals(U);
    double total = 0.0;
    for (auto [a, b] : iv) total += b - a;
    for (auto [a, b] : iv) {
      std::size_t n = static_cast<std::size_t>(std::llround(count * (b - a) / total));
      for (std::size_t i = 0; i < n; ++i) pts.emplace_back(a + (b - a) * (i + 0.5) / n, 0.0);
    }
    return pts;
  }
  Box bb = bounding_box(U);
  double fill = area(U) / ((bb.xmax - bb.xmin) * (bb.ymax - bb.ymin));
  int n = static_cast<int>(std::ceil(std::sqrt(count / std::max(fill, 1e-3))));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      cplx p{bb.xmin + (i + 0.5) * (bb.xmax - bb.xmin) / n, bb.ymin + (j + 0.5) * (bb.ymax - bb.ymin) / n};
      if (contains(U, p) == Containment::inside) pts.push_back(p);
    }
  return pts;
}

ForwardValidation validate_return_forward(const DynamicalMap& map, const ReturnMap& rm, std::size_t grid_points) {
  ForwardValidation out;
  std::vector<cplx> pts = grid_points_in(rm.base, rm.support, grid_points);
  out.points = pts.size();
  Membership inside = membership(rm.base, rm.support);
  std::vector<int> observed(pts.size(), 0);
  std::vector<long> comp(pts.size(), -1);
  parallel_for(pts.size(), [&](std::size_t i) {
    comp[i] = rm.locate(pts[i]);
    cplx x = pts[i];
    for (int n = 1; n <= rm.caps.t_max; ++n) {
      x = map.value(x);
      if (!finite(x)) return;
      if (inside(x)) {
        observed[i] = n;
        return;
      }
    }
  });
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (comp[i] >= 0) {
      ++out.in_components;
      int expected = rm.components[comp[i]].return_time;
      if (observed[i] == expected) ++out.agree;
      else out.mismatches.push_back({pts[i], comp[i], expected, observed[i]});
    } else if (observed[i] == 0 || observed[i] > rm.depth_reached) {
      ++out.escaping;
    } else {
      ++out.unmatched;
    }
  }
  return out;
}

double return_jacobian(const DynamicalMap& map, const ReturnComponent& c, const ConformalSpec& spec, cplx z) {
  double log_d = 0.0;
  cplx x = z;
  for (int k = 0; k < c.return_time; ++k) {
    cplx f, df;
    map.value_and_derivative(x, f, df);
    log_d += std::log(std::abs(df));
    if (!finite(f)) throw Error("conformality breakdown", "orbit reached a pole inside a return domain");
    x = f;
  }
  log_d = metric_log_deriv(log_d, z, x, spec.metric);
  if (std::isinf(log_d)) {
    if (spec.t == 0) return std::exp(spec.p * c.return_time);
    if ((log_d > 0) == (spec.t > 0)) throw Error("conformality breakdown", "infinite Jacobian inside a domain");
    return 0.0;
  }
  return std::exp(spec.p * c.return_time + spec.t * log_d);
}

}  // namespace nicedyn

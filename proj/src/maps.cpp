#include "nicedyn/maps.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nicedyn/error.hpp"

namespace nicedyn {

namespace {

constexpr double kPi = std::numbers::pi;

bool lex_less(cplx a, cplx b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

void push_unique(std::vector<SpherePoint>& pts, const SpherePoint& p, double tol = 1e-10) {
  for (const auto& q : pts)
    if (chordal_distance(p, q) < tol) return;
  pts.push_back(p);
}

}  // namespace

SpherePoint::SpherePoint(cplx v) : value_(v) {
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
    throw Error("non-finite point", "use SpherePoint::infinity() for the point at infinity");
}

SpherePoint SpherePoint::infinity() {
  SpherePoint p;
  p.infinite_ = true;
  return p;
}

cplx SpherePoint::value() const {
  if (infinite_) throw Error("infinite point", "value() requested at infinity");
  return value_;
}

double chordal_distance(const SpherePoint& a, const SpherePoint& b) {
  if (a.is_infinite() && b.is_infinite()) return 0.0;
  if (a.is_infinite()) return 2.0 / std::sqrt(1.0 + std::norm(b.value()));
  if (b.is_infinite()) return 2.0 / std::sqrt(1.0 + std::norm(a.value()));
  cplx x = a.value(), y = b.value();
  return 2.0 * std::abs(x - y) / std::sqrt((1.0 + std::norm(x)) * (1.0 + std::norm(y)));
}

// ---------------------------------------------------------------------------

DynamicalMap DynamicalMap::rational(std::vector<cplx> num, std::vector<cplx> den, int min_degree) {
  DynamicalMap m;
  m.kind_ = Kind::rational;
  m.num_ = Polynomial(std::move(num));
  m.den_ = Polynomial(std::move(den));
  if (m.den_.is_zero()) throw Error("invalid map", "denominator is the zero polynomial");
  if (m.num_.is_zero()) throw Error("invalid map", "numerator is the zero polynomial");
  m.degree_ = std::max(m.num_.degree(), m.den_.degree());
  if (m.degree_ < min_degree)
    throw Error("invalid map", "rational degree " + std::to_string(m.degree_) +
                                   " below required " + std::to_string(min_degree));
  m.dnum_ = m.num_.derivative();
  m.dden_ = m.den_.derivative();
  m.analyse_rational();
  return m;
}

DynamicalMap DynamicalMap::tangent(cplx lambda, int k_max) {
  if (lambda == cplx{}) throw Error("invalid map", "tangent parameter must be non-zero");
  if (k_max < 0) throw Error("invalid map", "k_max must be non-negative");
  DynamicalMap m;
  m.kind_ = Kind::tangent;
  m.lambda_ = lambda;
  m.k_max_ = k_max;
  m.analyse_tangent();
  return m;
}

void DynamicalMap::analyse_rational() {
  const auto den_roots = polynomial_roots(den_);
  const double nscale = num_.scale();
  for (cplx rho : den_roots) {
    double mag = std::pow(std::max(1.0, std::abs(rho)), num_.degree());
    if (std::abs(num_(rho)) <= 1e-9 * nscale * mag)
      throw Error("invalid map", "numerator and denominator share a root near (" +
                                     std::to_string(rho.real()) + ", " +
                                     std::to_string(rho.imag()) + ")");
  }
  // Cluster denominator roots into poles with multiplicity.
  std::vector<bool> used(den_roots.size(), false);
  for (std::size_t i = 0; i < den_roots.size(); ++i) {
    if (used[i]) continue;
    cplx sum = den_roots[i];
    int order = 1;
    used[i] = true;
    for (std::size_t j = i + 1; j < den_roots.size(); ++j) {
      if (!used[j] && std::abs(den_roots[j] - den_roots[i]) <
                          1e-5 * std::max(1.0, std::abs(den_roots[i]))) {
        used[j] = true;
        sum += den_roots[j];
        ++order;
      }
    }
    poles_.push_back({SpherePoint(sum / static_cast<double>(order)), order});
  }
  const int dn = num_.degree(), dd = den_.degree();
  if (dn > dd) poles_.push_back({SpherePoint::infinity(), dn - dd});

  // Finite critical points: roots of N'D - ND'.
  Polynomial w = dnum_ * den_ - num_ * dden_;
  critical_points_ = polynomial_roots(w);
  for (cplx c : critical_points_) {
    Evaluation e = evaluate(*this, SpherePoint(c));
    SingularValue sv{e.value, SingularKind::critical};
    bool dup = false;
    for (auto& s : singular_) dup = dup || chordal_distance(s.point, sv.point) < 1e-10;
    if (!dup) singular_.push_back(sv);
  }
  // Local degree at infinity.
  int local = 0;
  if (dn > dd) {
    local = dn - dd;
  } else if (dn < dd) {
    local = dd - dn;
  } else {
    cplx c = num_.leading() / den_.leading();
    Polynomial rest = num_ - c * den_;
    local = dd - (rest.is_zero() ? 0 : rest.degree());
  }
  if (local >= 2) {
    SingularValue sv{evaluate(*this, SpherePoint::infinity()).value, SingularKind::critical};
    bool dup = false;
    for (auto& s : singular_) dup = dup || chordal_distance(s.point, sv.point) < 1e-10;
    if (!dup) singular_.push_back(sv);
  }
}

void DynamicalMap::analyse_tangent() {
  for (int k = -k_max_; k <= k_max_; ++k)
    poles_.push_back({SpherePoint(cplx(kPi / 2 + k * kPi, 0.0)), 1});
  cplx iv = cplx(0.0, 1.0) * lambda_;
  singular_.push_back({SpherePoint(iv), SingularKind::asymptotic});
  singular_.push_back({SpherePoint(-iv), SingularKind::asymptotic});
  omitted_ = {SpherePoint(iv), SpherePoint(-iv)};
}

cplx DynamicalMap::value(cplx z) const {
  if (kind_ == Kind::tangent) return lambda_ * std::tan(z);
  return num_(z) / den_(z);
}

cplx DynamicalMap::derivative(cplx z) const {
  cplx f, df;
  value_and_derivative(z, f, df);
  return df;
}

void DynamicalMap::value_and_derivative(cplx z, cplx& f, cplx& df) const {
  if (kind_ == Kind::tangent) {
    cplx c = std::cos(z);
    f = lambda_ * std::tan(z);
    df = lambda_ / (c * c);
    return;
  }
  cplx n, dn, d, dd;
  num_.eval_with_derivative(z, n, dn);
  den_.eval_with_derivative(z, d, dd);
  f = n / d;
  df = (dn * d - n * dd) / (d * d);
}

double DynamicalMap::log_abs_difference(cplx z, cplx a) const {
  if (kind_ == Kind::tangent) {
    const cplx iv = cplx(0.0, 1.0) * lambda_;
    const double scale = std::abs(iv) * 1e-14;
    const double y = z.imag();
    const cplx i2z = cplx(0.0, 2.0) * z;
    if (std::abs(a - iv) <= scale) {
      // tan z - i = -2i e^{2iz} / (1 + e^{2iz}) = -2i / (1 + e^{-2iz})
      double base = std::log(std::abs(lambda_)) + std::log(2.0);
      if (y >= 0) return base - 2.0 * y - std::log(std::abs(1.0 + std::exp(i2z)));
      return base - std::log(std::abs(1.0 + std::exp(-i2z)));
    }
    if (std::abs(a + iv) <= scale) {
      // tan z + i = 2i / (1 + e^{2iz}) = 2i e^{-2iz} / (1 + e^{-2iz})
      double base = std::log(std::abs(lambda_)) + std::log(2.0);
      if (y >= 0) return base - std::log(std::abs(1.0 + std::exp(i2z)));
      return base + 2.0 * y - std::log(std::abs(1.0 + std::exp(-i2z)));
    }
  }
  cplx f = value(z);
  if (!std::isfinite(f.real()) || !std::isfinite(f.imag()))
    return std::numeric_limits<double>::infinity();
  return std::log(std::abs(f - a));
}

double DynamicalMap::distance_to_pole(cplx z) const {
  if (kind_ == Kind::tangent) {
    double k = std::round((z.real() - kPi / 2) / kPi);
    return std::abs(z - cplx(kPi / 2 + k * kPi, 0.0));
  }
  double d = std::numeric_limits<double>::infinity();
  for (const auto& p : poles_)
    if (p.location.is_finite()) d = std::min(d, std::abs(z - p.location.value()));
  return d;
}

bool DynamicalMap::is_omitted(cplx w, double tol) const {
  for (const auto& o : omitted_)
    if (o.is_finite() && std::abs(o.value() - w) <= tol * std::max(1.0, std::abs(w))) return true;
  return false;
}

std::vector<std::pair<cplx, long>> DynamicalMap::preimages(cplx w, const BranchWindow& window) const {
  std::vector<std::pair<cplx, long>> out;
  if (kind_ == Kind::rational) {
    Polynomial p = num_ - w * den_;
    auto roots = polynomial_roots(p);
    std::sort(roots.begin(), roots.end(), lex_less);
    for (std::size_t i = 0; i < roots.size(); ++i) out.emplace_back(roots[i], static_cast<long>(i));
    return out;
  }
  if (is_omitted(w)) return out;
  const cplx x0 = std::atan(w / lambda_);
  long lo = -k_max_, hi = k_max_;
  if (window.k_cap) {
    lo = -*window.k_cap;
    hi = *window.k_cap;
  } else if (window.disk) {
    const auto& d = *window.disk;
    lo = static_cast<long>(std::ceil((d.center.real() - d.radius - x0.real()) / kPi));
    hi = static_cast<long>(std::floor((d.center.real() + d.radius - x0.real()) / kPi));
  }
  for (long k = lo; k <= hi; ++k) {
    cplx x = x0 + static_cast<double>(k) * kPi;
    if (window.disk && !window.k_cap && std::abs(x - window.disk->center) >= window.disk->radius)
      continue;
    out.emplace_back(x, k);
  }
  return out;
}

// ---------------------------------------------------------------------------

Evaluation evaluate(const DynamicalMap& map, const SpherePoint& z) {
  if (map.kind() == DynamicalMap::Kind::tangent) {
    if (z.is_infinite())
      throw Error("essential singularity", "the tangent family is not defined at infinity");
    cplx x = z.value();
    if (map.distance_to_pole(x) <= 1e-14 * (1.0 + std::abs(x))) return {SpherePoint::infinity(), false};
    cplx f = map.value(x);
    if (!std::isfinite(f.real()) || !std::isfinite(f.imag())) return {SpherePoint::infinity(), true};
    return {SpherePoint(f), false};
  }
  const auto& n = map.numerator();
  const auto& d = map.denominator();
  if (z.is_infinite()) {
    if (n.degree() > d.degree()) return {SpherePoint::infinity(), false};
    if (n.degree() < d.degree()) return {SpherePoint(cplx{}), false};
    return {SpherePoint(n.leading() / d.leading()), false};
  }
  cplx x = z.value();
  cplx dv = d(x);
  double mag = std::pow(std::max(1.0, std::abs(x)), std::max(0, d.degree()));
  if (std::abs(dv) <= 1e-14 * d.scale() * mag) return {SpherePoint::infinity(), false};
  cplx f = n(x) / dv;
  if (!std::isfinite(f.real()) || !std::isfinite(f.imag())) return {SpherePoint::infinity(), true};
  return {SpherePoint(f), false};
}

DerivativeValue derivative(const DynamicalMap& map, const SpherePoint& z, MetricTag metric) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (metric == MetricTag::euclidean) {
    if (z.is_infinite()) throw Error("euclidean infinity", "euclidean derivative undefined at infinity");
    if (evaluate(map, z).value.is_infinite()) return {inf, std::nullopt};
    cplx df = map.derivative(z.value());
    return {std::abs(df), df};
  }
  if (z.is_infinite()) {
    if (map.kind() == DynamicalMap::Kind::tangent)
      throw Error("essential singularity", "the tangent family is not defined at infinity");
    int n = map.degree();
    Polynomial nr = map.numerator().reversed(n), dr = map.denominator().reversed(n);
    cplx n0 = nr.coeff(0), n1 = nr.coeff(1), d0 = dr.coeff(0), d1 = dr.coeff(1);
    if (d0 != cplx{}) {
      cplx h = n0 / d0, dh = (n1 * d0 - n0 * d1) / (d0 * d0);
      return {std::abs(dh) / (1.0 + std::norm(h)), std::nullopt};
    }
    return {std::abs(d1 / n0), std::nullopt};
  }
  cplx x = z.value();
  Evaluation e = evaluate(map, z);
  if (e.value.is_infinite()) {
    // Use 1/f, which vanishes at the pole.
    cplx dg;
    if (map.kind() == DynamicalMap::Kind::tangent) {
      cplx s = std::sin(x);
      dg = -1.0 / (map.lambda() * s * s);
    } else {
      cplx nv, dn, dv, dd;
      map.numerator().eval_with_derivative(x, nv, dn);
      map.denominator().eval_with_derivative(x, dv, dd);
      dg = (dd * nv - dv * dn) / (nv * nv);
    }
    return {std::abs(dg) * (1.0 + std::norm(x)), std::nullopt};
  }
  cplx f = e.value.value();
  cplx df = map.derivative(x);
  return {std::abs(df) * (1.0 + std::norm(x)) / (1.0 + std::norm(f)), std::nullopt};
}

std::vector<cplx> PostSingularCloud::finite_points() const {
  std::vector<cplx> out;
  for (const auto& p : points)
    if (p.is_finite()) out.push_back(p.value());
  return out;
}

bool PostSingularCloud::contains_infinity() const {
  return std::any_of(points.begin(), points.end(), [](const SpherePoint& p) { return p.is_infinite(); });
}

PostSingularCloud post_singular_orbit(const DynamicalMap& map, int depth, std::size_t cap) {
  if (depth < 0) throw Error("invalid argument", "depth must be non-negative");
  PostSingularCloud cloud;
  cloud.depth = depth;
  auto add = [&](const SpherePoint& p) {
    if (cloud.points.size() >= cap) {
      cloud.truncated = true;
      cloud.truncation_note = "point cap reached";
      return false;
    }
    push_unique(cloud.points, p);
    return true;
  };
  for (const auto& sv : map.singular_values()) {
    if (!add(sv.point)) break;
    SpherePoint cur = sv.point;
    for (int i = 1; i <= depth; ++i) {
      if (cur.is_infinite() && map.kind() == DynamicalMap::Kind::tangent) {
        cloud.truncated = true;
        cloud.truncation_note = "orbit reached the essential singularity";
        break;
      }
      Evaluation e = evaluate(map, cur);
      if (e.overflow) {
        cloud.truncated = true;
        cloud.truncation_note = "orbit left the numeric range";
      }
      if (e.value == cur) break;  // fixed point reached exactly
      cur = e.value;
      if (!add(cur)) break;
    }
  }
  return cloud;
}

InverseImageResult inverse_images(const DynamicalMap& map, const SpherePoint& w, const BranchWindow& window) {
  InverseImageResult res;
  if (w.is_infinite()) {
    long id = 0;
    for (const auto& p : map.poles()) {
      if (map.kind() == DynamicalMap::Kind::tangent && window.disk &&
          std::abs(p.location.value() - window.disk->center) >= window.disk->radius)
        continue;
      for (int k = 0; k < p.order; ++k) res.images.push_back({p.location, BranchWord{{id++}}});
    }
    return res;
  }
  cplx wv = w.value();
  if (map.is_omitted(wv)) {
    res.omitted = true;
    return res;
  }
  auto pre = map.preimages(wv, window);
  for (auto& [x, id] : pre) {
    cplx f = map.value(x);
    double resid = std::abs(f - wv) / std::max(1.0, std::abs(wv));
    res.max_residual = std::max(res.max_residual, resid);
    res.images.push_back({SpherePoint(x), BranchWord{{id}}});
  }
  if (map.is_rational() && static_cast<int>(pre.size()) < map.degree()) {
    // w = f(infinity); infinity supplies the missing preimages.
    for (int k = static_cast<int>(pre.size()); k < map.degree(); ++k)
      res.images.push_back({SpherePoint::infinity(), BranchWord{{static_cast<long>(k)}}});
  }
  if (res.max_residual > 1e-8)
    throw Error("root-finding non-convergence",
                "inverse image residual " + std::to_string(res.max_residual));
  return res;
}

}  // namespace nicedyn

#include "nicedyn/criteria.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "nicedyn/error.hpp"
#include "nicedyn/parallel.hpp"

namespace nicedyn {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

struct Rule {
  std::vector<double> x, w;  // on [-1, 1]
};

Rule gauss_legendre(int n) {
  Rule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.x[i] = x;
    r.w[i] = 2.0 / ((1 - x * x) * dp * dp);
  }
  return r;
}

const Rule& gl_rule(int n) {
  static thread_local std::vector<std::pair<int, Rule>> cache;
  for (auto& [m, r] : cache)
    if (m == n) return r;
  cache.emplace_back(n, gauss_legendre(n));
  return cache.back().second;
}

struct PeriodicResult {
  double value = 0.0;
  double coarse = 0.0;
  std::size_t refined = 0;
  std::size_t excluded = 0;
};

// Periodic trapezoid over [0, 2π) with n nodes. Intervals where the integrand
// exceeds 10x its median (or a node is excluded as NaN) are re-integrated with
// a 16-point Gauss rule. `coarse` repeats the procedure on every other node.
template <class G>
PeriodicResult periodic_integral(G&& g, std::size_t n) {
  n = std::max<std::size_t>(n + (n & 1), 8);
  std::vector<double> v(n);
  const double h = kTwoPi / n;
  parallel_for(n, [&](std::size_t i) { v[i] = g(i * h); });
  std::vector<double> mags;
  for (double x : v)
    if (std::isfinite(x) && x != 0.0) mags.push_back(std::abs(x));
  double threshold = std::numeric_limits<double>::infinity();
  if (!mags.empty()) {
    std::nth_element(mags.begin(), mags.begin() + static_cast<long>(mags.size() / 2), mags.end());
    threshold = 10.0 * mags[mags.size() / 2];
  }
  const Rule& rule = gl_rule(16);
  auto level = [&](std::size_t stride, std::size_t& refined) {
    std::size_t m = n / stride;
    double hs = h * stride;
    std::vector<double> part(m);
    std::vector<char> hot(m, 0);
    for (std::size_t i = 0; i < m; ++i) {
      double a = v[i * stride], b = v[((i + 1) % m) * stride];
      bool bad = !std::isfinite(a) || !std::isfinite(b) || std::abs(a) > threshold || std::abs(b) > threshold;
      if (bad) hot[i] = 1;
      else part[i] = 0.5 * hs * (a + b);
    }
    std::vector<std::size_t> hot_idx;
    for (std::size_t i = 0; i < m; ++i)
      if (hot[i]) hot_idx.push_back(i);
    refined += hot_idx.size();
    parallel_for(hot_idx.size(), [&](std::size_t q) {
      std::size_t i = hot_idx[q];
      double lo = i * hs, s = 0.0;
      for (std::size_t k = 0; k < rule.x.size(); ++k) {
        double y = g(lo + 0.5 * hs * (rule.x[k] + 1));
        if (std::isfinite(y)) s += rule.w[k] * y;
      }
      part[i] = 0.5 * hs * s;
    });
    return pairwise_sum(part.data(), m);
  };
  PeriodicResult r;
  std::size_t dummy = 0;
  r.value = level(1, r.refined);
  r.coarse = level(2, dummy);
  for (double x : v)
    if (!std::isfinite(x)) ++r.excluded;
  return r;
}

double log_dist_to_cloud(const DynamicalMap& map, const std::vector<cplx>& cloud, cplx z, cplx fz) {
  double best = std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    double d = std::abs(fz - cloud[i]);
    if (d < best) {
      best = d;
      arg = i;
    }
  }
  if (best < 1e-6) return map.log_abs_difference(z, cloud[arg]);
  return std::log(best);
}

}  // namespace

double InvariantTarget::distance(cplx z) const {
  double best = std::numeric_limits<double>::infinity();
  for (cplx a : cloud) best = std::min(best, std::abs(z - a));
  return best;
}

InvariantTarget make_invariant_target(const DynamicalMap& map, std::vector<cplx> cloud, double eps,
                                      std::size_t samples_per_point) {
  if (cloud.empty()) throw Error("invalid parameters", "target cloud is empty");
  if (!(eps > 0)) throw Error("invalid parameters", "eps must be positive");
  InvariantTarget t;
  t.cloud = std::move(cloud);
  t.eps = eps;
  t.min_pole_distance = std::numeric_limits<double>::infinity();
  for (cplx a : t.cloud) {
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) throw Error("invalid parameters", "cloud is unbounded");
    t.min_pole_distance = std::min(t.min_pole_distance, map.distance_to_pole(a));
  }
  if (t.min_pole_distance <= 2 * eps)
    throw Error("pole in neighbourhood", "a pole lies within 2 eps of the target cloud");
  for (cplx a : t.cloud) {
    cplx fa = map.value(a);
    t.invariance_defect = std::max(t.invariance_defect, t.distance(fa));
  }
  // K over concentric rings of the eps-disks (|f'| is subharmonic, so the
  // outer ring dominates; inner rings guard against coarse sampling).
  const std::size_t per_ring = std::max<std::size_t>(8, samples_per_point / 4);
  for (cplx a : t.cloud)
    for (double frac : {0.0, 0.5, 0.9, 1.0})
      for (std::size_t i = 0; i < (frac == 0.0 ? 1 : per_ring); ++i) {
        cplx z = a + std::polar(frac * eps, kTwoPi * i / per_ring);
        t.K = std::max(t.K, std::abs(map.derivative(z)));
      }
  return t;
}

bool AnnulusSeries::any_flagged() const {
  return std::any_of(annuli.begin(), annuli.end(), [](const Annulus& a) { return a.flagged; });
}

Verdict verdict(const AnnulusSeries& series) {
  Verdict v;
  const auto& an = series.annuli;
  if (an.size() < 5) {
    v.note = "fewer than 5 annuli";
    return v;
  }
  if (series.any_flagged()) {
    v.note = "flagged annulus: nested quadrature estimates differ by more than 10%";
    return v;
  }
  std::size_t window = std::max<std::size_t>(4, an.size() / 2);
  std::vector<const Annulus*> fit;
  for (std::size_t i = an.size() - window; i < an.size(); ++i) fit.push_back(&an[i]);
  bool all_zero = std::all_of(fit.begin(), fit.end(), [](const Annulus* a) { return a->value == 0.0; });
  if (all_zero) {
    v.verdict = Finiteness::finite;
    v.q = 0.0;
    v.note = "integrand vanishes on the fitted annuli";
    return v;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (auto* a : fit) {
    if (!(a->value > 0)) continue;
    double x = a->k, y = std::log(a->value);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 2) {
    v.note = "too few positive annuli to fit";
    return v;
  }
  double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  v.q = std::exp(slope);
  const Annulus& last = an.back();
  if (v.q < 0.9) {
    v.verdict = Finiteness::finite;
    v.note = "geometric decay of annulus integrals";
  } else if (v.q > 0.99 && last.value > 10 * last.error) {
    v.verdict = Finiteness::divergent;
    v.note = "annulus integrals bounded below";
  } else {
    v.note = "decay ratio between 0.9 and 0.99 or dominated by quadrature error";
  }
  return v;
}

AnnulusSeries log_dist_integral(const DynamicalMap& map, const InvariantTarget& target, double r0, double s,
                                int annuli, const LogDistOptions& opt) {
  if (!(r0 > 0) || annuli <= 0) throw Error("invalid parameters", "need r0 > 0 and a positive annulus count");
  for (cplx a : target.cloud)
    if (std::abs(a) > r0 - target.eps)
      throw Error("invalid parameters", "r0 must exceed the cloud radius plus eps");
  AnnulusSeries out;
  out.form = "log_dist";
  out.r0 = r0;
  out.exponent = s;
  auto g = [&](cplx z) -> double {
    if (opt.integrand) return opt.integrand(z);
    cplx fz = map.value(z);
    if (!std::isfinite(fz.real()) || !std::isfinite(fz.imag())) return opt.clamp ? 0.0 : std::nan("");
    double v = -log_dist_to_cloud(map, target.cloud, z, fz);
    return opt.clamp ? std::max(0.0, v) : v;
  };
  // One radial level: Gauss nodes in r, periodic rule in θ.
  auto annulus_level = [&](double a, double b, int nr, double spacing, std::size_t& nodes, double* coarse_theta) {
    const Rule& rule = gl_rule(nr);
    double total = 0.0, total_c = 0.0;
    for (int i = 0; i < nr; ++i) {
      double r = 0.5 * (a + b) + 0.5 * (b - a) * rule.x[i];
      std::size_t nt = std::max<std::size_t>(opt.min_theta_nodes, static_cast<std::size_t>(std::ceil(kTwoPi * r / spacing)));
      PeriodicResult pr = periodic_integral([&](double th) { return g(std::polar(r, th)); }, nt);
      nodes += nt;
      double wgt = 0.5 * (b - a) * rule.w[i] * std::pow(r, 1.0 - s);
      total += wgt * pr.value;
      total_c += wgt * pr.coarse;
    }
    if (coarse_theta) *coarse_theta = total_c;
    return total;
  };
  for (int k = 0; k < annuli; ++k) {
    Annulus an;
    an.k = k;
    an.r_in = r0 * std::ldexp(1.0, k);
    an.r_out = 2 * an.r_in;
    an.value = annulus_level(an.r_in, an.r_out, opt.radial_nodes, opt.arc_spacing, an.nodes, nullptr);
    double coarse_theta = 0.0;
    std::size_t tmp = 0;
    annulus_level(an.r_in, an.r_out, std::max(2, opt.radial_nodes / 2), 2 * opt.arc_spacing, tmp, &coarse_theta);
    an.coarse = coarse_theta;
    an.error = std::abs(an.value - an.coarse);
    double scale = std::max(std::abs(an.value), std::abs(an.coarse));
    an.flagged = scale > 1e-300 && an.error > 0.1 * scale;
    out.annuli.push_back(an);
  }
  return out;
}

NevanlinnaValue nevanlinna_m(const DynamicalMap& map, cplx a, double r, std::size_t nodes) {
  if (!(r > 0)) throw Error("invalid parameters", "radius must be positive");
  auto g = [&](double th) -> double {
    cplx z = std::polar(r, th);
    double l = map.log_abs_difference(z, a);
    if (l == -std::numeric_limits<double>::infinity()) return std::nan("");
    if (std::isnan(l)) return 0.0;  // pole: f = ∞ is far from a
    return std::max(0.0, -l);
  };
  PeriodicResult pr = periodic_integral(g, nodes);
  NevanlinnaValue out;
  out.value = pr.value;
  out.error = std::abs(pr.value - pr.coarse);
  out.nodes = std::max<std::size_t>(nodes + (nodes & 1), 8);
  out.refined = pr.refined;
  out.excluded = pr.excluded;
  return out;
}

AnnulusSeries ks_integral(const DynamicalMap& map, cplx a, int M, double r0, int annuli, const KsOptions& opt) {
  if (M < 1) throw Error("invalid parameters", "pole order must be at least 1");
  if (!(r0 > 0) || annuli <= 0) throw Error("invalid parameters", "need r0 > 0 and a positive annulus count");
  AnnulusSeries out;
  out.form = "ks";
  out.r0 = r0;
  out.exponent = 1.0 + 2.0 / M;
  auto m_of = [&](double r, std::size_t& nodes) {
    if (opt.m_override) return opt.m_override(r);
    std::size_t nt = std::max<std::size_t>(opt.min_theta_nodes, std::bit_ceil(static_cast<std::size_t>(8 * r)));
    nodes += nt;
    return nevanlinna_m(map, a, r, nt).value;
  };
  auto level = [&](double lo, double hi, int nr, std::size_t& nodes) {
    const Rule& rule = gl_rule(nr);
    double s = 0.0;
    for (int i = 0; i < nr; ++i) {
      double r = 0.5 * (lo + hi) + 0.5 * (hi - lo) * rule.x[i];
      s += 0.5 * (hi - lo) * rule.w[i] * m_of(r, nodes) / std::pow(r, out.exponent);
    }
    return s;
  };
  for (int k = 0; k < annuli; ++k) {
    Annulus an;
    an.k = k;
    an.r_in = r0 * std::ldexp(1.0, k);
    an.r_out = 2 * an.r_in;
    an.value = level(an.r_in, an.r_out, 2 * opt.radial_nodes, an.nodes);
    std::size_t tmp = 0;
    an.coarse = level(an.r_in, an.r_out, opt.radial_nodes, tmp);
    an.error = std::abs(an.value - an.coarse);
    double scale = std::max(std::abs(an.value), std::abs(an.coarse));
    an.flagged = scale > 1e-300 && an.error > 0.1 * scale;
    out.annuli.push_back(an);
  }
  return out;
}

EscapeReport escape_time_bound_check(const DynamicalMap& map, const InvariantTarget& target,
                                     const std::vector<cplx>& points, int n_cap) {
  if (!(target.K > 1)) throw Error("invalid parameters", "derivative bound K must exceed 1 on the neighbourhood");
  EscapeReport rep;
  rep.K = target.K;
  rep.eps = target.eps;
  rep.predicted_slope = 1.0 / std::log(target.K);
  rep.samples.resize(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    EscapeSample& s = rep.samples[i];
    s.x = points[i];
    cplx y = map.value(s.x);
    s.dist = target.distance(y);
    s.bound = (std::log(target.eps) - std::log(s.dist)) / std::log(target.K);
    for (int n = 1; n <= n_cap; ++n) {
      if (!(target.distance(y) <= target.eps)) {  // non-finite orbits count as escaped
        s.n = n;
        s.escaped = true;
        break;
      }
      y = map.value(y);
    }
    s.ok = !s.escaped || s.n > s.bound;
  });
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t m = 0;
  for (const auto& s : rep.samples) {
    if (!s.escaped) {
      ++rep.flagged;
      continue;
    }
    ++rep.escaped;
    if (!s.ok) ++rep.violations;
    if (!(s.dist > 0) || s.dist > target.eps) continue;
    double x = -std::log(s.dist), y = s.n;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m >= 2) {
    double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    rep.c1 = slope;
    rep.c2 = -(sy - slope * sx) / m;
  }
  return rep;
}

std::vector<cplx> escape_samples(const DynamicalMap& map, const InvariantTarget& target, std::size_t count,
                                 double d_min, std::uint64_t seed, bool real_only) {
  if (!(d_min > 0) || !(d_min < target.eps)) throw Error("invalid parameters", "need 0 < d_min < eps");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, target.cloud.size() - 1);
  std::vector<cplx> out;
  const double la = std::log(d_min), lb = std::log(target.eps);
  BranchWindow window{std::nullopt, 4};
  std::size_t tries = 0;
  while (out.size() < count && tries++ < 20 * count) {
    cplx a = target.cloud[pick(rng)];
    double d = std::exp(la + (lb - la) * u(rng));
    double phi = real_only ? (u(rng) < 0.5 ? 0.0 : std::numbers::pi) : kTwoPi * u(rng);
    cplx w = a + std::polar(d, phi);
    auto pre = map.preimages(w, window);
    if (pre.empty()) continue;
    std::vector<cplx> cand;
    for (auto& [z, id] : pre)
      if (!real_only || std::abs(z.imag()) < 1e-12) cand.push_back(real_only ? cplx{z.real(), 0.0} : z);
    if (cand.empty()) continue;
    std::uniform_int_distribution<std::size_t> which(0, cand.size() - 1);
    out.push_back(cand[which(rng)]);
  }
  return out;
}

}  // namespace nicedyn

#include "nicedyn/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "nicedyn/error.hpp"
#include "nicedyn/parallel.hpp"

namespace nicedyn {

namespace {

struct FastMembership {
  const Region* region;
  bool real_only = false;
  std::vector<std::pair<double, double>> intervals;
  bool operator()(cplx z) const {
    if (real_only && z.imag() == 0.0) {
      double x = z.real();
      for (auto [a, b] : intervals)
        if (x > a && x < b) return true;
      return false;
    }
    return contains(*region, z) == Containment::inside;
  }
};

double integrand(OracleIntegrand tag, const OracleDomain& d, double x) {
  switch (tag) {
    case OracleIntegrand::power: return std::pow(x, d.alpha);
    case OracleIntegrand::power_log: return std::pow(x, d.alpha) * std::log(x);
    case OracleIntegrand::unit_annulus: return 2 * std::numbers::pi * x;
    case OracleIntegrand::sine_semicircle: return 2 * d.r * std::sin(x);
  }
  return 0.0;
}

double simpson(OracleIntegrand tag, const OracleDomain& d, double lo, double hi, std::size_t n) {
  n += n & 1;
  const double h = (hi - lo) / n;
  std::vector<double> terms(n + 1);
  parallel_for(n + 1, [&](std::size_t i) {
    double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    terms[i] = w * integrand(tag, d, lo + i * h);
  });
  return pairwise_sum(terms.data(), terms.size()) * h / 3.0;
}

}  // namespace

std::pair<double, double> batch_means(const std::vector<double>& xs, std::size_t batches) {
  if (batches < 2 || xs.size() < batches) throw Error("invalid parameters", "too few samples for batch means");
  std::size_t per = xs.size() / batches;
  std::vector<double> means(batches);
  for (std::size_t b = 0; b < batches; ++b) means[b] = pairwise_sum(xs.data() + b * per, per) / per;
  double mean = pairwise_sum(means.data(), batches) / batches;
  double var = 0.0;
  for (double m : means) var += (m - mean) * (m - mean);
  var /= (batches - 1);
  return {mean, std::sqrt(var / batches)};
}

BirkhoffEstimate birkhoff_return_time(const DynamicalMap& map, const Region& U, Support support, cplx start,
                                      std::size_t N, std::size_t burn_in, std::uint64_t seed,
                                      std::size_t batches) {
  if (N <= burn_in) throw Error("invalid parameters", "orbit length must exceed the burn-in");
  if (batches < 20) throw Error("invalid parameters", "at least 20 batches are required");
  FastMembership inside{&U, support == Support::real_line, {}};
  if (inside.real_only) inside.intervals = real_axis_intervals(U);
  if (!inside(start)) throw Error("invalid parameters", "start point is not in U");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Box bb = bounding_box(U);
  auto reseed = [&]() -> cplx {
    if (inside.real_only) {
      double total = 0.0;
      for (auto [a, b] : inside.intervals) total += b - a;
      double t = u(rng) * total;
      for (auto [a, b] : inside.intervals) {
        if (t < b - a) return {a + t, 0.0};
        t -= b - a;
      }
      return {inside.intervals.back().first, 0.0};
    }
    for (;;) {
      cplx p{bb.xmin + u(rng) * (bb.xmax - bb.xmin), bb.ymin + u(rng) * (bb.ymax - bb.ymin)};
      if (inside(p)) return p;
    }
  };

  BirkhoffEstimate est;
  est.burn_in = burn_in;
  std::vector<double> times;
  cplx x = start;
  std::size_t since = 0;
  constexpr std::size_t kExcursionCap = 1000000;
  for (std::size_t it = 1; it <= N; ++it) {
    cplx y = map.value(x);
    ++since;
    if (!std::isfinite(y.real()) || !std::isfinite(y.imag())) {
      est.truncated = true;
      est.length = it;
      break;
    }
    bool in = inside(y);
    // Floating-point traps: exact fixed points outside U, or endless excursions.
    if (!in && (y == x || since > kExcursionCap)) {
      y = reseed();
      since = 0;
      ++est.reseeds;
      x = y;
      est.length = it;
      continue;
    }
    if (in) {
      if (it > burn_in) times.push_back(double(since));
      since = 0;
    }
    x = y;
    est.length = it;
  }
  est.returns = times.size();
  est.batches = batches;
  if (times.size() < batches) throw Error("invalid parameters", "too few returns for batch means");
  auto [mean, err] = batch_means(times, batches);
  est.mean = mean;
  est.error = err;
  return est;
}

std::string to_string(OracleIntegrand tag) {
  switch (tag) {
    case OracleIntegrand::power: return "power";
    case OracleIntegrand::power_log: return "power_log";
    case OracleIntegrand::unit_annulus: return "unit_annulus";
    case OracleIntegrand::sine_semicircle: return "sine_semicircle";
  }
  return "";
}

OracleIntegrand oracle_integrand_from_string(const std::string& s) {
  for (auto t : {OracleIntegrand::power, OracleIntegrand::power_log, OracleIntegrand::unit_annulus,
                 OracleIntegrand::sine_semicircle})
    if (to_string(t) == s) return t;
  throw Error("invalid parameters", "unknown oracle integrand '" + s + "'");
}

QuadratureValue brute_quadrature(OracleIntegrand tag, const OracleDomain& dom, std::size_t nodes) {
  double lo = dom.a, hi = dom.b;
  if (tag == OracleIntegrand::sine_semicircle) {
    lo = 0.0;
    hi = std::numbers::pi;
  }
  if (!(hi > lo)) throw Error("invalid parameters", "empty quadrature domain");
  if ((tag == OracleIntegrand::power || tag == OracleIntegrand::power_log) && !(lo > 0))
    throw Error("invalid parameters", "radial integrands need a > 0");
  std::size_t n = std::max<std::size_t>(4, nodes - nodes % 4);
  QuadratureValue q;
  q.nodes = n + 1;
  double fine = simpson(tag, dom, lo, hi, n), coarse = simpson(tag, dom, lo, hi, n / 2);
  q.value = fine;
  q.error = std::abs(fine - coarse) / 15.0;
  return q;
}

double closed_form(OracleIntegrand tag, const OracleDomain& d) {
  switch (tag) {
    case OracleIntegrand::power:
      if (d.alpha == -1.0) return std::log(d.b / d.a);
      return (std::pow(d.b, d.alpha + 1) - std::pow(d.a, d.alpha + 1)) / (d.alpha + 1);
    case OracleIntegrand::power_log: {
      if (d.alpha == -1.0) return 0.5 * (std::log(d.b) * std::log(d.b) - std::log(d.a) * std::log(d.a));
      double p = d.alpha + 1;
      auto F = [&](double x) { return std::pow(x, p) * (std::log(x) / p - 1.0 / (p * p)); };
      return F(d.b) - F(d.a);
    }
    case OracleIntegrand::unit_annulus: return std::numbers::pi * (d.b * d.b - d.a * d.a);
    case OracleIntegrand::sine_semicircle: return 4 * d.r;
  }
  return 0.0;
}

QuadratureValue brute_nevanlinna(const DynamicalMap& map, cplx a, double r, std::size_t nodes) {
  std::size_t n = std::max<std::size_t>(8, nodes + (nodes & 1));
  std::vector<double> v(n);
  parallel_for(n, [&](std::size_t i) {
    double l = map.log_abs_difference(std::polar(r, 2 * std::numbers::pi * i / n), a);
    v[i] = std::isfinite(l) ? std::max(0.0, -l) : 0.0;
  });
  std::vector<double> even(n / 2);
  for (std::size_t i = 0; i < n / 2; ++i) even[i] = v[2 * i];
  QuadratureValue q;
  q.nodes = n;
  q.value = pairwise_sum(v.data(), n) * 2 * std::numbers::pi / n;
  double coarse = pairwise_sum(even.data(), n / 2) * 2 * std::numbers::pi / (n / 2);
  q.error = std::abs(q.value - coarse);
  return q;
}

double annulus_power_closed_form(double a, double b, double s) {
  if (s == 2.0) return 2 * std::numbers::pi * std::log(b / a);
  return 2 * std::numbers::pi * (std::pow(b, 2 - s) - std::pow(a, 2 - s)) / (2 - s);
}

double chebyshev_acim_mass(double a, double b) {
  a = std::clamp(a, 0.0, 1.0);
  b = std::clamp(b, 0.0, 1.0);
  return (std::asin(2 * b - 1) - std::asin(2 * a - 1)) / std::numbers::pi;
}

int doubling_escape_time(double d, double eps) {
  int n = 1;
  double x = d;
  while (!(x > eps)) {
    x *= 2;
    ++n;
  }
  return n;
}

}  // namespace nicedyn

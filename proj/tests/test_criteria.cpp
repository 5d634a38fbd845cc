#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "nicedyn/error.hpp"
#include "nicedyn/oracles.hpp"

using namespace nicedyn;

namespace {

AnnulusSeries series_of(const std::vector<double>& values, const std::vector<bool>& flags = {}) {
  AnnulusSeries s;
  s.form = "synthetic";
  s.r0 = 1.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    Annulus a;
    a.k = static_cast<int>(k);
    a.r_in = std::ldexp(1.0, k);
    a.r_out = 2 * a.r_in;
    a.value = values[k];
    a.coarse = values[k];
    a.flagged = k < flags.size() && flags[k];
    s.annuli.push_back(a);
  }
  return s;
}

std::vector<cplx> tangent_cloud() {
  return post_singular_orbit(DynamicalMap::tangent(1.0), 40).finite_points();
}

}  // namespace

TEST_CASE("verdict on synthetic annulus series") {
  std::vector<double> halving, ones, alternating;
  std::vector<bool> flags;
  for (int k = 0; k < 10; ++k) {
    halving.push_back(std::ldexp(1.0, -k));
    ones.push_back(1.0);
    alternating.push_back(k % 2 ? 1.0 : 0.1);
    flags.push_back(k % 2 == 1);
  }
  Verdict h = verdict(series_of(halving));
  CHECK(h.verdict == Finiteness::finite);
  CHECK(h.q == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(verdict(series_of(ones)).verdict == Finiteness::divergent);
  CHECK(verdict(series_of(alternating, flags)).verdict == Finiteness::inconclusive);
  CHECK(verdict(series_of({1.0, 0.5})).verdict == Finiteness::inconclusive);
}

TEST_CASE("log-distance integral vanishes for z^2 and A = {0}") {
  auto sq = fixtures::square();
  InvariantTarget target = make_invariant_target(sq, {0.0}, 0.05);
  AnnulusSeries s = log_dist_integral(sq, target, 2.0, 4.0, 6);
  REQUIRE(s.annuli.size() == 6);
  for (const auto& a : s.annuli) CHECK(a.value == 0.0);
  Verdict v = verdict(s);
  CHECK(v.verdict == Finiteness::finite);
}

TEST_CASE("log-distance quadrature against the closed form") {
  auto sq = fixtures::square();
  InvariantTarget target = make_invariant_target(sq, {0.0}, 0.05);
  LogDistOptions opt;
  opt.integrand = [](cplx) { return 1.0; };
  const double r0 = 3.0, s = 4.0;
  AnnulusSeries series = log_dist_integral(sq, target, r0, s, 5, opt);
  for (const auto& a : series.annuli) {
    double exact = annulus_power_closed_form(a.r_in, a.r_out, s);
    double formula = 2 * M_PI * std::pow(2.0, a.k * (2 - s)) * std::pow(r0, 2 - s) * (std::pow(2.0, 2 - s) - 1) / (2 - s);
    CHECK(exact == doctest::Approx(formula).epsilon(1e-14));
    CHECK(std::abs(a.value - exact) <= 1e-6 * exact);
  }
}

TEST_CASE("log-distance integral for the tangent map") {
  auto tn = DynamicalMap::tangent(1.0);
  InvariantTarget target = make_invariant_target(tn, tangent_cloud(), 0.05);
  AnnulusSeries s = log_dist_integral(tn, target, 10.0, 4.0, 6);
  Verdict v = verdict(s);
  CHECK(v.verdict == Finiteness::finite);
  CHECK(v.q > 0.3);
  CHECK(v.q < 0.7);
}

TEST_CASE("invariant target rejects poles near the cloud") {
  auto tn = DynamicalMap::tangent(1.0);
  CHECK_THROWS_AS(make_invariant_target(tn, {cplx{M_PI / 2 + 0.01}}, 0.05), Error);
}

TEST_CASE("Nevanlinna proximity function") {
  auto sq = fixtures::square();
  CHECK(nevanlinna_m(sq, 0.0, 2.0).value == 0.0);
  auto tn = DynamicalMap::tangent(1.0);
  NevanlinnaValue m = nevanlinna_m(tn, {0.0, 1.0}, 50.0);
  CHECK(m.value / 200.0 == doctest::Approx(1.0).epsilon(0.02));
  QuadratureValue brute = brute_nevanlinna(tn, {0.0, 1.0}, 50.0, 1000000);
  CHECK(std::abs(m.value - brute.value) <= 1e-4 * brute.value);
}

TEST_CASE("proximity to 4 under z^2 on |z| = 2") {
  // |4 e^{2i theta} - 4| = 8 |sin theta|: only |sin theta| < 1/8 contributes
  auto sq = fixtures::square();
  NevanlinnaValue m = nevanlinna_m(sq, 4.0, 2.0);
  CHECK(m.value > 0);
  QuadratureValue brute = brute_nevanlinna(sq, 4.0, 2.0, 1000000);
  CHECK(m.value == doctest::Approx(brute.value).epsilon(1e-4));
  double theta = std::asin(1.0 / 8);
  double support_share = 4 * theta / (2 * M_PI);
  CHECK(support_share < 0.1);
}

TEST_CASE("KS integral") {
  auto sq = fixtures::square();
  AnnulusSeries zero = ks_integral(sq, 0.0, 1, 2.0, 6);
  for (const auto& a : zero.annuli) CHECK(a.value == 0.0);
  CHECK(verdict(zero).verdict == Finiteness::finite);

  auto tn = DynamicalMap::tangent(1.0);
  AnnulusSeries ks = ks_integral(tn, {0.0, 1.0}, 1, 10.0, 8);
  Verdict v = verdict(ks);
  CHECK(v.verdict == Finiteness::finite);
  CHECK(v.q >= 0.4);
  CHECK(v.q <= 0.6);

  KsOptions opt;
  opt.m_override = [](double r) { return r * r; };
  AnnulusSeries grow = ks_integral(tn, {0.0, 1.0}, 1, 10.0, 8, opt);
  for (const auto& a : grow.annuli) CHECK(a.value == doctest::Approx(std::log(2.0)).epsilon(1e-6));
  CHECK(verdict(grow).verdict == Finiteness::divergent);

  opt.m_override = [](double r) { return r * r * std::abs(std::sin(3 * r)); };
  CHECK(verdict(ks_integral(tn, {0.0, 1.0}, 1, 10.0, 8, opt)).verdict == Finiteness::inconclusive);
}

TEST_CASE("escape time for the doubling map") {
  auto dbl = DynamicalMap::rational({0, 2}, {1}, 1);
  InvariantTarget target = make_invariant_target(dbl, {0.0}, 1.0);
  CHECK(target.K == doctest::Approx(2.0));
  auto pts = escape_samples(dbl, target, 500, 1e-12, 3);
  EscapeReport er = escape_time_bound_check(dbl, target, pts);
  CHECK(er.pass());
  CHECK(er.escaped == pts.size());
  for (const auto& s : er.samples) CHECK(s.n == doubling_escape_time(s.dist, 1.0));
  CHECK(er.c1 == doctest::Approx(1 / std::log(2.0)).epsilon(0.01));
  CHECK(er.predicted_slope == doctest::Approx(1 / std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("escape time outside the target is one") {
  auto dbl = DynamicalMap::rational({0, 2}, {1}, 1);
  InvariantTarget target = make_invariant_target(dbl, {0.0}, 1.0);
  EscapeReport er = escape_time_bound_check(dbl, target, {cplx{0.8}, cplx{0.0, 3.0}});
  for (const auto& s : er.samples) {
    CHECK(s.n == 1);
    CHECK(s.bound <= 0);
    CHECK(s.ok);
  }
}

TEST_CASE("escape time bound on the Chebyshev map") {
  auto f = fixtures::chebyshev();
  InvariantTarget target = make_invariant_target(f, {0.0, 1.0}, 0.05);
  CHECK(target.invariance_defect == 0.0);
  auto pts = escape_samples(f, target, 2000, 1e-12, 5, true);
  EscapeReport er = escape_time_bound_check(f, target, pts);
  CHECK(er.violations == 0);
  CHECK(er.escaped > 1900);
}

TEST_CASE("escape check needs expansion near the target") {
  auto sq = fixtures::square();
  InvariantTarget target = make_invariant_target(sq, {0.0}, 0.05);
  CHECK_THROWS_AS(escape_time_bound_check(sq, target, {cplx{0.01}}), Error);
}

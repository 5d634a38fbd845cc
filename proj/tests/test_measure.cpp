#include <cmath>
#include <numeric>

#include "doctest.h"
#include "fixtures.hpp"
#include "nicedyn/error.hpp"
#include "nicedyn/pullback.hpp"

using namespace nicedyn;

namespace {

Region strip(double a, double b) { return make_region({{a, -0.1}, {b, -0.1}, {b, 0.1}, {a, 0.1}}); }

// One return component of time 1 covering the whole base.
ReturnMap whole_base_return(const Region& base, cplx center) {
  PullbackCell c;
  c.region = base;
  c.depth = 1;
  c.word.steps = {0};
  c.center = center;
  c.log_deriv = {0.0};
  return assemble_return_map(base, center, 10.0, Support::real_line, {c}, ReturnCaps{});
}

double total_cell_mass(const UlamModel& m, const InducedDensity& d) {
  double s = 0;
  for (std::size_t j = 0; j < m.size(); ++j) s += d.rho[j] * m.cell_mass[j];
  return s;
}

}  // namespace

TEST_CASE("conformal Jacobian by substitution") {
  auto sq = fixtures::square();
  ConformalSpec zero{0.0, 0.0, MetricTag::euclidean};
  CHECK(conformal_jacobian(zero, sq, cplx{0.3, 0.2}).value == 1.0);
  CHECK(conformal_jacobian(zero, sq, cplx{0.0}).value == 1.0);  // 0^0 = 1
  ConformalSpec leb;
  CHECK(conformal_jacobian(leb, sq, cplx{1.0}).value == doctest::Approx(4.0).epsilon(1e-14));
  auto cz = conformal_jacobian(leb, sq, cplx{0.0});
  CHECK(cz.value == 0.0);
  CHECK_FALSE(cz.infinite);
}

TEST_CASE("conformal Jacobian at a tangent pole") {
  auto tn = DynamicalMap::tangent(1.0);
  ConformalSpec euclid;
  auto e = conformal_jacobian(euclid, tn, cplx{M_PI / 2});
  CHECK(e.infinite);
  CHECK(e.zero_mass);
  // at a simple pole the spherical derivative of tan tends to 1 + |p|^2
  ConformalSpec sph{2.0, 0.0, MetricTag::spherical};
  auto s = conformal_jacobian(sph, tn, cplx{M_PI / 2});
  CHECK_FALSE(s.infinite);
  CHECK(s.value == doctest::Approx(std::pow(1 + M_PI * M_PI / 4, 2)).epsilon(1e-9));
}

TEST_CASE("stratified samples stay in the cell and repeat with the seed") {
  Box b{0.0, 1.0, 2.0, 3.0};
  auto a = stratified_samples(b, false, 256, 5);
  auto c = stratified_samples(b, false, 256, 5);
  CHECK(a == c);
  for (cplx z : a) CHECK(b.contains(z));
  auto line = stratified_samples(b, true, 64, 5);
  for (cplx z : line) CHECK(z.imag() == 0.0);  // one-dimensional samples lie on the real axis
}

TEST_CASE("identity return map gives P = [1]") {
  auto id = DynamicalMap::rational({0, 1}, {1}, 1);
  Region U = strip(0.0, 1.0);
  ReturnMap rm = whole_base_return(U, 0.5);
  UlamModel m = build_ulam(id, rm, 1.0, 64, 1);
  REQUIRE(m.size() == 1);
  REQUIRE(m.weight.size() == 1);
  CHECK(m.weight[0] == 1.0);
  CHECK(m.row_sum_defect() == 0.0);
  InducedDensity d = stationary_density(m);
  CHECK(d.rho[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.pi[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("two swapped cells give a permutation and a uniform density") {
  auto flip = DynamicalMap::rational({1, -1}, {1}, 1);
  Region U = strip(0.0, 1.0);
  ReturnMap rm = whole_base_return(U, 0.5);
  UlamModel m = build_ulam(flip, rm, 0.5, 64, 1);
  REQUIRE(m.size() == 2);
  REQUIRE(m.col.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(m.row_start[i + 1] - m.row_start[i] == 1);
    CHECK(m.col[m.row_start[i]] == 1 - i);
    CHECK(m.weight[m.row_start[i]] == 1.0);
  }
  InducedDensity d = stationary_density(m);
  CHECK(d.pi[0] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(d.pi[1] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(d.rho[0] == doctest::Approx(d.rho[1]).epsilon(1e-10));
}

TEST_CASE("Chebyshev Ulam rows sum to one") {
  const ReturnMap& rm = fixtures::chebyshev_return_map();
  UlamModel m = build_ulam(fixtures::chebyshev(), rm, diameter(rm.base) / 64, 256, 3);
  CHECK(m.row_sum_defect() == 0.0);
  CHECK(m.escaping_mass() < 0.05);
}

TEST_CASE("Chebyshev induced density") {
  const auto& fx = fixtures::chebyshev_density();
  const InducedDensity& d = fx.density;
  CHECK(d.residual < 1e-8);
  CHECK(d.positive);
  CHECK(d.reachable == fx.model.size());
  CHECK(total_cell_mass(fx.model, d) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::accumulate(d.pi.begin(), d.pi.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Chebyshev density matches the arcsine law") {
  // the induced measure is the arcsine law restricted to U and normalised
  const auto& fx = fixtures::chebyshev_density();
  const ReturnMap& rm = fixtures::chebyshev_return_map();
  double muU = fixtures::chebyshev_mass_of(rm.base);
  double l1 = 0;
  for (std::size_t j = 0; j < fx.model.size(); ++j) {
    const Box& b = fx.model.partition.cells[j];
    double exact = (std::asin(2 * b.xmax - 1) - std::asin(2 * b.xmin - 1)) / M_PI / muU;
    l1 += std::abs(fx.density.pi[j] - exact);
  }
  CHECK(l1 < 0.05);
}

TEST_CASE("power iteration reports non-convergence") {
  const auto& fx = fixtures::chebyshev_density();
  CHECK_THROWS_AS(stationary_density(fx.model, 1e-11, 2), Error);
}

TEST_CASE("folklore distortion trivial cases") {
  auto f = fixtures::chebyshev();
  const auto& fx = fixtures::chebyshev_density();
  const ReturnMap& rm = fixtures::chebyshev_return_map();
  std::vector<std::size_t> A, B;
  for (std::size_t j = 0; j < fx.model.size(); ++j) (j % 2 ? A : B).push_back(j);
  DistortionTrial same = folklore_distortion_check(f, rm, fx.model, A, A, 2, 20000, 1, 1.0);
  CHECK(same.ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(same.pass);
  DistortionTrial k0 = folklore_distortion_check(f, rm, fx.model, A, B, 0, 20000, 1, 1.0);
  CHECK(k0.ratio == 1.0);
  CHECK(k0.bound == 1.0);
  CHECK(k0.pass);
}

TEST_CASE("folklore distortion sandwich on Chebyshev halves") {
  auto f = fixtures::chebyshev();
  const auto& fx = fixtures::chebyshev_density();
  const ReturnMap& rm = fixtures::chebyshev_return_map();
  std::vector<std::size_t> left, right;
  for (std::size_t j = 0; j < fx.model.size(); ++j) (j < fx.model.size() / 2 ? left : right).push_back(j);
  DistortionTrial t = folklore_distortion_check(f, rm, fx.model, left, right, 2, 100000, 11, 1.0);
  CHECK_FALSE(t.inconclusive);
  CHECK(t.pass);
  CHECK(t.ratio <= t.bound * t.margin);
  CHECK(t.ratio >= 1 / (t.bound * t.margin));
}

TEST_CASE("spread mass arithmetic") {
  SpreadMassEstimate one = spread_mass({1, 1, 1}, {0.2, 0.3, 0.5}, 40);
  CHECK(one.total == doctest::Approx(1.0).epsilon(1e-14));
  SpreadMassEstimate two = spread_mass({1, 3}, {0.5, 0.5}, 40);
  CHECK(two.total == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(two.truncated_total == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(two.shells.size() == 2);
}

TEST_CASE("spread mass verdicts from shell tails") {
  std::vector<int> times;
  std::vector<double> geo, flat;
  for (int r = 1; r <= 20; ++r) {
    times.push_back(r);
    geo.push_back(0.5 * std::pow(0.5, r - 1));
    flat.push_back(1.0 / (r * (r + 1.0)));  // r * mass ~ 1/r: the sum diverges
  }
  SpreadMassEstimate g = spread_mass(times, geo, 20);
  CHECK(g.verdict == Finiteness::finite);
  CHECK(g.tail_ratio == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(g.total == doctest::Approx(2.0).epsilon(1e-6));  // mean of a geometric law
  std::vector<int> heavy_times;
  std::vector<double> heavy;
  for (int r = 1; r <= 20; ++r) {
    heavy_times.push_back(r);
    heavy.push_back(r * 1e-3);  // shell contributions keep growing
  }
  CHECK(spread_mass(heavy_times, heavy, 20).verdict == Finiteness::divergent);
  CHECK(spread_mass({1, 2}, {0.5, 0.5}, 2).verdict == Finiteness::inconclusive);
}

TEST_CASE("Chebyshev spread mass is finite") {
  const auto& fx = fixtures::chebyshev_density();
  SpreadMassEstimate sp = spread_mass(fx.density, fx.model, fixtures::chebyshev_return_map());
  CHECK(sp.verdict == Finiteness::finite);
  // Kac: total = 1 / mu(U) for the arcsine law
  double kac = 1.0 / fixtures::chebyshev_mass_of(fixtures::chebyshev_return_map().base);
  CHECK(sp.total == doctest::Approx(kac).epsilon(0.02));
}

TEST_CASE("density tail of 1/z is exact") {
  auto inv = DynamicalMap::rational({1}, {0, 1}, 1);
  TailReport t = density_tail_check(inv, 0.0, 1, 1.0, 10, 100);
  CHECK(t.exponent == 4.0);
  CHECK(t.c == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(t.variation == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(t.pass());
}

TEST_CASE("density tail exponent for a double pole") {
  auto inv2 = DynamicalMap::rational({1}, {0, 0, 1}, 1);
  TailReport t = density_tail_check(inv2, 0.0, 2, 1.0, 10, 100);
  CHECK(t.exponent == 3.0);
  // |f'(z)| = 2|w|^{3/2} at z = w^{-1/2}, so rho |w|^3 = 1/4
  CHECK(t.c == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("density tail of the tangent map") {
  auto tn = DynamicalMap::tangent(1.0);
  TailReport t = density_tail_check(tn, {M_PI / 2, 0.0}, 1, 1.0, 10, 100);
  CHECK(t.c > 0);
  CHECK(t.variation < 10);
  CHECK(t.pass());
}

TEST_CASE("density floor and component masses") {
  const auto& fx = fixtures::chebyshev_density();
  const ReturnMap& rm = fixtures::chebyshev_return_map();
  double c0 = density_floor(fx.model, fx.density, Disk{rm.center, rm.R});
  CHECK(c0 > 0);
  auto nu = component_masses(fx.model, fx.density, rm);
  REQUIRE(nu.size() == rm.components.size());
  double s = std::accumulate(nu.begin(), nu.end(), 0.0);
  CHECK(s == doctest::Approx(rm.captured_mass_fraction).epsilon(0.03));
  CHECK_THROWS_AS(density_floor(fx.model, fx.density, Disk{10.0, 0.1}), Error);
}

#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "nicedyn/error.hpp"

using namespace nicedyn;

namespace {

// A nice set given directly as a disk, for checks that only need its shape.
NiceSet disk_set(cplx center, double r, double R, int k_max = 64) {
  NiceSet U;
  U.params.center = center;
  U.params.r = r;
  U.params.R = R;
  U.params.k_max = k_max;
  U.region = disk_region(center, r, 256);
  return U;
}

}  // namespace

TEST_CASE("no pullbacks leaves the base disk") {
  auto f = fixtures::chebyshev();
  NiceSetParams p = fixtures::chebyshev_params();
  p.n_max = 0;
  NiceSet U = construct_nice_set(f, p, post_singular_orbit(f, 30));
  CHECK(U.cells.empty());
  CHECK(U.diagnostics.n_cells == 0);
  CHECK(area(U.region) == doctest::Approx(M_PI * p.r * p.r).epsilon(0.01));
  CHECK(hausdorff_distance(U.region, disk_region(p.center, p.r, 512)) < 0.01 * p.r);
}

TEST_CASE("parameter contract") {
  auto f = fixtures::chebyshev();
  auto cloud = post_singular_orbit(f, 30);
  NiceSetParams p = fixtures::chebyshev_params();
  p.kappa = 0.9;
  CHECK_THROWS_AS(construct_nice_set(f, p, cloud), Error);
  p = fixtures::chebyshev_params();
  p.r = p.R;
  CHECK_THROWS_AS(construct_nice_set(f, p, cloud), Error);
  p = fixtures::chebyshev_params();
  p.R = 0.6;  // dist(1/2, {0, 1}) = 1/2
  CHECK_THROWS(construct_nice_set(f, p, cloud));
}

TEST_CASE("Chebyshev nice set passes every gate") {
  auto f = fixtures::chebyshev();
  const NiceSet& U = fixtures::chebyshev_set();
  CHECK(U.diagnostics.n_cells > 0);
  NicenessReport nr = verify_niceness(f, U, 30, 2000);
  CHECK(nr.pass());
  CHECK(verify_inclusion(U, 720).pass());
  ExpansionReport er = verify_expansion(U);
  CHECK(er.pass());
  CHECK(er.theta > 1.0);
  CHECK_FALSE(er.vacuous);
}

TEST_CASE("corrupted boundary is caught") {
  auto f = fixtures::chebyshev();
  const NiceSet& U = fixtures::chebyshev_set();
  Region bad = corrupt_boundary(U, 0.01);
  NicenessReport nr = verify_niceness(f, bad, U.diagnostics.boundary_accuracy, 30, 2000);
  CHECK_FALSE(nr.pass());
  CHECK(nr.violations.size() >= 1);
}

TEST_CASE("niceness holds vacuously when orbits leave at once") {
  // every point of B(3, 0.1) escapes under z^2 without returning
  auto f = fixtures::square();
  NicenessReport nr = verify_niceness(f, disk_region(3.0, 0.1, 256), 1e-6, 30, 500);
  CHECK(nr.pass());
  CHECK(nr.escaped > 0);
}

TEST_CASE("fixed-point nice set for z^2 - 2") {
  auto f = fixtures::quadratic();
  NiceSetParams p = fixtures::quadratic_params();
  p.kappa = 1.3;
  NiceSet U = construct_nice_set(f, p, post_singular_orbit(f, 30));
  REQUIRE(U.diagnostics.period);
  CHECK(*U.diagnostics.period == 1);
  REQUIRE(U.diagnostics.periodic_ratio);
  // the fixed-point branch contracts diameters by |f'(-1)| = 2
  CHECK(*U.diagnostics.periodic_ratio == doctest::Approx(0.5).epsilon(0.02));
  CHECK(verify_expansion(U).theta > 1.0);
  CHECK(verify_niceness(f, U, 30, 2000).pass());
}

TEST_CASE("inclusion checks") {
  NiceSet U = disk_set(0.5, 0.1, 0.4);
  U.params.kappa = 1.2;
  CHECK(verify_inclusion(U, 360).pass());
  Region spiky = U.region;
  spiky.boundary[10] = cplx{0.5 + 1.5 * 1.2 * 0.1, 0.0};
  InclusionReport ir = verify_inclusion(spiky, 0.5, 0.1, 1.2, 360);
  CHECK_FALSE(ir.pass());
  CHECK_FALSE(ir.outer_ok);
  REQUIRE(ir.witness);
  CHECK(std::abs(*ir.witness - spiky.boundary[10]) < 1e-12);
}

TEST_CASE("expansion from return cells") {
  PullbackCell c;
  c.deriv_min = 2.0;
  ExpansionReport one = verify_expansion(std::vector<PullbackCell>{c});
  CHECK(one.theta == 2.0);
  CHECK(one.pass());
  ExpansionReport none = verify_expansion(std::vector<PullbackCell>{});
  CHECK(std::isinf(none.theta));
  CHECK(none.vacuous);
  CHECK(none.pass());
}

TEST_CASE("pullback cells at depth zero and one") {
  auto sq = fixtures::square();
  NiceSet U = disk_set(1.0, 0.1, 0.5);
  auto d0 = pullback_cells_of(sq, U, 0);
  REQUIRE(d0.size() == 1);
  CHECK(hausdorff_distance(d0[0].region, U.region) < 1e-6);
  auto d1 = pullback_cells_of(sq, U, 1);
  REQUIRE(d1.size() == 3);  // U itself plus the two square roots
  int near_plus = 0, near_minus = 0;
  for (const auto& c : d1) {
    if (c.depth != 1) continue;
    if (std::abs(c.center - 1.0) < 1e-9) ++near_plus;
    if (std::abs(c.center + 1.0) < 1e-9) ++near_minus;
  }
  CHECK(near_plus == 1);
  CHECK(near_minus == 1);
}

TEST_CASE("tangent pullbacks over a capped set of sheets") {
  auto f = DynamicalMap::tangent(1.0, 3);
  NiceSet U = disk_set(2.0, 0.2, 1.0, 3);
  auto cells = pullback_cells_of(f, U, 1);
  std::size_t depth1 = 0;
  for (const auto& c : cells)
    if (c.depth == 1) ++depth1;
  CHECK(depth1 == 7);
}

TEST_CASE("pullbacks are nested or disjoint up to depth 3") {
  for (int which = 0; which < 2; ++which) {
    auto f = which ? fixtures::quadratic() : fixtures::chebyshev();
    const NiceSet& U = which ? fixtures::quadratic_set() : fixtures::chebyshev_set();
    auto cells = pullback_cells_of(f, U, 3);
    CHECK(cells.size() > 1);
    std::size_t overlapping = 0;
    for (std::size_t i = 0; i < cells.size(); ++i)
      for (std::size_t j = i + 1; j < cells.size(); ++j)
        if (classify_pair(cells[i].region, cells[j].region) == PairRelation::overlapping) ++overlapping;
    CHECK(overlapping == 0);
  }
}

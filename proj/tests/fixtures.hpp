#pragma once

#include <cmath>

#include "nicedyn/criteria.hpp"
#include "nicedyn/measure.hpp"
#include "nicedyn/nice.hpp"

namespace fixtures {

using namespace nicedyn;

inline DynamicalMap chebyshev() { return DynamicalMap::rational({0, 4, -4}, {1}); }
inline DynamicalMap quadratic() { return DynamicalMap::rational({-2, 0, 1}, {1}); }
inline DynamicalMap square() { return DynamicalMap::rational({0, 0, 1}, {1}); }

inline NiceSetParams chebyshev_params() {
  NiceSetParams p;
  p.center = {0.5, 0.0};
  p.R = 0.4;
  p.r = 0.15;
  p.kappa = 1.2;
  return p;
}

inline NiceSetParams quadratic_params() {
  NiceSetParams p;
  p.center = {-1.0, 0.0};
  p.R = 0.8;
  p.r = 0.2;
  p.kappa = 1.2;
  return p;
}

// Built once per test binary; construction takes a few seconds.
inline const NiceSet& chebyshev_set() {
  static const NiceSet U = [] {
    auto f = chebyshev();
    return construct_nice_set(f, chebyshev_params(), post_singular_orbit(f, 30));
  }();
  return U;
}

inline const NiceSet& quadratic_set() {
  static const NiceSet U = [] {
    auto f = quadratic();
    return construct_nice_set(f, quadratic_params(), post_singular_orbit(f, 30));
  }();
  return U;
}

inline const ReturnMap& chebyshev_return_map() {
  static const ReturnMap rm = first_return_components(chebyshev(), chebyshev_set(), ReturnCaps{}, Support::real_line);
  return rm;
}

struct DensityFixture {
  UlamModel model;
  InducedDensity density;
};

inline const DensityFixture& chebyshev_density() {
  static const DensityFixture d = [] {
    const ReturnMap& rm = chebyshev_return_map();
    DensityFixture out;
    out.model = build_ulam(chebyshev(), rm, diameter(rm.base) / 64, 4096, 7);
    out.density = stationary_density(out.model);
    return out;
  }();
  return d;
}

// Exact Chebyshev invariant probability of U: arcsine law.
inline double chebyshev_mass_of(const Region& U) {
  double m = 0;
  for (auto [a, b] : real_axis_intervals(U)) m += (std::asin(2 * b - 1) - std::asin(2 * a - 1)) / M_PI;
  return m;
}

}  // namespace fixtures

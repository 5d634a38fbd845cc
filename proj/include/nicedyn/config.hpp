#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nicedyn/criteria.hpp"
#include "nicedyn/oracles.hpp"

namespace nicedyn {

struct MapSpec {
  std::string kind = "rational";
  std::vector<cplx> numerator, denominator{cplx{1.0}};
  int min_degree = 2;
  cplx lambda{1.0, 0.0};
  int k_max = 64;
};

DynamicalMap make_map(const MapSpec& spec);

struct OrbitConfig {
  int depth = 30;
  std::size_t cap = 10000;
};

struct NiceConfig {
  NiceSetParams params;
  int orbit_depth = 30;
  int n_check = 30;
  int samples = 2000;
  int inclusion_samples = 720;
  double corrupt_fraction = 0.0;  ///< test hook: corrupt the boundary before verification
};

struct ReturnConfig {
  ReturnCaps caps;
  Support support = Support::planar;
  std::size_t validation_points = 10000;
};

struct DensityConfig {
  int divisions = 64;  ///< grid spacing h = diam(U) / divisions
  std::size_t samples_per_cell = 4096;
  double tol = 1e-11;
  int max_iterations = 20000;
  bool refinement_check = true;
};

struct SpreadConfig {
  bool birkhoff = true;
  std::size_t birkhoff_length = 1000000;
  std::size_t burn_in = 1000;
  std::size_t batches = 20;
};

struct TailConfig {
  std::optional<cplx> pole;
  int order = 1;
  std::optional<double> c0;  ///< density floor; taken from the density artifact when absent
  double floor_radius = 0.05;
  double r0 = 10.0, r1 = 100.0;
  double t = 2.0;
  std::size_t samples = 64;
  double capture = 1.0;
};

struct TargetConfig {
  std::vector<cplx> cloud;
  int post_singular_depth = 40;  ///< used when the cloud is empty
  double eps = 0.05;
};

struct CriterionConfig {
  std::string form = "ks";  ///< ks, log_dist or escape
  cplx a{0.0, 1.0};
  int M = 1;
  double r0 = 10.0;
  int annuli = 8;
  std::optional<double> s;  ///< log_dist exponent, default 2 + 2/M
  bool clamp = true;
  TargetConfig target;
  int radial_nodes = 8;
  std::size_t theta_nodes = 4096;
  double arc_spacing = 0.05;
  std::optional<double> synthetic_power;  ///< ks: replace m(r) by r^p
  std::size_t samples = 2000;
  double d_min = 1e-12;
  int n_cap = 500;
  bool real_samples = false;
};

struct OracleConfig {
  std::string integrand = "power";  ///< a registered tag or "nevanlinna"
  OracleDomain domain;
  cplx a{0.0, 1.0};
  std::size_t nodes = 1000000;
};

struct WarningEntry {
  std::string module;
  std::string message;
};

struct RunConfig {
  MapSpec map;
  std::uint64_t seed = 1;
  std::string output = "nicedyn_out";
  OrbitConfig orbit;
  NiceConfig niceset;
  ReturnConfig returnmap;
  DensityConfig density;
  SpreadConfig spread;
  TailConfig tail;
  CriterionConfig criterion;
  OracleConfig oracle;
  nlohmann::json echo;  ///< validated configuration with defaults filled
};

/// Parses and validates a JSON configuration. Malformed input raises
/// Error("parse error") with the byte position; invalid or unknown keys raise
/// a single Error("validation") listing every offending key.
RunConfig parse_config(const std::string& text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

}  // namespace nicedyn

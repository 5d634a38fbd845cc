// Acceptance run: one PASS/FAIL line per criterion. Exit status is the number
// of failed criteria.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <string>

#include "fixtures.hpp"
#include "nicedyn/oracles.hpp"
#include "nicedyn/pipeline.hpp"

using namespace nicedyn;

namespace tol {
constexpr double nice_seconds = 120;
constexpr double theta_change = 0.05;
constexpr double agreement = 0.99;
constexpr double captured = 0.9;
constexpr double residual = 1e-8;
constexpr double density_l1 = 0.05;
constexpr double kac = 0.05;
constexpr double kac_sigmas = 3;
constexpr double kac_seconds = 300;
constexpr double tail_variation = 10;
constexpr double inverse_tail = 1e-9;
constexpr double nevanlinna = 0.02;
constexpr double nevanlinna_brute = 1e-4;
constexpr double ks_q_lo = 0.4, ks_q_hi = 0.6;
constexpr double ks_seconds = 300;
constexpr double escape_slope = 0.01;
constexpr double quadrature = 1e-6;
}  // namespace tol

namespace {

int failures = 0;

void report(int n, const std::string& name, bool ok, const std::string& detail) {
  std::printf("criterion %2d %s: %s (%s)\n", n, ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct TestMap {
  std::string name;
  DynamicalMap map;
  NiceSetParams params;
  std::function<const NiceSet&()> set;
};

std::vector<TestMap> test_maps() {
  return {{"chebyshev", fixtures::chebyshev(), fixtures::chebyshev_params(), fixtures::chebyshev_set},
          {"z^2-2", fixtures::quadratic(), fixtures::quadratic_params(), fixtures::quadratic_set}};
}

void niceness_gate() {
  bool ok = true;
  std::string detail;
  for (const auto& t : test_maps()) {
    auto t0 = std::chrono::steady_clock::now();
    const NiceSet& U = t.set();
    NicenessReport nr = verify_niceness(t.map, U, 30, 2000);
    NicenessReport bad = verify_niceness(t.map, corrupt_boundary(U, 0.01), U.diagnostics.boundary_accuracy, 30, 2000);
    double secs = seconds_since(t0);
    ok = ok && nr.pass() && !bad.violations.empty() && secs < tol::nice_seconds;
    detail += fmt("%s: %zu violations, mutant %zu, %.1fs; ", t.name.c_str(), nr.violations.size(),
                  bad.violations.size(), secs);
  }
  report(1, "niceness gate", ok, detail.substr(0, detail.size() - 2));
}

void nested_or_disjoint() {
  bool ok = true;
  std::string detail;
  for (const auto& t : test_maps()) {
    auto t0 = std::chrono::steady_clock::now();
    auto cells = pullback_cells_of(t.map, t.set(), 3);
    std::size_t pairs = 0, overlapping = 0;
    for (std::size_t i = 0; i < cells.size(); ++i)
      for (std::size_t j = i + 1; j < cells.size(); ++j, ++pairs)
        if (classify_pair(cells[i].region, cells[j].region) == PairRelation::overlapping) ++overlapping;
    double secs = seconds_since(t0);
    ok = ok && overlapping == 0 && secs < tol::nice_seconds;
    detail += fmt("%s: %zu cells, %zu pairs, %zu overlapping, %.1fs; ", t.name.c_str(), cells.size(), pairs,
                  overlapping, secs);
  }
  report(2, "nested-or-disjoint", ok, detail.substr(0, detail.size() - 2));
}

void expansion() {
  bool ok = true;
  std::string detail;
  for (const auto& t : test_maps()) {
    const NiceSet& U = t.set();
    ExpansionReport er = verify_expansion(U);
    NiceSetParams p = U.params;
    p.n_max *= 2;
    NiceSet V = construct_nice_set(t.map, p, post_singular_orbit(t.map, 30));
    ExpansionReport er2 = verify_expansion(V);
    double change = std::abs(er2.theta - er.theta) / er.theta;
    ok = ok && !er.vacuous && er.theta > 1 && er2.theta > 1 && change < tol::theta_change;
    detail += fmt("%s: theta %.4g, doubled N_max %.4g, change %.2g; ", t.name.c_str(), er.theta, er2.theta, change);
  }
  report(3, "expansion", ok, detail.substr(0, detail.size() - 2));
}

void return_map() {
  auto f = fixtures::chebyshev();
  const ReturnMap& rm = fixtures::chebyshev_return_map();
  ForwardValidation fv = validate_return_forward(f, rm, 10000);
  bool monotone = true;
  double prev = 0;
  std::string series;
  for (int t : {10, 20, 30, 40}) {
    ReturnCaps caps;
    caps.t_max = t;
    double c = first_return_components(f, fixtures::chebyshev_set(), caps, Support::real_line).captured_mass_fraction;
    monotone = monotone && c >= prev;
    prev = c;
    series += fmt("%.4f ", c);
  }
  bool ok = fv.agreement() >= tol::agreement && rm.captured_mass_fraction > tol::captured && monotone;
  report(4, "return-map cross-validation", ok,
         fmt("agreement %.4f on %zu points, captured %.4f at T_max 40, T_max 10/20/30/40: %s", fv.agreement(),
             fv.points, rm.captured_mass_fraction, series.substr(0, series.size() - 1).c_str()));
}

void distortion() {
  const auto& fx = fixtures::chebyshev_density();
  DistortionReport r =
      folklore_distortion_suite(fixtures::chebyshev(), fixtures::chebyshev_return_map(), fx.model, {0, 1, 2}, 20, 100000, 3, 1.0);
  report(5, "folklore distortion sandwich", r.pass() && r.inconclusive == 0,
         fmt("C %.4g, %zu trials, %zu violations, %zu inconclusive", r.C, r.trials.size(), r.violations,
             r.inconclusive));
}

void density() {
  const auto& fx = fixtures::chebyshev_density();
  const ReturnMap& rm = fixtures::chebyshev_return_map();
  UlamModel fine = build_ulam(fixtures::chebyshev(), rm, diameter(rm.base) / 128, 4096, 8);
  InducedDensity df = stationary_density(fine);
  double l1 = density_l1_distance(fx.model, fx.density, fine, df);
  bool ok = fx.density.residual < tol::residual && fx.density.positive && fx.density.reachable == fx.model.size() &&
            l1 < tol::density_l1 && df.max_cell_mass() < fx.density.max_cell_mass();
  report(6, "stationary density", ok,
         fmt("residual %.2g, positive %d on %zu cells, L1 change %.4f, max cell mass %.4g -> %.4g", fx.density.residual,
             fx.density.positive, fx.density.reachable, l1, fx.density.max_cell_mass(), df.max_cell_mass()));
}

void kac() {
  auto t0 = std::chrono::steady_clock::now();
  auto f = fixtures::chebyshev();
  const auto& fx = fixtures::chebyshev_density();
  const ReturnMap& rm = fixtures::chebyshev_return_map();
  SpreadMassEstimate sp = spread_mass(fx.density, fx.model, rm);
  UlamModel fine = build_ulam(f, rm, diameter(rm.base) / 128, 4096, 8);
  SpreadMassEstimate sp2 = spread_mass(stationary_density(fine), fine, rm);
  // Ulam discretisation error is O(h), so the coarse error is about twice the refinement change
  double spread_err = 2 * std::abs(sp.total - sp2.total);
  BirkhoffEstimate b = birkhoff_return_time(f, rm.base, rm.support, rm.center, 1000000, 1000, 9);
  double rel = std::abs(sp.total - b.mean) / b.mean;
  bool overlap = std::abs(sp.total - b.mean) <= tol::kac_sigmas * b.error + spread_err;
  double secs = seconds_since(t0);
  bool ok = sp.verdict == Finiteness::finite && rel < tol::kac && overlap && secs < tol::kac_seconds;
  report(7, "Kac consistency", ok,
         fmt("spread %.4f +- %.2g (%s), Birkhoff %.4f +- %.2g, relative difference %.4f, %.1fs", sp.total, spread_err,
             to_string(sp.verdict).c_str(), b.mean, b.error, rel, secs));
}

void tail() {
  TailReport t = density_tail_check(DynamicalMap::tangent(1.0), {M_PI / 2, 0.0}, 1, 1.0, 10, 100);
  TailReport inv = density_tail_check(DynamicalMap::rational({1}, {0, 1}, 1), 0.0, 1, 1.0, 10, 100);
  double exact_err = std::max(std::abs(inv.c - 1.0), std::abs(inv.c_max - 1.0));
  bool ok = t.c > 0 && t.variation < tol::tail_variation && exact_err < tol::inverse_tail;
  report(8, "density tail", ok,
         fmt("tangent c %.4g, variation %.4g; 1/z constant error %.2g", t.c, t.variation, exact_err));
}

void nevanlinna() {
  auto tn = DynamicalMap::tangent(1.0);
  NevanlinnaValue m = nevanlinna_m(tn, {0.0, 1.0}, 50.0);
  QuadratureValue brute = brute_nevanlinna(tn, {0.0, 1.0}, 50.0, 1000000);
  double ratio = m.value / 200.0;
  double rel = std::abs(m.value - brute.value) / brute.value;
  bool ok = std::abs(ratio - 1) < tol::nevanlinna && rel < tol::nevanlinna_brute;
  report(9, "m(r,a) asymptotic", ok,
         fmt("m(50,i)/200 = %.5f, brute force at 1e6 nodes %.8g, relative difference %.2g", ratio, brute.value, rel));
}

void ks() {
  auto t0 = std::chrono::steady_clock::now();
  auto tn = DynamicalMap::tangent(1.0);
  Verdict v = verdict(ks_integral(tn, {0.0, 1.0}, 1, 10.0, 8));
  KsOptions grow;
  grow.m_override = [](double r) { return r * r; };
  Verdict vg = verdict(ks_integral(tn, {0.0, 1.0}, 1, 10.0, 8, grow));
  KsOptions rough;
  rough.m_override = [](double r) { return r * r * std::abs(std::sin(3 * r)); };
  AnnulusSeries rs = ks_integral(tn, {0.0, 1.0}, 1, 10.0, 8, rough);
  Verdict vr = verdict(rs);
  double secs = seconds_since(t0);
  bool ok = v.verdict == Finiteness::finite && v.q >= tol::ks_q_lo && v.q <= tol::ks_q_hi &&
            vg.verdict == Finiteness::divergent && rs.any_flagged() && vr.verdict == Finiteness::inconclusive &&
            secs < tol::ks_seconds;
  report(10, "KS integral verdict", ok,
         fmt("tangent %s q %.4f; m = r^2 %s; flagged run %s; %.1fs", to_string(v.verdict).c_str(), v.q,
             to_string(vg.verdict).c_str(), to_string(vr.verdict).c_str(), secs));
}

void escape() {
  struct Case {
    std::string name;
    DynamicalMap map;
    std::vector<cplx> cloud;
    double eps;
    bool real;
  };
  std::vector<Case> cases{{"2z", DynamicalMap::rational({0, 2}, {1}, 1), {0.0}, 1.0, false},
                          {"chebyshev", fixtures::chebyshev(), {0.0, 1.0}, 0.05, true},
                          {"z^2-2", fixtures::quadratic(), {-2.0, 2.0}, 0.05, true}};
  bool ok = true;
  std::string detail;
  for (const auto& c : cases) {
    InvariantTarget target = make_invariant_target(c.map, c.cloud, c.eps);
    auto pts = escape_samples(c.map, target, 2000, 1e-12, 5, c.real);
    EscapeReport er = escape_time_bound_check(c.map, target, pts);
    ok = ok && er.violations == 0 && er.escaped > 0;
    detail += fmt("%s: %zu/%zu escaping hold", c.name.c_str(), er.escaped - er.violations, er.escaped);
    if (c.name == "2z") {
      double rel = std::abs(er.c1 * std::log(2.0) - 1);
      ok = ok && rel < tol::escape_slope;
      detail += fmt(", slope %.5f vs 1/log 2 (relative %.2g)", er.c1, rel);
    }
    detail += "; ";
  }
  report(11, "escape-time bound", ok, detail.substr(0, detail.size() - 2));
}

void quadrature() {
  struct Case {
    OracleIntegrand tag;
    OracleDomain dom;
  };
  std::vector<Case> cases{{OracleIntegrand::power, {2.0, 1024.0, -3.0, 1.0}},
                          {OracleIntegrand::power, {1.0, 5.0, 1.5, 1.0}},
                          {OracleIntegrand::power_log, {1.0, 8.0, -2.0, 1.0}},
                          {OracleIntegrand::power_log, {0.5, 3.0, 0.5, 1.0}},
                          {OracleIntegrand::sine_semicircle, {0, 0, 0, 50.0}}};
  double worst = 0;
  for (const auto& c : cases) {
    double exact = closed_form(c.tag, c.dom);
    worst = std::max(worst, std::abs(brute_quadrature(c.tag, c.dom).value - exact) / std::abs(exact));
  }
  report(12, "quadrature oracles", worst < tol::quadrature, fmt("worst relative error %.2g over %zu integrands", worst, cases.size()));
}

void determinism() {
  const char* body = R"({"map": {"numerator": [0, 4, -4]}, "seed": 11,
    "niceset": {"center": 0.5, "R": 0.4, "r": 0.15, "kappa": 1.2},
    "returnmap": {"support": "real_line"},
    "density": {"samples_per_cell": 1024},
    "spread": {"birkhoff_length": 200000},
    "criterion": {"form": "escape", "target": {"cloud": [0, 1]}, "real_samples": true}})";
  const char* stages[] = {"orbit", "niceset", "returnmap", "density", "spread", "criterion"};
  auto base = std::filesystem::temp_directory_path() / "nicedyn_acceptance";
  std::filesystem::remove_all(base);
  std::string runs[2];
  for (int i = 0; i < 2; ++i) {
    RunConfig cfg = parse_config(body);
    cfg.output = (base / std::to_string(i)).string();
    cfg.echo["output"] = "out";  // the directory name is the only intended difference
    for (const char* s : stages) {
      RunReport rep;
      run(s, cfg, rep);
      auto j = rep.to_json();
      j.erase("timing");
      runs[i] += dump(j);
    }
  }
  std::filesystem::remove_all(base);
  report(13, "determinism", runs[0] == runs[1] && !runs[0].empty(),
         fmt("%zu stages, %zu report bytes, identical %d", std::size(stages), runs[0].size(), runs[0] == runs[1]));
}

}  // namespace

int main() {
  auto t0 = std::chrono::steady_clock::now();
  const std::function<void()> criteria[] = {niceness_gate, nested_or_disjoint, expansion, return_map, distortion,
                                            density, kac, tail, nevanlinna, ks, escape, quadrature, determinism};
  int n = 0;
  for (const auto& c : criteria) {
    ++n;
    try {
      c();
    } catch (const std::exception& e) {
      report(n, "error", false, e.what());
    }
  }
  std::printf("%d of %zu criteria passed in %.1fs\n", int(std::size(criteria)) - failures, std::size(criteria),
              seconds_since(t0));
  return failures;
}

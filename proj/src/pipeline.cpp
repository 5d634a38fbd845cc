#include "nicedyn/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>

#include "nicedyn/error.hpp"

namespace nicedyn {

using nlohmann::json;

namespace {

json number(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? json("nan") : json(v > 0 ? "inf" : "-inf");
}

json load_upstream(const RunConfig& cfg, const std::string& name, const std::string& producer) {
  std::string path = artifact_path(cfg, name);
  if (!std::filesystem::exists(path))
    throw Error("missing artifact", path + " not found; run the '" + producer + "' command first");
  return read_json(path);
}

int run_orbit(const RunConfig& cfg, const DynamicalMap& map, RunReport& rep) {
  PostSingularCloud cloud = post_singular_orbit(map, cfg.orbit.depth, cfg.orbit.cap);
  json pts = json::array();
  for (const auto& p : cloud.points) pts.push_back(to_json(p));
  json sv = json::array();
  for (const auto& s : map.singular_values())
    sv.push_back({{"point", to_json(s.point)}, {"kind", s.kind == SingularKind::critical ? "critical" : "asymptotic"}});
  json poles = json::array();
  for (const auto& p : map.poles()) poles.push_back({{"location", to_json(p.location)}, {"order", p.order}});
  json omitted = json::array();
  for (const auto& p : map.omitted_values()) omitted.push_back(to_json(p));
  rep.results = {{"points", pts},
                 {"contains_infinity", cloud.contains_infinity()},
                 {"depth", cloud.depth},
                 {"truncated", cloud.truncated},
                 {"truncation_note", cloud.truncation_note},
                 {"singular_values", sv},
                 {"poles", poles},
                 {"omitted_values", omitted}};
  if (cloud.truncated) rep.warn("maps", cloud.truncation_note);
  return 0;
}

int run_niceset(const RunConfig& cfg, const DynamicalMap& map, RunReport& rep) {
  const NiceConfig& nc = cfg.niceset;
  PostSingularCloud cloud = post_singular_orbit(map, nc.orbit_depth);
  NiceSet U = construct_nice_set(map, nc.params, cloud);
  for (const auto& w : U.diagnostics.warnings) rep.warn("nice", w);
  if (nc.corrupt_fraction > 0) {
    U.region = corrupt_boundary(U, nc.corrupt_fraction);
    rep.warn("nice", "test hook: boundary corrupted before verification");
  }
  NicenessReport nr = verify_niceness(map, U.region, U.diagnostics.boundary_accuracy, nc.n_check, nc.samples);
  InclusionReport ir = verify_inclusion(U.region, U.params.center, U.params.r, U.params.kappa, nc.inclusion_samples);
  ExpansionReport er = verify_expansion(U);
  json viol = json::array();
  for (std::size_t i = 0; i < std::min<std::size_t>(nr.violations.size(), 50); ++i) {
    const auto& v = nr.violations[i];
    viol.push_back({{"boundary_point", to_json(v.boundary_point)}, {"iterate", v.iterate}, {"landing", to_json(v.landing)}});
  }
  json art = niceset_artifact(U);
  write_text(artifact_path(cfg, "niceset.json"), dump(art));
  std::vector<std::vector<double>> rows;
  for (cplx z : U.region.boundary) rows.push_back({z.real(), z.imag()});
  write_csv(artifact_path(cfg, "niceset_boundary.csv"), {"re", "im"}, rows);
  rep.results = {{"r_used", U.params.r},
                 {"area", art["area"]},
                 {"diameter", art["diameter"]},
                 {"vertices", U.region.size()},
                 {"diagnostics", art["diagnostics"]},
                 {"niceness",
                  {{"n_check", nr.n_checked},
                   {"samples", nr.samples},
                   {"violations", nr.violations.size()},
                   {"violation_examples", viol},
                   {"indeterminate", nr.indeterminate},
                   {"escaped", nr.escaped},
                   {"pass", nr.pass()}}},
                 {"inclusion",
                  {{"inner_ok", ir.inner_ok},
                   {"outer_ok", ir.outer_ok},
                   {"max_radius", ir.max_radius},
                   {"pass", ir.pass()}}},
                 {"expansion",
                  {{"theta", number(er.theta)}, {"vacuous", er.vacuous}, {"cells", er.n_cells}, {"pass", er.pass()}}}};
  return (nr.pass() && ir.pass() && er.pass()) ? 0 : 2;
}

int run_returnmap(const RunConfig& cfg, const DynamicalMap& map, RunReport& rep) {
  NiceSet U = niceset_from_artifact(load_upstream(cfg, "niceset.json", "niceset"));
  ReturnMap rm = first_return_components(map, U, cfg.returnmap.caps, cfg.returnmap.support);
  for (const auto& w : rm.warnings) rep.warn("induce", w);
  ForwardValidation fv = validate_return_forward(map, rm, cfg.returnmap.validation_points);
  if (rm.captured_mass_fraction < 0.9)
    rep.warn("induce", "captured mass fraction " + std::to_string(rm.captured_mass_fraction) + " below 0.9");
  write_text(artifact_path(cfg, "returnmap.json"), dump(returnmap_artifact(rm)));
  std::vector<std::vector<double>> rows;
  json shells = json::object();
  for (const auto& c : rm.components) {
    rows.push_back({double(c.return_time), c.center.real(), c.center.imag(), c.mass, c.deriv_min, c.deriv_max,
                    c.distortion_bound});
    std::string key = std::to_string(c.return_time);
    shells[key] = shells.value(key, 0) + 1;
  }
  write_csv(artifact_path(cfg, "returnmap_components.csv"),
            {"return_time", "center_re", "center_im", "mass", "deriv_min", "deriv_max", "distortion_bound"}, rows);
  bool pass = fv.agreement() >= 0.99;
  rep.results = {{"components", rm.components.size()},
                 {"support", to_string(rm.support)},
                 {"base_mass", rm.base_mass},
                 {"captured_mass_fraction", rm.captured_mass_fraction},
                 {"depth_reached", rm.depth_reached},
                 {"cap_hit", rm.cap_hit},
                 {"anomalies", rm.anomalies},
                 {"max_distortion", rm.max_distortion()},
                 {"components_by_return_time", shells},
                 {"forward_validation",
                  {{"points", fv.points},
                   {"in_components", fv.in_components},
                   {"agree", fv.agree},
                   {"agreement", fv.agreement()},
                   {"escaping", fv.escaping},
                   {"unmatched", fv.unmatched},
                   {"mismatches", fv.mismatches.size()}}},
                 {"pass", pass}};
  return pass ? 0 : 2;
}

int run_density(const RunConfig& cfg, const DynamicalMap& map, RunReport& rep) {
  ReturnMap rm = returnmap_from_artifact(load_upstream(cfg, "returnmap.json", "returnmap"));
  const DensityConfig& dc = cfg.density;
  const double h = diameter(rm.base) / dc.divisions;
  UlamModel model = build_ulam(map, rm, h, dc.samples_per_cell, cfg.seed);
  for (const auto& w : model.warnings) rep.warn("measure", w);
  InducedDensity d = stationary_density(model, dc.tol, dc.max_iterations);
  for (const auto& w : d.warnings) rep.warn("measure", w);
  write_text(artifact_path(cfg, "density.json"), dump(density_artifact(model, d, h)));
  std::vector<std::vector<double>> rows;
  for (std::size_t j = 0; j < model.size(); ++j) {
    cplx c = model.partition.center(j);
    rows.push_back({c.real(), c.imag(), d.rho[j]});
  }
  write_csv(artifact_path(cfg, "density.csv"), {"re", "im", "rho"}, rows);
  bool pass = d.residual < 1e-8 && d.positive;
  json res = {{"cells", model.size()},
              {"h", h},
              {"samples_per_cell", dc.samples_per_cell},
              {"row_sum_defect", model.row_sum_defect()},
              {"escaping_mass", model.escaping_mass()},
              {"iterations", d.iterations},
              {"residual", d.residual},
              {"normalization", d.normalization},
              {"positive", d.positive},
              {"reachable", d.reachable},
              {"max_cell_mass", d.max_cell_mass()},
              {"dropped_cells", model.dropped}};
  if (dc.refinement_check) {
    UlamModel fine = build_ulam(map, rm, h / 2, dc.samples_per_cell, cfg.seed + 1);
    InducedDensity df = stationary_density(fine, dc.tol, dc.max_iterations);
    double l1 = density_l1_distance(model, d, fine, df);
    bool decreased = df.max_cell_mass() < d.max_cell_mass();
    res["refinement"] = {{"h", h / 2},
                         {"cells", fine.size()},
                         {"l1_change", l1},
                         {"residual", df.residual},
                         {"max_cell_mass", df.max_cell_mass()},
                         {"max_cell_mass_decreased", decreased}};
    pass = pass && l1 < 0.05 && decreased;
  }
  res["pass"] = pass;
  rep.results = res;
  return pass ? 0 : 2;
}

int run_spread(const RunConfig& cfg, const DynamicalMap& map, RunReport& rep) {
  ReturnMap rm = returnmap_from_artifact(load_upstream(cfg, "returnmap.json", "returnmap"));
  UlamModel model;
  InducedDensity d;
  density_from_artifact(load_upstream(cfg, "density.json", "density"), rm, model, d);
  SpreadMassEstimate sp = spread_mass(d, model, rm);
  json shells = json::array();
  std::vector<std::vector<double>> rows;
  for (const auto& s : sp.shells) {
    shells.push_back({{"return_time", s.return_time},
                      {"mass", s.mass},
                      {"contribution", s.contribution},
                      {"partial_sum", s.partial_sum}});
    rows.push_back({double(s.return_time), s.mass, s.contribution, s.partial_sum});
  }
  write_csv(artifact_path(cfg, "spread_shells.csv"), {"return_time", "mass", "contribution", "partial_sum"}, rows);
  json res = {{"shells", shells},
              {"truncated_total", sp.truncated_total},
              {"tail_ratio", number(sp.tail_ratio)},
              {"tail_amplitude", number(sp.tail_amplitude)},
              {"tail_mass", sp.tail_mass},
              {"tail_contribution", sp.tail_contribution},
              {"total", sp.total},
              {"complete_depth", sp.complete_depth},
              {"verdict", to_string(sp.verdict)},
              {"note", sp.note}};
  bool pass = sp.verdict == Finiteness::finite;
  if (cfg.spread.birkhoff) {
    BirkhoffEstimate b = birkhoff_return_time(map, rm.base, rm.support, rm.center, cfg.spread.birkhoff_length,
                                              cfg.spread.burn_in, cfg.seed, cfg.spread.batches);
    double rel = std::abs(sp.total - b.mean) / b.mean;
    res["birkhoff"] = {{"length", b.length},
                       {"burn_in", b.burn_in},
                       {"returns", b.returns},
                       {"mean", b.mean},
                       {"error", b.error},
                       {"batches", b.batches},
                       {"reseeds", b.reseeds},
                       {"truncated", b.truncated},
                       {"relative_difference", rel},
                       {"agree", rel < 0.05}};
    if (b.truncated) rep.warn("oracles", "orbit left the numeric range; estimate truncated");
    pass = pass && rel < 0.05;
  }
  res["pass"] = pass;
  rep.results = res;
  return pass ? 0 : 2;
}

int run_tail(const RunConfig& cfg, const DynamicalMap& map, RunReport& rep) {
  const TailConfig& tc = cfg.tail;
  cplx pole;
  int order = tc.order;
  if (tc.pole) {
    pole = *tc.pole;
  } else {
    const Pole* best = nullptr;
    for (const auto& p : map.poles()) {
      if (p.location.is_infinite()) continue;
      cplx v = p.location.value();
      if (!best || std::abs(v) < std::abs(best->location.value()) ||
          (std::abs(v) == std::abs(best->location.value()) && v.real() > best->location.value().real()))
        best = &p;
    }
    if (!best) throw Error("invalid parameters", "the map has no finite pole");
    pole = best->location.value();
    order = best->order;
  }
  double c0;
  std::string c0_source = "config";
  if (tc.c0) {
    c0 = *tc.c0;
  } else {
    ReturnMap rm = returnmap_from_artifact(load_upstream(cfg, "returnmap.json", "returnmap"));
    UlamModel model;
    InducedDensity d;
    density_from_artifact(load_upstream(cfg, "density.json", "density"), rm, model, d);
    c0 = density_floor(model, d, Disk{rm.center, rm.R});
    c0_source = "density floor";
  }
  TailReport tr = density_tail_check(map, pole, order, c0, tc.r0, tc.r1, tc.t, tc.samples, tc.capture);
  std::vector<std::vector<double>> rows;
  for (const auto& s : tr.samples) rows.push_back({s.modulus, s.w.real(), s.w.imag(), s.rho_bound, s.scaled});
  write_csv(artifact_path(cfg, "tail.csv"), {"modulus", "w_re", "w_im", "rho_bound", "scaled"}, rows);
  rep.results = {{"pole", to_json(pole)},
                 {"order", order},
                 {"t", tr.t},
                 {"exponent", tr.exponent},
                 {"c0", c0},
                 {"c0_source", c0_source},
                 {"c", tr.c},
                 {"c_max", tr.c_max},
                 {"variation", number(tr.variation)},
                 {"samples", tr.samples.size()},
                 {"pass", tr.pass()}};
  return tr.pass() ? 0 : 2;
}

InvariantTarget target_of(const RunConfig& cfg, const DynamicalMap& map) {
  const TargetConfig& t = cfg.criterion.target;
  std::vector<cplx> cloud = t.cloud;
  if (cloud.empty()) cloud = post_singular_orbit(map, t.post_singular_depth).finite_points();
  return make_invariant_target(map, cloud, t.eps);
}

void write_series(const RunConfig& cfg, const AnnulusSeries& s) {
  std::vector<std::vector<double>> rows;
  for (const auto& a : s.annuli)
    rows.push_back({double(a.k), a.r_in, a.r_out, a.value, a.error, a.flagged ? 1.0 : 0.0});
  write_csv(artifact_path(cfg, "criterion_annuli.csv"), {"k", "r_in", "r_out", "value", "error", "flagged"}, rows);
}

int run_criterion(const RunConfig& cfg, const DynamicalMap& map, RunReport& rep) {
  const CriterionConfig& c = cfg.criterion;
  if (c.form == "escape") {
    InvariantTarget target = target_of(cfg, map);
    auto pts = escape_samples(map, target, c.samples, c.d_min, cfg.seed, c.real_samples);
    EscapeReport er = escape_time_bound_check(map, target, pts, c.n_cap);
    std::vector<std::vector<double>> rows;
    for (const auto& s : er.samples)
      rows.push_back({s.x.real(), s.x.imag(), s.dist, double(s.n), s.bound, s.ok ? 1.0 : 0.0});
    write_csv(artifact_path(cfg, "escape.csv"), {"x_re", "x_im", "dist", "n", "bound", "ok"}, rows);
    rep.results = {{"form", "escape"},
                   {"K", target.K},
                   {"eps", target.eps},
                   {"cloud_size", target.cloud.size()},
                   {"invariance_defect", target.invariance_defect},
                   {"samples", er.samples.size()},
                   {"escaped", er.escaped},
                   {"flagged", er.flagged},
                   {"violations", er.violations},
                   {"c1", er.c1},
                   {"c2", er.c2},
                   {"predicted_slope", er.predicted_slope},
                   {"pass", er.pass()}};
    return er.pass() ? 0 : 2;
  }
  AnnulusSeries series;
  json extra = json::object();
  if (c.form == "ks") {
    KsOptions opt;
    opt.radial_nodes = c.radial_nodes;
    opt.min_theta_nodes = c.theta_nodes;
    if (c.synthetic_power) {
      double p = *c.synthetic_power;
      opt.m_override = [p](double r) { return std::pow(r, p); };
      rep.warn("criteria", "synthetic m(r) = r^" + std::to_string(p) + " replaces the Nevanlinna quantity");
    }
    series = ks_integral(map, c.a, c.M, c.r0, c.annuli, opt);
    extra["a"] = to_json(c.a);
  } else {
    InvariantTarget target = target_of(cfg, map);
    LogDistOptions opt;
    opt.radial_nodes = 2 * c.radial_nodes;
    opt.arc_spacing = c.arc_spacing;
    opt.clamp = c.clamp;
    double s = c.s ? *c.s : 2.0 + 2.0 / c.M;
    series = log_dist_integral(map, target, c.r0, s, c.annuli, opt);
    extra = {{"cloud_size", target.cloud.size()},
             {"eps", target.eps},
             {"invariance_defect", target.invariance_defect},
             {"clamp", c.clamp}};
  }
  write_series(cfg, series);
  Verdict v = verdict(series);
  bool pass = v.verdict == Finiteness::finite;
  rep.results = {{"form", c.form}, {"series", to_json(series)}, {"verdict", to_json(v)}, {"details", extra}, {"pass", pass}};
  return pass ? 0 : 2;
}

int run_oracle(const RunConfig& cfg, const DynamicalMap& map, RunReport& rep) {
  const OracleConfig& o = cfg.oracle;
  if (o.integrand == "nevanlinna") {
    QuadratureValue brute = brute_nevanlinna(map, o.a, o.domain.r, o.nodes);
    NevanlinnaValue main = nevanlinna_m(map, o.a, o.domain.r);
    rep.results = {{"integrand", o.integrand},
                   {"r", o.domain.r},
                   {"value", to_json(o.a)},
                   {"brute", brute.value},
                   {"brute_error", brute.error},
                   {"nodes", brute.nodes},
                   {"adaptive", main.value},
                   {"relative_difference", std::abs(main.value - brute.value) / std::max(1e-300, std::abs(brute.value))}};
    return 0;
  }
  OracleIntegrand tag = oracle_integrand_from_string(o.integrand);
  QuadratureValue q = brute_quadrature(tag, o.domain, o.nodes);
  double exact = closed_form(tag, o.domain);
  rep.results = {{"integrand", o.integrand},
                 {"domain", {{"a", o.domain.a}, {"b", o.domain.b}, {"alpha", o.domain.alpha}, {"r", o.domain.r}}},
                 {"value", q.value},
                 {"error", q.error},
                 {"nodes", q.nodes},
                 {"closed_form", exact},
                 {"relative_error", std::abs(q.value - exact) / std::max(1e-300, std::abs(exact))}};
  return 0;
}

}  // namespace

const std::vector<std::string>& pipeline_commands() {
  static const std::vector<std::string> cmds{"orbit", "niceset", "returnmap", "density", "spread", "tail",
                                             "criterion", "oracle"};
  return cmds;
}

std::string artifact_path(const RunConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.output) / name).string();
}

int run(const std::string& command, const RunConfig& cfg, RunReport& rep) {
  auto t0 = std::chrono::steady_clock::now();
  rep.command = command;
  rep.config = cfg.echo;
  int code = 0;
  try {
    if (std::find(pipeline_commands().begin(), pipeline_commands().end(), command) == pipeline_commands().end())
      throw Error("invalid parameters", "unknown command '" + command + "'");
    std::filesystem::create_directories(cfg.output);
    DynamicalMap map = make_map(cfg.map);
    if (command == "orbit") code = run_orbit(cfg, map, rep);
    else if (command == "niceset") code = run_niceset(cfg, map, rep);
    else if (command == "returnmap") code = run_returnmap(cfg, map, rep);
    else if (command == "density") code = run_density(cfg, map, rep);
    else if (command == "spread") code = run_spread(cfg, map, rep);
    else if (command == "tail") code = run_tail(cfg, map, rep);
    else if (command == "criterion") code = run_criterion(cfg, map, rep);
    else code = run_oracle(cfg, map, rep);
  } catch (const Error& e) {
    rep.results = {{"error", {{"kind", e.kind()}, {"message", e.detail()}}}};
    code = 1;
  } catch (const std::exception& e) {
    rep.results = {{"error", {{"kind", "internal"}, {"message", e.what()}}}};
    code = 1;
  }
  rep.exit_code = code;
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  try {
    write_text(artifact_path(cfg, "report_" + command + ".json"), dump(rep.to_json()));
  } catch (const Error&) {
    if (code == 0) code = 1;
    rep.exit_code = code;
  }
  return code;
}

}  // namespace nicedyn

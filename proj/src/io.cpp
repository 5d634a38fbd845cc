#include "nicedyn/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nicedyn/error.hpp"

namespace nicedyn {

using nlohmann::json;

namespace {

// JSON has no infinities; they are written as strings.
json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double number_from(const json& j) {
  if (j.is_number()) return j.get<double>();
  std::string s = j.get<std::string>();
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  return NAN;
}

MetricTag metric_from(const std::string& s) { return s == "euclidean" ? MetricTag::euclidean : MetricTag::spherical; }
std::string metric_name(MetricTag m) { return m == MetricTag::euclidean ? "euclidean" : "spherical"; }

json points_json(const std::vector<cplx>& pts) {
  json a = json::array();
  for (cplx z : pts) a.push_back(to_json(z));
  return a;
}

std::vector<cplx> points_from(const json& j) {
  std::vector<cplx> out;
  for (const auto& e : j) out.push_back(complex_from_json(e));
  return out;
}

}  // namespace

json to_json(cplx z) { return json::array({number(z.real()), number(z.imag())}); }

cplx complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  return {number_from(j.at(0)), number_from(j.at(1))};
}

json to_json(const SpherePoint& p) {
  if (p.is_infinite()) return "inf";
  return to_json(p.value());
}

json to_json(const Region& r) {
  json holes = json::array();
  for (const auto& h : r.holes) holes.push_back(points_json(h));
  return {{"boundary", points_json(r.boundary)}, {"holes", holes}};
}

Region region_from_json(const json& j) {
  Region r;
  r.boundary = points_from(j.at("boundary"));
  for (const auto& h : j.at("holes")) r.holes.push_back(points_from(h));
  return r;
}

json to_json(const NiceSetParams& p) {
  return {{"center", to_json(p.center)},
          {"R", p.R},
          {"r", p.r},
          {"kappa", p.kappa},
          {"n_max", p.n_max},
          {"eps_min_factor", p.eps_min_factor},
          {"k_max", p.k_max},
          {"retry_limit", p.retry_limit},
          {"resolution", p.resolution},
          {"raster_resolution", p.raster_resolution},
          {"boundary_vertices", p.boundary_vertices},
          {"max_cells", p.max_cells},
          {"max_return_cells", p.max_return_cells},
          {"metric", metric_name(p.metric)}};
}

NiceSetParams nice_params_from_json(const json& j) {
  NiceSetParams p;
  p.center = complex_from_json(j.at("center"));
  p.R = j.at("R");
  p.r = j.at("r");
  p.kappa = j.at("kappa");
  p.n_max = j.at("n_max");
  p.eps_min_factor = j.at("eps_min_factor");
  p.k_max = j.at("k_max");
  p.retry_limit = j.at("retry_limit");
  p.resolution = j.at("resolution");
  p.raster_resolution = j.at("raster_resolution");
  p.boundary_vertices = j.at("boundary_vertices");
  p.max_cells = j.at("max_cells");
  p.max_return_cells = j.at("max_return_cells");
  p.metric = metric_from(j.at("metric"));
  return p;
}

json niceset_artifact(const NiceSet& U) {
  const NiceDiagnostics& d = U.diagnostics;
  json diag = {{"n_cells", d.n_cells},
               {"visited", d.visited},
               {"pruned", d.pruned},
               {"max_truncated_diameter", number(d.max_truncated_diameter)},
               {"retries", d.retries},
               {"depth_reached", d.depth_reached},
               {"cap_hit", d.cap_hit},
               {"pixel", number(d.pixel)},
               {"boundary_accuracy", number(d.boundary_accuracy)},
               {"raster_resolution", d.raster_resolution},
               {"period", d.period ? json(*d.period) : json(nullptr)},
               {"periodic_ratio", d.periodic_ratio ? number(*d.periodic_ratio) : json(nullptr)},
               {"return_depth", d.return_depth},
               {"return_cap_hit", d.return_cap_hit},
               {"branch_errors", d.branch_errors.size()}};
  return {{"kind", "niceset"},
          {"params", to_json(U.params)},
          {"region", to_json(U.region)},
          {"theta", number(U.theta)},
          {"theta_vacuous", U.theta_vacuous},
          {"area", area(U.region)},
          {"diameter", diameter(U.region)},
          {"diagnostics", diag}};
}

NiceSet niceset_from_artifact(const json& j) {
  if (j.value("kind", "") != "niceset") throw Error("missing artifact", "not a niceset artifact");
  NiceSet U;
  U.params = nice_params_from_json(j.at("params"));
  U.region = region_from_json(j.at("region"));
  U.theta = number_from(j.at("theta"));
  U.theta_vacuous = j.at("theta_vacuous");
  const json& d = j.at("diagnostics");
  U.diagnostics.pixel = number_from(d.at("pixel"));
  U.diagnostics.boundary_accuracy = number_from(d.at("boundary_accuracy"));
  U.diagnostics.raster_resolution = d.at("raster_resolution");
  U.diagnostics.depth_reached = d.at("depth_reached");
  U.diagnostics.n_cells = d.at("n_cells");
  return U;
}

json returnmap_artifact(const ReturnMap& rm) {
  json comps = json::array();
  for (const auto& c : rm.components)
    comps.push_back({{"domain", to_json(c.domain)},
                     {"return_time", c.return_time},
                     {"word", c.word.steps},
                     {"center", to_json(c.center)},
                     {"deriv_min", number(c.deriv_min)},
                     {"deriv_max", number(c.deriv_max)},
                     {"distortion_bound", number(c.distortion_bound)},
                     {"koebe_s", c.koebe_s},
                     {"mass", c.mass},
                     {"point_mass", c.point_mass}});
  return {{"kind", "returnmap"},
          {"base", to_json(rm.base)},
          {"center", to_json(rm.center)},
          {"R", rm.R},
          {"support", to_string(rm.support)},
          {"base_mass", rm.base_mass},
          {"t_max", rm.caps.t_max},
          {"max_components", rm.caps.max_components},
          {"captured_mass_fraction", rm.captured_mass_fraction},
          {"depth_reached", rm.depth_reached},
          {"cap_hit", rm.cap_hit},
          {"anomalies", rm.anomalies},
          {"components", comps}};
}

ReturnMap returnmap_from_artifact(const json& j) {
  if (j.value("kind", "") != "returnmap") throw Error("missing artifact", "not a returnmap artifact");
  ReturnMap rm;
  rm.base = region_from_json(j.at("base"));
  rm.center = complex_from_json(j.at("center"));
  rm.R = j.at("R");
  rm.support = support_from_string(j.at("support"));
  rm.base_mass = j.at("base_mass");
  rm.caps.t_max = j.at("t_max");
  rm.caps.max_components = j.at("max_components");
  rm.captured_mass_fraction = j.at("captured_mass_fraction");
  rm.depth_reached = j.at("depth_reached");
  rm.cap_hit = j.at("cap_hit");
  rm.anomalies = j.at("anomalies");
  for (const auto& e : j.at("components")) {
    ReturnComponent c;
    c.domain = region_from_json(e.at("domain"));
    c.return_time = e.at("return_time");
    c.word.steps = e.at("word").get<std::vector<long>>();
    c.center = complex_from_json(e.at("center"));
    c.deriv_min = number_from(e.at("deriv_min"));
    c.deriv_max = number_from(e.at("deriv_max"));
    c.distortion_bound = number_from(e.at("distortion_bound"));
    c.koebe_s = e.at("koebe_s");
    c.mass = e.at("mass");
    c.point_mass = e.at("point_mass");
    rm.components.push_back(std::move(c));
  }
  rm.locator = ComponentLocator(rm.components, rm.support, bounding_box(rm.base));
  return rm;
}

json density_artifact(const UlamModel& model, const InducedDensity& d, double h) {
  return {{"kind", "density"},
          {"h", h},
          {"one_dimensional", model.partition.one_dimensional},
          {"cell_mass", model.cell_mass},
          {"rho", d.rho},
          {"pi", d.pi},
          {"residual", d.residual},
          {"escaping_mass", d.escaping_mass}};
}

void density_from_artifact(const json& j, const ReturnMap& rm, UlamModel& model, InducedDensity& d) {
  if (j.value("kind", "") != "density") throw Error("missing artifact", "not a density artifact");
  double h = j.at("h");
  model = UlamModel{};
  model.support = rm.support;
  model.partition = make_grid_partition(rm.base, h, j.at("one_dimensional").get<bool>());
  model.cell_mass = j.at("cell_mass").get<std::vector<double>>();
  d = InducedDensity{};
  d.rho = j.at("rho").get<std::vector<double>>();
  d.pi = j.at("pi").get<std::vector<double>>();
  d.residual = j.at("residual");
  d.escaping_mass = j.at("escaping_mass");
  if (model.cell_mass.size() != model.partition.size() || d.rho.size() != model.partition.size())
    throw Error("missing artifact", "density artifact does not match the return map partition");
}

json to_json(const AnnulusSeries& s) {
  json an = json::array();
  for (const auto& a : s.annuli)
    an.push_back({{"k", a.k},
                  {"r_in", a.r_in},
                  {"r_out", a.r_out},
                  {"value", number(a.value)},
                  {"coarse", number(a.coarse)},
                  {"error", number(a.error)},
                  {"nodes", a.nodes},
                  {"flagged", a.flagged}});
  return {{"form", s.form}, {"r0", s.r0}, {"exponent", s.exponent}, {"annuli", an}};
}

json to_json(const Verdict& v) {
  return {{"verdict", to_string(v.verdict)}, {"q", number(v.q)}, {"note", v.note}};
}

json RunReport::to_json() const {
  json warn = json::array();
  for (const auto& w : warnings) warn.push_back({{"module", w.module}, {"message", w.message}});
  return {{"schema", kSchemaTag},
          {"command", command},
          {"config", config},
          {"results", results},
          {"warnings", warn},
          {"exit_code", exit_code},
          {"footer", kEvidenceFooter},
          {"timing", {{"seconds", seconds}}}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void write_text(const std::string& path, const std::string& text) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io", "cannot write " + path);
  out << text;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("missing file", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw Error("parse error", path + " at byte " + std::to_string(e.byte));
  }
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::string text;
  for (std::size_t i = 0; i < header.size(); ++i) text += (i ? "," : "") + header[i];
  text += "\n";
  char buf[32];
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", row[i]);
      text += (i ? "," : "");
      text += buf;
    }
    text += "\n";
  }
  write_text(path, text);
}

}  // namespace nicedyn

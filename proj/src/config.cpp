#include "nicedyn/config.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "nicedyn/error.hpp"

namespace nicedyn {

using nlohmann::json;

namespace {

using Errors = std::vector<std::string>;

bool to_complex(const json& v, cplx& out) {
  if (v.is_number()) {
    out = {v.get<double>(), 0.0};
    return true;
  }
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    out = {v[0].get<double>(), v[1].get<double>()};
    return true;
  }
  return false;
}

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

template <class T>
const char* type_name() {
  if constexpr (std::is_same_v<T, bool>) return "a boolean";
  else if constexpr (std::is_same_v<T, std::string>) return "a string";
  else if constexpr (std::is_integral_v<T>) return "an integer";
  else return "a number";
}

template <class T>
bool convert(const json& v, T& out) {
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) return false;
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) return false;
  } else if constexpr (std::is_integral_v<T>) {
    if (v.is_number_integer()) {
      if constexpr (std::is_unsigned_v<T>)
        if (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0) return false;
    } else if (v.is_number_float()) {
      double d = v.get<double>();  // accept 1e6 style integers
      if (d != std::floor(d) || std::abs(d) > 9e15) return false;
      if constexpr (std::is_unsigned_v<T>)
        if (d < 0) return false;
      out = static_cast<T>(d);
      return true;
    } else {
      return false;
    }
  } else {
    if (!v.is_number()) return false;
  }
  out = v.get<T>();
  return true;
}

// A configuration object: reads known keys, records effective values into the
// echo and collects every problem instead of stopping at the first one.
class Section {
 public:
  Section(const json* j, std::string path, Errors& errors, json& echo)
      : j_(j), path_(std::move(path)), errors_(errors), echo_(echo) {
    if (j_ && !j_->is_object()) {
      errors_.push_back(path_ + ": expected an object");
      j_ = nullptr;
    }
    echo_ = json::object();
  }

  bool has(const std::string& key) const { return j_ && j_->contains(key) && !(*j_)[key].is_null(); }

  template <class T>
  T get(const std::string& key, T def, std::function<std::string(const T&)> check = {}) {
    known_.insert(key);
    T value = def;
    if (has(key)) {
      T parsed{};
      if (!convert((*j_)[key], parsed)) {
        fail(key, std::string("expected ") + type_name<T>());
      } else {
        value = parsed;
      }
    }
    if (check) {
      std::string msg = check(value);
      if (!msg.empty()) fail(key, msg);
    }
    echo_[key] = value;
    return value;
  }

  template <class T>
  std::optional<T> get_optional(const std::string& key, std::function<std::string(const T&)> check = {}) {
    known_.insert(key);
    if (!has(key)) {
      echo_[key] = nullptr;
      return std::nullopt;
    }
    return get<T>(key, T{}, check);
  }

  cplx get_complex(const std::string& key, cplx def) {
    known_.insert(key);
    cplx value = def;
    if (has(key) && !to_complex((*j_)[key], value)) fail(key, "expected a number or [re, im]");
    echo_[key] = complex_json(value);
    return value;
  }

  std::optional<cplx> get_optional_complex(const std::string& key) {
    known_.insert(key);
    if (!has(key)) {
      echo_[key] = nullptr;
      return std::nullopt;
    }
    return get_complex(key, {});
  }

  std::vector<cplx> get_complex_list(const std::string& key, std::vector<cplx> def) {
    known_.insert(key);
    std::vector<cplx> value = def;
    if (has(key)) {
      const json& v = (*j_)[key];
      if (!v.is_array()) {
        fail(key, "expected a list of numbers or [re, im] pairs");
      } else {
        value.clear();
        for (const auto& e : v) {
          cplx z;
          if (!to_complex(e, z)) {
            fail(key, "expected a list of numbers or [re, im] pairs");
            break;
          }
          value.push_back(z);
        }
      }
    }
    json arr = json::array();
    for (cplx z : value) arr.push_back(complex_json(z));
    echo_[key] = arr;
    return value;
  }

  Section sub(const std::string& key) {
    known_.insert(key);
    return Section(has(key) ? &(*j_)[key] : nullptr, path_ + "." + key, errors_, echo_[key]);
  }

  void fail(const std::string& key, const std::string& msg) { errors_.push_back(path_ + "." + key + ": " + msg); }

  void finish() {
    if (!j_) return;
    for (auto it = j_->begin(); it != j_->end(); ++it)
      if (!known_.count(it.key())) errors_.push_back(path_ + "." + it.key() + ": unknown key");
  }

  const std::string& path() const { return path_; }

 private:
  const json* j_;
  std::string path_;
  Errors& errors_;
  json& echo_;
  std::set<std::string> known_;
};

std::function<std::string(const double&)> positive() {
  return [](const double& v) { return v > 0 ? "" : "must be positive"; };
}
std::function<std::string(const int&)> positive_int() {
  return [](const int& v) { return v > 0 ? "" : "must be positive"; };
}
std::function<std::string(const std::size_t&)> positive_size() {
  return [](const std::size_t& v) { return v > 0 ? "" : "must be positive"; };
}

MetricTag metric_from(Section& s, const std::string& key, MetricTag def) {
  std::string name = s.get<std::string>(key, def == MetricTag::spherical ? "spherical" : "euclidean",
                                        [](const std::string& v) {
                                          return (v == "spherical" || v == "euclidean")
                                                     ? ""
                                                     : "must be 'spherical' or 'euclidean'";
                                        });
  return name == "euclidean" ? MetricTag::euclidean : MetricTag::spherical;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("missing file", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw Error("parse error", path + " at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

void parse_map(Section s, MapSpec& m) {
  m.kind = s.get<std::string>("kind", "rational", [](const std::string& v) {
    return (v == "rational" || v == "tangent") ? "" : "must be 'rational' or 'tangent'";
  });
  if (m.kind == "tangent") {
    m.lambda = s.get_complex("lambda", {1.0, 0.0});
    if (m.lambda == cplx{}) s.fail("lambda", "must be non-zero");
    m.k_max = s.get<int>("k_max", 64, positive_int());
  } else {
    m.numerator = s.get_complex_list("numerator", {});
    m.denominator = s.get_complex_list("denominator", {cplx{1.0}});
    m.min_degree = s.get<int>("min_degree", 2, positive_int());
    if (m.numerator.empty()) s.fail("numerator", "required for rational maps");
    if (m.denominator.empty()) s.fail("denominator", "must be non-empty");
  }
  s.finish();
}

}  // namespace

DynamicalMap make_map(const MapSpec& spec) {
  if (spec.kind == "tangent") return DynamicalMap::tangent(spec.lambda, spec.k_max);
  return DynamicalMap::rational(spec.numerator, spec.denominator, spec.min_degree);
}

RunConfig parse_config(const std::string& text, const std::string& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error("parse error", "at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  Errors errors;
  RunConfig cfg;
  json echo;
  Section top(&root, "config", errors, echo);

  // map: inline object or {"file": path}
  if (!top.has("map")) {
    errors.push_back("config.map: required");
    top.sub("map");
  } else {
    json map_json = root["map"];
    if (map_json.is_object() && map_json.contains("file")) {
      if (map_json.size() != 1) errors.push_back("config.map: 'file' cannot be combined with other keys");
      if (!map_json["file"].is_string()) {
        errors.push_back("config.map.file: expected a string");
      } else {
        std::filesystem::path p = map_json["file"].get<std::string>();
        if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
        try {
          map_json = read_json_file(p.string());
        } catch (const Error& e) {
          errors.push_back(std::string("config.map.file: ") + e.what());
          map_json = json::object({{"kind", "rational"}, {"numerator", {0, 0, 1}}});
        }
      }
    }
    json map_echo;
    parse_map(Section(&map_json, "config.map", errors, map_echo), cfg.map);
    top.sub("map");  // marks the key as known
    echo["map"] = map_echo;
  }

  cfg.seed = top.get<std::uint64_t>("seed", 1);
  cfg.output = top.get<std::string>("output", "nicedyn_out");

  {
    Section s = top.sub("orbit");
    cfg.orbit.depth = s.get<int>("depth", 30, [](const int& v) { return v >= 0 ? "" : "must be non-negative"; });
    cfg.orbit.cap = s.get<std::size_t>("cap", 10000, positive_size());
    s.finish();
  }
  {
    Section s = top.sub("niceset");
    NiceSetParams& p = cfg.niceset.params;
    p.center = s.get_complex("center", {});
    p.R = s.get<double>("R", p.R, positive());
    p.r = s.get<double>("r", p.r, positive());
    p.kappa = s.get<double>("kappa", p.kappa, [](const double& v) { return v > 1 ? "" : "kappa must exceed 1"; });
    if (p.r >= p.R) s.fail("r", "must be below R");
    else if (p.kappa * p.r >= p.R) s.fail("kappa", "kappa * r must be below R");
    p.n_max = s.get<int>("n_max", p.n_max, positive_int());
    p.eps_min_factor = s.get<double>("eps_min_factor", p.eps_min_factor, positive());
    p.k_max = cfg.map.k_max;
    p.retry_limit = s.get<int>("retry_limit", p.retry_limit,
                               [](const int& v) { return v >= 0 ? "" : "must be non-negative"; });
    p.resolution = s.get<int>("resolution", p.resolution, [](const int& v) { return v >= 16 ? "" : "must be at least 16"; });
    p.raster_resolution = s.get<int>("raster_resolution", p.raster_resolution,
                                     [](const int& v) { return v >= 64 ? "" : "must be at least 64"; });
    p.boundary_vertices = s.get<int>("boundary_vertices", p.boundary_vertices,
                                     [](const int& v) { return v >= 16 ? "" : "must be at least 16"; });
    p.max_cells = s.get<std::size_t>("max_cells", p.max_cells, positive_size());
    p.max_return_cells = s.get<std::size_t>("max_return_cells", p.max_return_cells, positive_size());
    p.metric = metric_from(s, "metric", p.metric);
    cfg.niceset.orbit_depth = s.get<int>("orbit_depth", 30, positive_int());
    cfg.niceset.n_check = s.get<int>("n_check", 30, positive_int());
    cfg.niceset.samples = s.get<int>("samples", 2000, positive_int());
    cfg.niceset.inclusion_samples = s.get<int>("inclusion_samples", 720, positive_int());
    Section hook = s.sub("test_hook");
    cfg.niceset.corrupt_fraction = hook.get<double>("corrupt_boundary", 0.0, [](const double& v) {
      return (v >= 0 && v < 0.5) ? "" : "must lie in [0, 0.5)";
    });
    hook.finish();
    s.finish();
  }
  {
    Section s = top.sub("returnmap");
    cfg.returnmap.caps.t_max = s.get<int>("t_max", 40, positive_int());
    cfg.returnmap.caps.max_components = s.get<std::size_t>("max_components", 5000, positive_size());
    std::string sup = s.get<std::string>("support", "planar", [](const std::string& v) {
      return (v == "planar" || v == "real_line") ? "" : "must be 'planar' or 'real_line'";
    });
    cfg.returnmap.support = sup == "real_line" ? Support::real_line : Support::planar;
    cfg.returnmap.validation_points = s.get<std::size_t>("validation_points", 10000, positive_size());
    s.finish();
  }
  {
    Section s = top.sub("density");
    cfg.density.divisions = s.get<int>("divisions", 64, [](const int& v) { return v >= 2 ? "" : "must be at least 2"; });
    cfg.density.samples_per_cell = s.get<std::size_t>("samples_per_cell", 4096, positive_size());
    cfg.density.tol = s.get<double>("tol", 1e-11, positive());
    cfg.density.max_iterations = s.get<int>("max_iterations", 20000, positive_int());
    cfg.density.refinement_check = s.get<bool>("refinement_check", true);
    s.finish();
  }
  {
    Section s = top.sub("spread");
    cfg.spread.birkhoff = s.get<bool>("birkhoff", true);
    cfg.spread.birkhoff_length = s.get<std::size_t>("birkhoff_length", 1000000, positive_size());
    cfg.spread.burn_in = s.get<std::size_t>("burn_in", 1000);
    cfg.spread.batches = s.get<std::size_t>("batches", 20, [](const std::size_t& v) {
      return v >= 20 ? "" : "at least 20 batches are required";
    });
    if (cfg.spread.burn_in >= cfg.spread.birkhoff_length) s.fail("burn_in", "must be below birkhoff_length");
    s.finish();
  }
  {
    Section s = top.sub("tail");
    cfg.tail.pole = s.get_optional_complex("pole");
    cfg.tail.order = s.get<int>("order", 1, positive_int());
    cfg.tail.c0 = s.get_optional<double>("c0", positive());
    cfg.tail.floor_radius = s.get<double>("floor_radius", 0.05, positive());
    cfg.tail.r0 = s.get<double>("r0", 10.0, positive());
    cfg.tail.r1 = s.get<double>("r1", 100.0, positive());
    if (cfg.tail.r1 <= cfg.tail.r0) s.fail("r1", "must exceed r0");
    cfg.tail.t = s.get<double>("t", 2.0);
    cfg.tail.samples = s.get<std::size_t>("samples", 64, [](const std::size_t& v) {
      return v >= 2 ? "" : "must be at least 2";
    });
    cfg.tail.capture = s.get<double>("capture", 1.0, positive());
    s.finish();
  }
  {
    Section s = top.sub("criterion");
    CriterionConfig& c = cfg.criterion;
    c.form = s.get<std::string>("form", "ks", [](const std::string& v) {
      return (v == "ks" || v == "log_dist" || v == "escape") ? "" : "must be 'ks', 'log_dist' or 'escape'";
    });
    c.a = s.get_complex("a", {0.0, 1.0});
    c.M = s.get<int>("M", 1, positive_int());
    c.r0 = s.get<double>("r0", 10.0, positive());
    c.annuli = s.get<int>("annuli", 8, [](const int& v) { return v >= 1 ? "" : "must be positive"; });
    c.s = s.get_optional<double>("s");
    c.clamp = s.get<bool>("clamp", true);
    Section t = s.sub("target");
    c.target.cloud = t.get_complex_list("cloud", {});
    c.target.post_singular_depth = t.get<int>("post_singular_depth", 40,
                                              [](const int& v) { return v >= 0 ? "" : "must be non-negative"; });
    c.target.eps = t.get<double>("eps", 0.05, positive());
    t.finish();
    c.radial_nodes = s.get<int>("radial_nodes", 8, [](const int& v) { return v >= 2 ? "" : "must be at least 2"; });
    c.theta_nodes = s.get<std::size_t>("theta_nodes", 4096, [](const std::size_t& v) {
      return v >= 8 ? "" : "must be at least 8";
    });
    c.arc_spacing = s.get<double>("arc_spacing", 0.05, positive());
    c.synthetic_power = s.get_optional<double>("synthetic_power");
    c.samples = s.get<std::size_t>("samples", 2000, positive_size());
    c.d_min = s.get<double>("d_min", 1e-12, positive());
    if (c.d_min >= c.target.eps) s.fail("d_min", "must be below target.eps");
    c.n_cap = s.get<int>("n_cap", 500, positive_int());
    c.real_samples = s.get<bool>("real_samples", false);
    s.finish();
  }
  {
    Section s = top.sub("oracle");
    OracleConfig& o = cfg.oracle;
    o.integrand = s.get<std::string>("integrand", "power", [](const std::string& v) {
      if (v == "nevanlinna") return std::string();
      try {
        oracle_integrand_from_string(v);
        return std::string();
      } catch (const Error&) {
        return std::string("unknown integrand");
      }
    });
    o.domain.a = s.get<double>("a", 1.0);
    o.domain.b = s.get<double>("b", 2.0);
    o.domain.alpha = s.get<double>("alpha", 0.0);
    o.domain.r = s.get<double>("r", 1.0, positive());
    o.a = s.get_complex("value", {0.0, 1.0});
    o.nodes = s.get<std::size_t>("nodes", 1000000, [](const std::size_t& v) {
      return v >= 8 ? "" : "must be at least 8";
    });
    s.finish();
  }
  top.finish();

  if (!errors.empty()) {
    std::string msg;
    for (const auto& e : errors) msg += (msg.empty() ? "" : "; ") + e;
    throw Error("validation", msg);
  }
  cfg.echo = echo;
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("missing file", "cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  std::string dir = std::filesystem::path(path).parent_path().string();
  return parse_config(ss.str(), dir.empty() ? "." : dir);
}

}  // namespace nicedyn

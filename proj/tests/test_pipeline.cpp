#include <filesystem>

#include "doctest.h"
#include "fixtures.hpp"
#include "nicedyn/pipeline.hpp"

using namespace nicedyn;

namespace {

std::string scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("nicedyn_pipeline_" + name);
  std::filesystem::remove_all(p);
  return p.string();
}

RunConfig config(const std::string& body, const std::string& out) {
  RunConfig c = parse_config(body);
  c.output = out;
  c.echo["output"] = out;
  return c;
}

const char* kChebyshev = R"({"map": {"numerator": [0, 4, -4]}, "orbit": {"depth": 5},
  "niceset": {"center": 0.5, "R": 0.4, "r": 0.15, "kappa": 1.2}})";

nlohmann::json without_timing(nlohmann::json j) {
  j.erase("timing");
  return j;
}

}  // namespace

TEST_CASE("orbit command lists the post-singular points") {
  RunReport rep;
  CHECK(run("orbit", config(kChebyshev, scratch("orbit")), rep) == 0);
  auto pts = rep.results["points"];
  REQUIRE(pts.size() == 3);
  CHECK(pts[0] == nlohmann::json::array({1.0, 0.0}));
  CHECK(pts[1] == nlohmann::json::array({0.0, 0.0}));
  CHECK(pts[2] == "inf");
}

TEST_CASE("downstream commands name the missing stage") {
  RunReport rep;
  CHECK(run("returnmap", config(kChebyshev, scratch("missing")), rep) == 1);
  CHECK(rep.results["error"]["kind"] == "missing artifact");
  CHECK(rep.results["error"]["message"].get<std::string>().find("'niceset'") != std::string::npos);
  RunReport rep2;
  CHECK(run("spread", config(kChebyshev, scratch("missing2")), rep2) == 1);
  CHECK(rep2.results["error"]["message"].get<std::string>().find("'returnmap'") != std::string::npos);
}

TEST_CASE("corrupted nice set exits with a violation") {
  std::string body = R"({"map": {"numerator": [0, 4, -4]},
    "niceset": {"center": 0.5, "R": 0.4, "r": 0.15, "kappa": 1.2, "test_hook": {"corrupt_boundary": 0.01}}})";
  RunReport rep;
  CHECK(run("niceset", config(body, scratch("corrupt")), rep) == 2);
  CHECK(rep.results["niceness"]["violations"].get<int>() >= 1);
  CHECK_FALSE(rep.results["niceness"]["pass"].get<bool>());
}

TEST_CASE("tangent KS criterion reports a finite verdict") {
  std::string body = R"({"map": {"kind": "tangent", "lambda": 1}, "criterion": {"form": "ks", "a": [0, 1], "M": 1}})";
  RunReport rep;
  CHECK(run("criterion", config(body, scratch("ks")), rep) == 0);
  CHECK(rep.results["verdict"]["verdict"] == "finite");
}

TEST_CASE("identical runs give identical reports") {
  std::string out = scratch("determinism");
  RunConfig c = config(kChebyshev, out);
  RunReport a, b;
  run("niceset", c, a);
  run("niceset", c, b);
  CHECK(without_timing(a.to_json()).dump() == without_timing(b.to_json()).dump());
}

TEST_CASE("artifacts round trip") {
  const NiceSet& U = fixtures::chebyshev_set();
  NiceSet V = niceset_from_artifact(niceset_artifact(U));
  CHECK(V.region.boundary == U.region.boundary);
  CHECK(V.params.r == U.params.r);
  CHECK(V.diagnostics.boundary_accuracy == U.diagnostics.boundary_accuracy);
  const ReturnMap& rm = fixtures::chebyshev_return_map();
  ReturnMap back = returnmap_from_artifact(nlohmann::json::parse(dump(returnmap_artifact(rm))));
  REQUIRE(back.components.size() == rm.components.size());
  for (double x : {0.41, 0.47, 0.52, 0.6})
    CHECK(back.locate(cplx{x}) == rm.locate(cplx{x}));
}

#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "nicedyn/error.hpp"
#include "nicedyn/io.hpp"

using namespace nicedyn;

namespace {

std::string validation_message(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    CHECK(e.kind() == "validation");
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal tangent config gets defaults") {
  RunConfig c = parse_config(R"({"map": {"kind": "tangent"}})");
  CHECK(c.map.kind == "tangent");
  CHECK(c.map.k_max == 64);
  CHECK(c.map.lambda == cplx{1.0});
  CHECK(c.returnmap.caps.t_max == 40);
  CHECK(c.density.tol == 1e-11);
  CHECK(c.seed == 1);
  CHECK(c.echo["returnmap"]["t_max"] == 40);
  CHECK(c.echo["map"]["k_max"] == 64);
}

TEST_CASE("kappa must exceed one") {
  std::string msg = validation_message(R"({"map": {"kind": "tangent"}, "niceset": {"kappa": 0.9}})");
  CHECK(msg.find("kappa must exceed 1") != std::string::npos);
}

TEST_CASE("r must be below R") {
  std::string msg = validation_message(R"({"map": {"kind": "tangent"}, "niceset": {"r": 0.5, "R": 0.4}})");
  CHECK(msg.find("niceset.r") != std::string::npos);
}

TEST_CASE("every offending key is reported") {
  std::string msg = validation_message(
      R"({"map": {"kind": "tangent", "colour": 1}, "niceset": {"kappa": 0.5}, "density": {"divisions": 1}, "bogus": 2})");
  CHECK(msg.find("colour") != std::string::npos);
  CHECK(msg.find("kappa") != std::string::npos);
  CHECK(msg.find("divisions") != std::string::npos);
  CHECK(msg.find("bogus") != std::string::npos);
}

TEST_CASE("malformed JSON reports a position") {
  try {
    parse_config("{\"map\": {\"kind\": \"tangent\"},,}");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == "parse error");
    CHECK(std::string(e.what()).find("byte") != std::string::npos);
  }
}

TEST_CASE("complex values and map files") {
  auto dir = std::filesystem::temp_directory_path() / "nicedyn_config_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "cheb.json") << R"({"kind": "rational", "numerator": [0, 4, -4]})";
  RunConfig c = parse_config(R"({"map": {"file": "cheb.json"}, "criterion": {"a": [0, 2]}})", dir.string());
  CHECK(c.map.numerator.size() == 3);
  CHECK(c.map.numerator[2] == cplx{-4.0});
  CHECK(c.criterion.a == cplx{0.0, 2.0});
  CHECK(make_map(c.map).degree() == 2);
  CHECK(validation_message(R"({"map": {"file": "missing.json"}})").find("missing.json") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("reports carry the schema tag and module of every warning") {
  RunReport r;
  r.command = "orbit";
  r.warn("maps", "orbit cap reached");
  auto j = r.to_json();
  CHECK(j["schema"] == kSchemaTag);
  CHECK(j["warnings"][0]["module"] == "maps");
  CHECK(j["footer"] == kEvidenceFooter);
  CHECK(j.contains("timing"));
}

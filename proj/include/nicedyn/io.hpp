#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "nicedyn/config.hpp"

namespace nicedyn {

inline constexpr const char* kSchemaTag = "nicedyn.report/1";
inline constexpr const char* kEvidenceFooter =
    "Verdicts are numerical evidence from truncated computations, not proofs.";

nlohmann::json to_json(cplx z);
cplx complex_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SpherePoint& p);

nlohmann::json to_json(const Region& r);
Region region_from_json(const nlohmann::json& j);

nlohmann::json to_json(const NiceSetParams& p);
NiceSetParams nice_params_from_json(const nlohmann::json& j);

/// Nice-set artifact: parameters, region, θ and diagnostics (cells omitted).
nlohmann::json niceset_artifact(const NiceSet& U);
NiceSet niceset_from_artifact(const nlohmann::json& j);

nlohmann::json returnmap_artifact(const ReturnMap& rm);
ReturnMap returnmap_from_artifact(const nlohmann::json& j);

/// Density artifact: grid spacing, cell masses and density values.
nlohmann::json density_artifact(const UlamModel& model, const InducedDensity& d, double h);
/// Rebuilds the partition from the return map base and the stored values.
void density_from_artifact(const nlohmann::json& j, const ReturnMap& rm, UlamModel& model, InducedDensity& d);

nlohmann::json to_json(const AnnulusSeries& s);
nlohmann::json to_json(const Verdict& v);

struct RunReport {
  std::string command;
  nlohmann::json config;
  nlohmann::json results = nlohmann::json::object();
  std::vector<WarningEntry> warnings;
  double seconds = 0.0;
  int exit_code = 0;

  void warn(const std::string& module, const std::string& message) { warnings.push_back({module, message}); }
  nlohmann::json to_json() const;
};

/// Serialises with sorted keys and a fixed float format, so identical runs
/// give identical bytes apart from the timing field.
std::string dump(const nlohmann::json& j);

void write_text(const std::string& path, const std::string& text);
nlohmann::json read_json(const std::string& path);

/// CSV with a header row; values are written with 17 significant digits.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace nicedyn

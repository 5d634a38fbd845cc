#pragma once

#include <string>
#include <vector>

#include "nicedyn/io.hpp"

namespace nicedyn {

const std::vector<std::string>& pipeline_commands();

/// Runs one stage, writing artifacts and `report_<command>.json` into the
/// output directory. Returns 0 on pass, 2 on a failed verdict or violation and
/// 1 on error (the report then carries the error).
int run(const std::string& command, const RunConfig& cfg, RunReport& report);

/// Path of an artifact inside the output directory.
std::string artifact_path(const RunConfig& cfg, const std::string& name);

}  // namespace nicedyn

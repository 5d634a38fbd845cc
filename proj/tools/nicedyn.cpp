#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "nicedyn/error.hpp"
#include "nicedyn/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"nicedyn: nice sets, induced Markov maps and finiteness criteria"};
  app.require_subcommand(1, 1);
  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  for (const auto& name : nicedyn::pipeline_commands()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " stage");
    sub->add_option("--config", config_path, "JSON configuration file")->required();
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
    sub->add_option("--seed", seed, "random seed (overrides the config)");
    if (name == "oracle") sub->group("");
  }
  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();
  auto* sub = app.get_subcommands().front();

  nicedyn::RunConfig cfg;
  try {
    cfg = nicedyn::load_config(config_path);
  } catch (const nicedyn::Error& e) {
    std::cerr << "nicedyn: " << e.what() << "\n";
    return 1;
  }
  if (sub->count("--out")) {
    cfg.output = out_dir;
    cfg.echo["output"] = out_dir;
  }
  if (sub->count("--seed")) {
    cfg.seed = seed;
    cfg.echo["seed"] = seed;
  }
  nicedyn::RunReport report;
  int code = nicedyn::run(command, cfg, report);
  std::cout << nicedyn::artifact_path(cfg, "report_" + command + ".json") << " exit " << code << "\n";
  if (code == 1 && report.results.contains("error"))
    std::cerr << "nicedyn: " << report.results["error"]["kind"].get<std::string>() << ": "
              << report.results["error"]["message"].get<std::string>() << "\n";
  return code;
}

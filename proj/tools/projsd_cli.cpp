// projsd: run a projected steepest descent configuration.
//
//   projsd run config.json [--trace t.csv] [--summary s.json] [--seed N] [--quiet]

#include "projsd/config.hpp"
#include "projsd/error.hpp"
#include "projsd/runner.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Projected steepest descent for nonlinear inverse problems"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Execute a run configuration");
  std::string configPath;
  std::string tracePath;
  std::string summaryPath;
  std::uint64_t seed = 0;
  bool quiet = false;
  run->add_option("config", configPath, "Path to the JSON run configuration")->required();
  auto* traceOpt = run->add_option("--trace", tracePath, "Per-iteration CSV trace output");
  auto* summaryOpt = run->add_option("--summary", summaryPath, "JSON summary output");
  auto* seedOpt = run->add_option("--seed", seed, "Seed for diagnostic sampling");
  run->add_flag("--quiet", quiet, "Only report errors");

  CLI11_PARSE(app, argc, argv);

  projsd::RunConfig config;
  try {
    config = projsd::loadConfig(configPath);
  } catch (const projsd::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == projsd::ErrorCode::Io ? projsd::kExitIo : projsd::kExitInvalid;
  }

  projsd::ExecuteOptions options;
  if (*traceOpt) options.tracePath = tracePath;
  if (*summaryOpt) options.summaryPath = summaryPath;
  if (*seedOpt) options.seed = seed;
  options.quiet = quiet;
  options.log = &std::cerr;
  return projsd::execute(config, options);
}

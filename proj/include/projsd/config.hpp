#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace projsd {

// Plain-data mirror of the JSON run configuration. Defaults are filled in
// by parseConfig, so serializeConfig always writes every field explicitly.

struct SpaceSpec {
  std::size_t dim = 0;
  double r = 2.0;
  double p = 2.0;
  double cp = 1.0;
  double gq = 1.0;
  std::vector<double> weights;  // empty = unit weights
  bool operator==(const SpaceSpec&) const = default;
};

struct SetSpec {
  std::string kind = "whole";  // whole | box | ball | subspace
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> center;
  double radius = 0.0;
  std::vector<std::size_t> support;
  bool operator==(const SetSpec&) const = default;
};

struct ModelSpec {
  std::string kind;  // linear | diagonal | quadratic
  std::vector<std::vector<double>> matrix;
  std::string matrixFile;  // CSV of rows, relative to the config's directory
  std::vector<double> sigma;
  std::optional<std::size_t> outputDim;
  double eps = 0.0;
  std::vector<double> ballCenter;
  double ballRadius = 0.0;
  // Constants that override the model's own bounds.
  std::optional<double> lhat;
  std::optional<double> lip;
  std::optional<double> stability;
  bool operator==(const ModelSpec&) const = default;
};

struct SolverSpec {
  std::optional<double> eta;  // computed exactly for diagonal models when absent
  double etaHat = 0.0;
  std::size_t maxIterations = 1'000'000;
  std::uint64_t seed = 0;
  bool operator==(const SolverSpec&) const = default;
};

struct DiagnosticsSpec {
  std::vector<double> referenceSolution;
  bool checkTheorems = true;
  bool operator==(const DiagnosticsSpec&) const = default;
};

struct LevelSpec {
  SetSpec set;
  std::optional<double> eta;
  std::optional<double> stability;
  std::optional<double> lip;
  std::optional<double> lhat;
  std::vector<double> reference;
  bool operator==(const LevelSpec&) const = default;
};

struct MultilevelSpec {
  double epsilon = 1.0;
  std::vector<LevelSpec> levels;
  bool runDirect = false;
  bool operator==(const MultilevelSpec&) const = default;
};

struct ExampleSpec {
  double lambda = 0.0;
  std::optional<double> tau;  // default: half of the admissible bound
  std::size_t maxLevels = 64;
  bool allowSmallLambda = false;
  bool operator==(const ExampleSpec&) const = default;
};

struct OutputSpec {
  std::string tracePath;
  std::string summaryPath;
  std::string schedulePath;
  bool operator==(const OutputSpec&) const = default;
};

struct RunConfig {
  std::string mode;  // single | multilevel | validate | example-schedule
  SpaceSpec space;
  double s = 2.0;
  std::optional<ModelSpec> model;
  std::vector<double> ydelta;
  SetSpec set;
  std::vector<double> x0;  // empty = origin
  SolverSpec solver;
  DiagnosticsSpec diagnostics;
  std::optional<MultilevelSpec> multilevel;
  std::optional<ExampleSpec> example;
  OutputSpec output;
  /// Directory that relative file references resolve against (not serialized).
  std::string baseDir;
  bool operator==(const RunConfig&) const = default;
};

/// Parses and validates; throws SchemaError listing every problem found,
/// one "path: message" per line.
RunConfig parseConfig(const std::string& text, const std::string& baseDir = ".");
RunConfig loadConfig(const std::string& path);

/// Pretty-printed JSON; parseConfig(serializeConfig(c)) == c.
std::string serializeConfig(const RunConfig& config);

}  // namespace projsd

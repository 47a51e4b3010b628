#pragma once

#include "projsd/convex_set.hpp"
#include "projsd/forward_model.hpp"
#include "projsd/geometry.hpp"
#include "projsd/solver.hpp"

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace projsd {

/// One level of a multi-level schedule: Z_n, F_n and the constants of the
/// level's stability/Lipschitz model.
struct Level {
  std::size_t index = 0;
  ConvexSet set;
  /// May be empty for schedules that are only validated, never run.
  std::shared_ptr<const ForwardModel> model;
  double eta = 0.0;
  double stability = 0.0;  // C_n
  double lip = 0.0;        // L_n
  double lhat = 0.0;       // lhat_n
  /// Best approximating solution z_n, when known.
  std::optional<PrimalVector> reference;

  double ctilde(const SpaceGeometry& space) const;
  /// Level radius; nullopt when infinite (C~ = 0). Throws EtaTooLarge.
  std::optional<double> rho(const SpaceGeometry& space) const;
};

struct Schedule {
  std::vector<Level> levels;
  double epsilon = 1.0;
  double etaHat = 0.0;
};

struct TransitionCheck {
  std::size_t from = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = false;
};

/// (3+eps) eta_n  <  (Cp/p)^(1/p) (lhat_{n+1} C_{n+1})^(-1)
///                   ((1 + sqrt(1 - 8 C~_{n+1} eta_{n+1})) / (2 C~_{n+1}) - 2 eta_{n+1}) - eta_{n+1}.
/// The right side is +inf when C~_{n+1} = 0. Throws EtaTooLarge at level n+1.
TransitionCheck validateTransition(const SpaceGeometry& space, const Level& level,
                                   const Level& next, double epsilon);

/// Smallest N with (3+eps) eta_N <= etaHat; throws NoSuchLevel.
std::size_t selectFinalLevel(const std::vector<double>& etas, double epsilon, double etaHat);

struct ScheduleValidation {
  std::vector<TransitionCheck> transitions;
  std::optional<std::size_t> finalLevel;
  std::vector<std::string> problems;
  bool ok() const noexcept { return problems.empty(); }
};

/// Checks nesting of the sets, monotonicity of C_n and eta_n, that the last
/// level is the final level, and every neighbor transition. Collects all
/// problems instead of stopping at the first.
ScheduleValidation validateSchedule(const SpaceGeometry& space, const Schedule& schedule);

struct LevelRun {
  std::size_t n = 0;
  double threshold = 0.0;
  RunReport report;
  /// The incoming iterate left Z_n numerically and was projected.
  bool handoffProjected = false;
  std::optional<double> rho;
  std::optional<double> startBregman;
  std::optional<bool> startOk;
};

struct MultiLevelOptions {
  std::size_t maxIterationsPerLevel = 1'000'000;
  /// Also run the final level directly from x00 for comparison.
  bool runDirectFinal = false;
};

struct MultiLevelReport {
  std::vector<LevelRun> perLevel;
  PrimalVector finalIterate;
  double finalResidual = 0.0;
  StopReason stopReason = StopReason::MaxIterations;
  bool success = false;

  std::optional<RunReport> direct;
  /// Whether x00 lies inside the final level's radius.
  std::optional<bool> directCovered;
  std::optional<double> directStartBregman;
};

/// Runs the levels in order, handing each stopped iterate to the next level.
/// Throws TransitionInvalid when the schedule fails validation.
MultiLevelReport runMultiLevel(const SpaceGeometry& space, const DataSpace& data,
                               const DataVector& ydelta, const Schedule& schedule,
                               const PrimalVector& x00, const MultiLevelOptions& options = {});

/// (Cp/p)^(3/p) / (16 lambda (4e + 1)).
double exampleTauBound(const SpaceGeometry& space, double lambda);

/// Closed-form schedule eta_n = lambda e^-n / (n+2), C_n = 2 e^n,
/// lhat_n = (n+1) e^-n, L_n = tau e^-n, eps = 1, truncated at the final
/// level. Sets are the whole space and no models are attached.
Schedule exampleSchedule(double lambda, double tau, const SpaceGeometry& space, double etaHat,
                         std::size_t maxLevels, bool allowSmallLambda = false);

}  // namespace projsd

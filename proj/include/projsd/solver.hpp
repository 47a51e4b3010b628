#pragma once

#include "projsd/convex_set.hpp"
#include "projsd/error.hpp"
#include "projsd/forward_model.hpp"
#include "projsd/geometry.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace projsd {

struct SolverConfig {
  double eta = 0.0;
  double etaHat = 0.0;
  std::size_t maxIterations = 1'000'000;
  /// z-dagger, when known; enables the per-iteration theorem checks.
  std::optional<PrimalVector> diagnosticReference;

  /// Throws InvalidArgument unless etaHat > 3 eta >= 0 and maxIterations >= 1.
  void validate() const;
};

/// lhat, lip bound DF on the domain; stability is C in Delta_p <= C^p ||F - F||^p.
struct ModelConstants {
  double lhat = 0.0;
  double lip = 0.0;
  double stability = 0.0;
};

/// C~ = 1/2 (Cp/p)^(-2/p) L C^2.
double computeCtilde(const SpaceGeometry& space, double lip, double stability);

/// rho = (Cp/p) (2 C~ lhat)^(-p) (1 + sqrt(1 - 8 C~ eta) - 4 eta C~)^p.
/// Throws EtaTooLarge when 8 C~ eta >= 1 and LinearCaseUnbounded when C~ = 0.
double convergenceRadius(const SpaceGeometry& space, double lhat, double ctilde, double eta);

/// Same radius written per level:
/// (Cp/p) lhat^(-p) ((1 + sqrt(1 - 8 C~ eta)) / (2 C~) - 2 eta)^p.
double levelConvergenceRadius(const SpaceGeometry& space, double lhat, double ctilde, double eta);

/// eta = 0 closed form (Cp/p)^3 (lhat L C^2 / 2)^(-p).
double landweberRadius(const SpaceGeometry& space, double lhat, double lip, double stability);

/// Upper bound on r_k while inside the radius: (1 + sqrt(1 - 8 C~ eta)) / (2 C~) - eta.
double residualCeiling(double ctilde, double eta);

/// Scalars driving one step. `descent` is (1/p) tHat^(-1/(q-1)) u^p r^(p^2-p),
/// the guaranteed decrease of the Bregman distance to z-dagger.
struct StepQuantities {
  double tHat = 0.0;
  double u = 0.0;
  double v = 0.0;
  double w = 0.0;
  double mu = 0.0;
  double descent = 0.0;
  /// Largest relative defect of the two identities linking mu to v and the descent term.
  double selfCheckError = 0.0;
};

/// u from the factored form -C~ (r - a)(r - b) (direct formula when C~ = 0).
double computeU(double r, double ctilde, double eta);

/// Throws ZeroGradient (t = 0) or NonpositiveU (u <= 0).
StepQuantities stepQuantities(const SpaceGeometry& space, double r, double t, double ctilde,
                              double lip, double eta);

struct StepResult {
  PrimalVector xTilde;
  PrimalVector next;
};

/// x~ = J_q^*(J_p(x) - mu T), x_next = P_Z(x~).
StepResult sdStep(const SpaceGeometry& space, const ConvexSet& set, const PrimalVector& x,
                  const DualVector& gradient, double mu);

struct IterationState {
  std::size_t k = 0;
  PrimalVector x;
  DataVector residual;
  DualVector gradient;
  double r = 0.0;
  double t = 0.0;
  double ctildeUsed = 0.0;
  /// Step quantities; absent on the stopping iterate.
  std::optional<StepQuantities> step;
  /// Present when a reference solution was supplied.
  std::optional<double> bregmanToRef;
  std::optional<bool> radiusOk;
};

enum class StopReason { DiscrepancyMet, MaxIterations, StepDegenerate };
std::string toString(StopReason reason);

struct RunReport {
  std::size_t stoppedAtK = 0;
  double finalResidual = 0.0;
  PrimalVector finalIterate;
  std::vector<IterationState> perIteration;
  StopReason stopReason = StopReason::MaxIterations;
  std::optional<ErrorCode> error;
  std::string errorMessage;
  /// x0 was outside Z and got projected.
  bool projectedStart = false;

  double ctilde = 0.0;
  /// Convergence radius, when finite and defined.
  std::optional<double> rho;
  bool radiusUnbounded = false;

  // Theorem tallies (meaningful only with a reference solution).
  bool checked = false;
  std::size_t monotonicityViolations = 0;
  std::size_t strictBoundViolations = 0;
  std::size_t radiusViolations = 0;
  std::size_t ceilingViolations = 0;
  std::size_t selfCheckFailures = 0;
  double descentSum = 0.0;
  double initialBregman = 0.0;
  bool summabilityOk = true;
};

/// Projected steepest descent with discrepancy stopping. Solver errors end
/// the run with StepDegenerate and are recorded in the report.
RunReport runAlgorithm1(const SpaceGeometry& space, const ConvexSet& set,
                        const ForwardModel& model, const DataSpace& data, const NoisyData& noisy,
                        const PrimalVector& x0, const SolverConfig& config,
                        const ModelConstants& constants);

/// Delta_p(x0, zdag) < rho.
bool checkStartingPoint(const SpaceGeometry& space, const PrimalVector& x0,
                        const PrimalVector& zdag, double rho);

struct SpaceConstantCertificate {
  /// min sampled Delta_p(x, x') / (||x - x'||^p / p); must be >= Cp.
  double cpRatioMin = 0.0;
  /// max sampled Delta_q(x*, x*') / (||x* - x*'||^q / q); must be <= Gq.
  double gqRatioMax = 0.0;
  std::size_t cpViolations = 0;
  std::size_t gqViolations = 0;
  bool ok() const noexcept { return cpViolations == 0 && gqViolations == 0; }
};

/// Samples pairs (Gaussian entries at several scales) and tests both
/// norm/Bregman comparison inequalities for the configured Cp, Gq.
SpaceConstantCertificate certifySpaceConstants(const SpaceGeometry& space, std::size_t nSamples,
                                               std::uint64_t seed);

}  // namespace projsd

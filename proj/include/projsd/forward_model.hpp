#pragma once

#include "projsd/convex_set.hpp"
#include "projsd/geometry.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>

namespace projsd {

/// Bounds of the derivative over the model's declared domain:
/// ||DF(x)|| <= lhat and ||DF(x) - DF(x')|| <= lip ||x - x'||.
struct LipschitzConstants {
  double lhat = 0.0;
  double lip = 0.0;
};

/// The nonlinear operator F : X -> Y together with its derivative action and
/// the adjoint of the derivative.
class ForwardModel {
 public:
  virtual ~ForwardModel() = default;

  virtual std::string kind() const = 0;
  virtual std::size_t inputDim() const = 0;
  virtual std::size_t outputDim() const = 0;

  virtual DataVector evaluate(const PrimalVector& x) const = 0;
  virtual DataVector applyDerivative(const PrimalVector& x, const PrimalVector& h) const = 0;
  virtual DualVector applyAdjoint(const PrimalVector& x, const DataDualVector& ystar) const = 0;

  virtual LipschitzConstants lipschitz(const SpaceGeometry& space, const DataSpace& data) const = 0;

  /// Analytic constant C with Delta_p(x, x') <= C^p ||F(x) - F(x')||^p on
  /// `set`, when the model knows one. Defaults to "unknown".
  virtual std::optional<double> stabilityConstant(const SpaceGeometry& space,
                                                  const DataSpace& data,
                                                  const ConvexSet& set) const;
};

/// F(x) = A x.
class LinearModel final : public ForwardModel {
 public:
  explicit LinearModel(Eigen::MatrixXd matrix);

  std::string kind() const override { return "linear"; }
  std::size_t inputDim() const override { return static_cast<std::size_t>(a_.cols()); }
  std::size_t outputDim() const override { return static_cast<std::size_t>(a_.rows()); }
  const Eigen::MatrixXd& matrix() const noexcept { return a_; }

  DataVector evaluate(const PrimalVector& x) const override;
  DataVector applyDerivative(const PrimalVector& x, const PrimalVector& h) const override;
  DualVector applyAdjoint(const PrimalVector& x, const DataDualVector& ystar) const override;
  LipschitzConstants lipschitz(const SpaceGeometry& space, const DataSpace& data) const override;
  /// Hilbert configuration only: 2^(-1/2) / sigma_min(A restricted to Z's coordinates).
  std::optional<double> stabilityConstant(const SpaceGeometry& space, const DataSpace& data,
                                          const ConvexSet& set) const override;

 private:
  Eigen::MatrixXd a_;
};

/// F(x)_i = sigma_i x_i for i < dim(X); rows beyond dim(X) are identically
/// zero, so data there is never reachable and contributes to dist(y, F(Z)).
class DiagonalModel final : public ForwardModel {
 public:
  DiagonalModel(Eigen::VectorXd sigma, std::size_t outputDim);
  explicit DiagonalModel(Eigen::VectorXd sigma)
      : DiagonalModel(sigma, static_cast<std::size_t>(sigma.size())) {}

  std::string kind() const override { return "diagonal"; }
  std::size_t inputDim() const override { return static_cast<std::size_t>(sigma_.size()); }
  std::size_t outputDim() const override { return outputDim_; }
  const Eigen::VectorXd& sigma() const noexcept { return sigma_; }

  DataVector evaluate(const PrimalVector& x) const override;
  DataVector applyDerivative(const PrimalVector& x, const PrimalVector& h) const override;
  DualVector applyAdjoint(const PrimalVector& x, const DataDualVector& ystar) const override;
  LipschitzConstants lipschitz(const SpaceGeometry& space, const DataSpace& data) const override;
  std::optional<double> stabilityConstant(const SpaceGeometry& space, const DataSpace& data,
                                          const ConvexSet& set) const override;

  /// Closest point of F(Z) to y for a coordinate subspace (or the whole
  /// space): z_i = y_i / sigma_i on the support, zero elsewhere. Hilbert
  /// data space only.
  PrimalVector bestApproximation(const DataVector& y, const ConvexSet& set) const;
  /// dist(y, F(Z)) for the same family of sets.
  double approximationError(const DataSpace& data, const DataVector& y,
                            const ConvexSet& set) const;

 private:
  Eigen::VectorXd sigma_;
  std::size_t outputDim_;
};

/// F_i(x) = (A x)_i + eps x_i^2 with square A. The Lipschitz and stability
/// bounds hold on the domain ball ||x - center|| <= radius.
class QuadraticModel final : public ForwardModel {
 public:
  QuadraticModel(Eigen::MatrixXd matrix, double eps, PrimalVector ballCenter, double ballRadius);

  std::string kind() const override { return "quadratic"; }
  std::size_t inputDim() const override { return static_cast<std::size_t>(a_.cols()); }
  std::size_t outputDim() const override { return static_cast<std::size_t>(a_.rows()); }
  const Eigen::MatrixXd& matrix() const noexcept { return a_; }
  double eps() const noexcept { return eps_; }
  const PrimalVector& ballCenter() const noexcept { return center_; }
  double ballRadius() const noexcept { return radius_; }

  DataVector evaluate(const PrimalVector& x) const override;
  DataVector applyDerivative(const PrimalVector& x, const PrimalVector& h) const override;
  DualVector applyAdjoint(const PrimalVector& x, const DataDualVector& ystar) const override;
  /// lhat = ||A|| + 2 eps sup_ball |x|_inf, lip = 2 eps (both with norm
  /// conversion factors outside the Hilbert configuration).
  LipschitzConstants lipschitz(const SpaceGeometry& space, const DataSpace& data) const override;
  /// Hilbert only: 2^(-1/2) / (sigma_min(A_Z) - 2 eps sup_ball |x|_inf), if positive.
  std::optional<double> stabilityConstant(const SpaceGeometry& space, const DataSpace& data,
                                          const ConvexSet& set) const override;

 private:
  double supNormOnBall(const SpaceGeometry& space) const;

  Eigen::MatrixXd a_;
  double eps_;
  PrimalVector center_;
  double radius_;
};

/// y^delta together with a bound eta >= dist(y^delta, F(Z)).
struct NoisyData {
  DataVector ydelta;
  double eta = 0.0;
  /// True when eta was computed exactly rather than asserted by the user.
  bool etaCertified = false;
};

/// Bound on ||A||_{X -> Y}; exact (largest singular value) in the Hilbert case.
double operatorNormBound(const Eigen::MatrixXd& a, const SpaceGeometry& space,
                         const DataSpace& data);

/// R = (p rho / Cp)^(1/p): radius of a norm ball containing the Bregman ball
/// {x : Delta_p(x, z) <= rho}.
double normRadiusOfBregmanBall(const SpaceGeometry& space, double rho);

/// Central-difference check of applyDerivative, relative to max(1, ||DF(x)h||).
double fdDerivativeCheck(const ForwardModel& model, const DataSpace& data, const PrimalVector& x,
                         const PrimalVector& h, double step);

/// |<DF(x)h, y*> - <h, DF(x)^* y*>|.
double adjointCheck(const ForwardModel& model, const PrimalVector& x, const PrimalVector& h,
                    const DataDualVector& ystar);

/// Ball used to sample unbounded sets.
struct SamplingBall {
  PrimalVector center;
  double radius = 1.0;
};

struct StabilityEstimate {
  double estimate = 0.0;
  std::size_t pairsUsed = 0;
  std::size_t pairsSkipped = 0;
  /// Center of the sampling ball that was used (the set's own center or
  /// lower bound for bounded sets without a supplied ball).
  PrimalVector center;
};

/// Draws a point of `set`, uniform-ish over the set (bounded) or over
/// set intersected with `ball`.
PrimalVector sampleInSet(const SpaceGeometry& space, const ConvexSet& set,
                         const std::optional<SamplingBall>& ball, std::mt19937_64& rng);

/// max over sampled pairs of Delta_p(x, x')^(1/p) / ||F(x) - F(x')||; a lower
/// bound for any valid stability constant. Deterministic for a fixed seed.
StabilityEstimate estimateStabilityConstant(const ForwardModel& model, const ConvexSet& set,
                                            const SpaceGeometry& space, const DataSpace& data,
                                            std::size_t nSamples, std::uint64_t seed,
                                            const std::optional<SamplingBall>& ball = {});

/// Sampled lower bounds for lhat and lip over `ball` (random points and unit
/// directions). Used to falsify claimed constants.
LipschitzConstants sampleLipschitzConstants(const ForwardModel& model, const SpaceGeometry& space,
                                            const DataSpace& data, const SamplingBall& ball,
                                            std::size_t nSamples, std::uint64_t seed);

}  // namespace projsd

#include "projsd/forward_model.hpp"

#include "projsd/error.hpp"

#include <algorithm>
#include <cmath>
#include <variant>
#include <vector>

namespace projsd {

namespace {

void requireDims(const ForwardModel& m, const PrimalVector& x, const char* what) {
  if (x.size() != m.inputDim()) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + ": input dimension mismatch");
  }
}

void requireHilbertPair(const SpaceGeometry& space, const DataSpace& data, bool& ok) {
  ok = space.isHilbert() && data.s() == 2.0;
}

/// Column indices of A that Z can excite.
std::vector<Eigen::Index> activeColumns(const ConvexSet& set, std::size_t dim) {
  std::vector<Eigen::Index> cols;
  if (const auto* sub = std::get_if<CoordinateSubspace>(&set.variant())) {
    for (std::size_t i : sub->support) cols.push_back(static_cast<Eigen::Index>(i));
  } else {
    for (std::size_t i = 0; i < dim; ++i) cols.push_back(static_cast<Eigen::Index>(i));
  }
  return cols;
}

double smallestSingularValue(const Eigen::MatrixXd& a, const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXd sub(a.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) sub.col(static_cast<Eigen::Index>(j)) = a.col(cols[j]);
  if (sub.rows() < sub.cols()) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sub);
  return svd.singularValues().minCoeff();
}

PrimalVector randomDirection(const SpaceGeometry& space, std::mt19937_64& rng,
                             const std::vector<Eigen::Index>& coords) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.dim()));
  double n = 0.0;
  while (n == 0.0) {
    for (Eigen::Index i : coords) v[i] = gauss(rng);
    n = norm(space, PrimalVector(v));
  }
  return PrimalVector(v / n);
}

PrimalVector sampleBall(const SpaceGeometry& space, const PrimalVector& center, double radius,
                        std::mt19937_64& rng, const std::vector<Eigen::Index>& coords) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double rho = radius * std::pow(unif(rng), 1.0 / static_cast<double>(coords.size()));
  return center + rho * randomDirection(space, rng, coords);
}

}  // namespace

std::optional<double> ForwardModel::stabilityConstant(const SpaceGeometry&, const DataSpace&,
                                                      const ConvexSet&) const {
  return std::nullopt;
}

// ---------------------------------------------------------------------------

LinearModel::LinearModel(Eigen::MatrixXd matrix) : a_(std::move(matrix)) {
  if (a_.size() == 0 || !a_.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "linear model needs a nonempty finite matrix");
  }
}

DataVector LinearModel::evaluate(const PrimalVector& x) const {
  requireDims(*this, x, "LinearModel::evaluate");
  return DataVector(a_ * x.coords());
}

DataVector LinearModel::applyDerivative(const PrimalVector& x, const PrimalVector& h) const {
  requireDims(*this, x, "LinearModel::applyDerivative");
  requireDims(*this, h, "LinearModel::applyDerivative");
  return DataVector(a_ * h.coords());
}

DualVector LinearModel::applyAdjoint(const PrimalVector& x, const DataDualVector& ystar) const {
  requireDims(*this, x, "LinearModel::applyAdjoint");
  if (ystar.size() != outputDim()) throw Error(ErrorCode::DimensionMismatch, "applyAdjoint");
  return DualVector(a_.transpose() * ystar.coords());
}

LipschitzConstants LinearModel::lipschitz(const SpaceGeometry& space, const DataSpace& data) const {
  return {operatorNormBound(a_, space, data), 0.0};
}

std::optional<double> LinearModel::stabilityConstant(const SpaceGeometry& space,
                                                     const DataSpace& data,
                                                     const ConvexSet& set) const {
  bool hilbert = false;
  requireHilbertPair(space, data, hilbert);
  if (!hilbert) return std::nullopt;
  set.checkCompatible(space);
  const double smin = smallestSingularValue(a_, activeColumns(set, inputDim()));
  if (!(smin > 0.0)) return std::nullopt;
  return 1.0 / (std::sqrt(2.0) * smin);
}

// ---------------------------------------------------------------------------

DiagonalModel::DiagonalModel(Eigen::VectorXd sigma, std::size_t outputDim)
    : sigma_(std::move(sigma)), outputDim_(outputDim) {
  if (sigma_.size() == 0 || !sigma_.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "diagonal model needs finite singular values");
  }
  if (outputDim_ < static_cast<std::size_t>(sigma_.size())) {
    throw Error(ErrorCode::InvalidArgument, "diagonal model output dimension below input dimension");
  }
}

DataVector DiagonalModel::evaluate(const PrimalVector& x) const {
  requireDims(*this, x, "DiagonalModel::evaluate");
  Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(outputDim_));
  y.head(sigma_.size()) = sigma_.cwiseProduct(x.coords());
  return DataVector(y);
}

DataVector DiagonalModel::applyDerivative(const PrimalVector& x, const PrimalVector& h) const {
  requireDims(*this, h, "DiagonalModel::applyDerivative");
  return evaluate(h);
  (void)x;
}

DualVector DiagonalModel::applyAdjoint(const PrimalVector& x, const DataDualVector& ystar) const {
  requireDims(*this, x, "DiagonalModel::applyAdjoint");
  if (ystar.size() != outputDim_) throw Error(ErrorCode::DimensionMismatch, "applyAdjoint");
  return DualVector(sigma_.cwiseProduct(ystar.coords().head(sigma_.size())));
}

LipschitzConstants DiagonalModel::lipschitz(const SpaceGeometry& space, const DataSpace& data) const {
  const double smax = sigma_.cwiseAbs().maxCoeff();
  if (space.isHilbert() && data.s() == 2.0) return {smax, 0.0};
  return {smax * detail::primalToLs(space, data.s()), 0.0};
}

std::optional<double> DiagonalModel::stabilityConstant(const SpaceGeometry& space,
                                                       const DataSpace& data,
                                                       const ConvexSet& set) const {
  bool hilbert = false;
  requireHilbertPair(space, data, hilbert);
  if (!hilbert) return std::nullopt;
  set.checkCompatible(space);
  double smin = std::numeric_limits<double>::infinity();
  for (Eigen::Index i : activeColumns(set, inputDim())) smin = std::min(smin, std::abs(sigma_[i]));
  if (!(smin > 0.0)) return std::nullopt;
  return 1.0 / (std::sqrt(2.0) * smin);
}

PrimalVector DiagonalModel::bestApproximation(const DataVector& y, const ConvexSet& set) const {
  if (y.size() != outputDim_) throw Error(ErrorCode::DimensionMismatch, "bestApproximation");
  if (std::holds_alternative<Box>(set.variant()) || std::holds_alternative<Ball>(set.variant())) {
    throw Error(ErrorCode::InvalidArgument,
                "best approximation is closed-form only for subspaces and the whole space");
  }
  Eigen::VectorXd z = Eigen::VectorXd::Zero(sigma_.size());
  for (Eigen::Index i : activeColumns(set, inputDim())) {
    if (sigma_[i] != 0.0) z[i] = y[static_cast<std::size_t>(i)] / sigma_[i];
  }
  return PrimalVector(z);
}

double DiagonalModel::approximationError(const DataSpace& data, const DataVector& y,
                                         const ConvexSet& set) const {
  if (data.s() != 2.0) {
    throw Error(ErrorCode::InvalidArgument, "exact approximation error needs a Hilbert data space");
  }
  const PrimalVector z = bestApproximation(y, set);
  return dataNorm(data, evaluate(z) - y);
}

// ---------------------------------------------------------------------------

QuadraticModel::QuadraticModel(Eigen::MatrixXd matrix, double eps, PrimalVector ballCenter,
                               double ballRadius)
    : a_(std::move(matrix)), eps_(eps), center_(std::move(ballCenter)), radius_(ballRadius) {
  if (a_.size() == 0 || a_.rows() != a_.cols() || !a_.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "quadratic model needs a square finite matrix");
  }
  if (!(eps_ >= 0.0) || !std::isfinite(eps_)) {
    throw Error(ErrorCode::InvalidArgument, "nonlinearity weight must be nonnegative");
  }
  if (center_.size() != inputDim()) {
    throw Error(ErrorCode::DimensionMismatch, "domain ball center dimension");
  }
  if (!(radius_ > 0.0) || !std::isfinite(radius_)) {
    throw Error(ErrorCode::InvalidArgument, "domain ball radius must be positive");
  }
}

DataVector QuadraticModel::evaluate(const PrimalVector& x) const {
  requireDims(*this, x, "QuadraticModel::evaluate");
  return DataVector(a_ * x.coords() + eps_ * x.coords().cwiseAbs2());
}

DataVector QuadraticModel::applyDerivative(const PrimalVector& x, const PrimalVector& h) const {
  requireDims(*this, x, "QuadraticModel::applyDerivative");
  requireDims(*this, h, "QuadraticModel::applyDerivative");
  return DataVector(a_ * h.coords() + 2.0 * eps_ * x.coords().cwiseProduct(h.coords()));
}

DualVector QuadraticModel::applyAdjoint(const PrimalVector& x, const DataDualVector& ystar) const {
  requireDims(*this, x, "QuadraticModel::applyAdjoint");
  if (ystar.size() != outputDim()) throw Error(ErrorCode::DimensionMismatch, "applyAdjoint");
  return DualVector(a_.transpose() * ystar.coords() +
                    2.0 * eps_ * x.coords().cwiseProduct(ystar.coords()));
}

double QuadraticModel::supNormOnBall(const SpaceGeometry& space) const {
  return center_.coords().cwiseAbs().maxCoeff() + detail::primalToSup(space) * radius_;
}

LipschitzConstants QuadraticModel::lipschitz(const SpaceGeometry& space,
                                             const DataSpace& data) const {
  if (space.dim() != inputDim() || data.dim() != outputDim()) {
    throw Error(ErrorCode::DimensionMismatch, "QuadraticModel::lipschitz");
  }
  // ||diag(d) h||_s <= |d|_inf ||h||_s <= |d|_inf * kappa ||h||_X
  const double kappa = detail::primalToLs(space, data.s());
  LipschitzConstants c;
  c.lhat = operatorNormBound(a_, space, data) + 2.0 * eps_ * supNormOnBall(space) * kappa;
  c.lip = 2.0 * eps_ * detail::primalToSup(space) * kappa;
  return c;
}

std::optional<double> QuadraticModel::stabilityConstant(const SpaceGeometry& space,
                                                        const DataSpace& data,
                                                        const ConvexSet& set) const {
  bool hilbert = false;
  requireHilbertPair(space, data, hilbert);
  if (!hilbert) return std::nullopt;
  set.checkCompatible(space);
  // F(x) - F(x') = (A + eps diag(x + x')) (x - x') and |x + x'|_inf <= 2 sup_ball |.|_inf
  const double margin = smallestSingularValue(a_, activeColumns(set, inputDim())) -
                        2.0 * eps_ * supNormOnBall(space);
  if (!(margin > 0.0)) return std::nullopt;
  return 1.0 / (std::sqrt(2.0) * margin);
}

// ---------------------------------------------------------------------------

double operatorNormBound(const Eigen::MatrixXd& a, const SpaceGeometry& space,
                         const DataSpace& data) {
  if (static_cast<std::size_t>(a.cols()) != space.dim() ||
      static_cast<std::size_t>(a.rows()) != data.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "operatorNormBound");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const double smax = svd.singularValues()[0];
  if (space.r() == 2.0 && space.unitWeights() && data.s() == 2.0) return smax;
  return detail::normEquivalence(data.dim(), 2.0, data.s()) * smax *
         detail::primalToLs(space, 2.0);
}

double normRadiusOfBregmanBall(const SpaceGeometry& space, double rho) {
  return std::pow(space.p() * rho / space.cp(), 1.0 / space.p());
}

double fdDerivativeCheck(const ForwardModel& model, const DataSpace& data, const PrimalVector& x,
                         const PrimalVector& h, double step) {
  if (!(step > 0.0)) throw Error(ErrorCode::InvalidArgument, "finite-difference step must be positive");
  const DataVector plus = model.evaluate(x + step * h);
  const DataVector minus = model.evaluate(x - step * h);
  const DataVector fd((plus.coords() - minus.coords()) / (2.0 * step));
  const DataVector exact = model.applyDerivative(x, h);
  return dataNorm(data, fd - exact) / std::max(1.0, dataNorm(data, exact));
}

double adjointCheck(const ForwardModel& model, const PrimalVector& x, const PrimalVector& h,
                    const DataDualVector& ystar) {
  const double lhs = pairing(ystar, model.applyDerivative(x, h));
  const double rhs = pairing(model.applyAdjoint(x, ystar), h);
  return std::abs(lhs - rhs);
}

PrimalVector sampleInSet(const SpaceGeometry& space, const ConvexSet& set,
                         const std::optional<SamplingBall>& ball, std::mt19937_64& rng) {
  set.checkCompatible(space);
  const auto dim = space.dim();
  std::vector<Eigen::Index> all(dim);
  for (std::size_t i = 0; i < dim; ++i) all[i] = static_cast<Eigen::Index>(i);
  const auto needBall = [&]() -> const SamplingBall& {
    if (!ball) {
      throw Error(ErrorCode::InvalidArgument, "unbounded set '" + set.kind() +
                                                  "' needs a sampling ball");
    }
    return *ball;
  };

  if (std::holds_alternative<WholeSpace>(set.variant())) {
    const auto& b = needBall();
    return sampleBall(space, b.center, b.radius, rng, all);
  }
  if (const auto* box = std::get_if<Box>(&set.variant())) {
    if (box->lower.allFinite() && box->upper.allFinite()) {
      Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        std::uniform_real_distribution<double> unif(box->lower[i], box->upper[i]);
        v[i] = box->lower[i] == box->upper[i] ? box->lower[i] : unif(rng);
      }
      return PrimalVector(v);
    }
    const auto& b = needBall();
    const PrimalVector v = sampleBall(space, b.center, b.radius, rng, all);
    return PrimalVector(v.coords().cwiseMax(box->lower).cwiseMin(box->upper));
  }
  if (const auto* bl = std::get_if<Ball>(&set.variant())) {
    return sampleBall(space, bl->center, bl->radius, rng, all);
  }
  const auto& sub = std::get<CoordinateSubspace>(set.variant());
  const auto& b = needBall();
  std::vector<Eigen::Index> coords;
  Eigen::VectorXd center = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  for (std::size_t i : sub.support) {
    coords.push_back(static_cast<Eigen::Index>(i));
    center[static_cast<Eigen::Index>(i)] = b.center[i];
  }
  return sampleBall(space, PrimalVector(center), b.radius, rng, coords);
}

StabilityEstimate estimateStabilityConstant(const ForwardModel& model, const ConvexSet& set,
                                            const SpaceGeometry& space, const DataSpace& data,
                                            std::size_t nSamples, std::uint64_t seed,
                                            const std::optional<SamplingBall>& ball) {
  std::mt19937_64 rng(seed);
  StabilityEstimate result;
  if (ball) {
    result.center = ball->center;
  } else if (const auto* bl = std::get_if<Ball>(&set.variant())) {
    result.center = bl->center;
  } else if (const auto* box = std::get_if<Box>(&set.variant())) {
    result.center = PrimalVector(box->lower);
  } else {
    result.center = PrimalVector::zeros(space.dim());
  }
  for (std::size_t n = 0; n < nSamples; ++n) {
    const PrimalVector x = sampleInSet(space, set, ball, rng);
    const PrimalVector xt = sampleInSet(space, set, ball, rng);
    const double gap = dataNorm(data, model.evaluate(x) - model.evaluate(xt));
    if (gap < 1e-14) {
      ++result.pairsSkipped;
      continue;
    }
    const double ratio = std::pow(bregmanDistance(space, x, xt), 1.0 / space.p()) / gap;
    result.estimate = std::max(result.estimate, ratio);
    ++result.pairsUsed;
  }
  if (result.pairsUsed == 0) {
    throw Error(ErrorCode::DegenerateSet, "every sampled pair had indistinguishable images");
  }
  return result;
}

LipschitzConstants sampleLipschitzConstants(const ForwardModel& model, const SpaceGeometry& space,
                                            const DataSpace& data, const SamplingBall& ball,
                                            std::size_t nSamples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Eigen::Index> all(space.dim());
  for (std::size_t i = 0; i < space.dim(); ++i) all[i] = static_cast<Eigen::Index>(i);
  LipschitzConstants lower;
  for (std::size_t n = 0; n < nSamples; ++n) {
    const PrimalVector x = sampleBall(space, ball.center, ball.radius, rng, all);
    const PrimalVector xt = sampleBall(space, ball.center, ball.radius, rng, all);
    const PrimalVector h = randomDirection(space, rng, all);
    const DataVector dx = model.applyDerivative(x, h);
    lower.lhat = std::max(lower.lhat, dataNorm(data, dx));
    const double step = norm(space, x - xt);
    if (step > 0.0) {
      lower.lip = std::max(lower.lip, dataNorm(data, dx - model.applyDerivative(xt, h)) / step);
    }
  }
  return lower;
}

}  // namespace projsd

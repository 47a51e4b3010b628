#include "projsd/geometry.hpp"

#include "projsd/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace projsd {

std::string_view toString(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::DegenerateSet: return "DegenerateSet";
    case ErrorCode::EtaTooLarge: return "EtaTooLarge";
    case ErrorCode::LinearCaseUnbounded: return "LinearCaseUnbounded";
    case ErrorCode::NonpositiveU: return "NonpositiveU";
    case ErrorCode::ZeroGradient: return "ZeroGradient";
    case ErrorCode::TransitionInvalid: return "TransitionInvalid";
    case ErrorCode::NoSuchLevel: return "NoSuchLevel";
    case ErrorCode::TauOutOfRange: return "TauOutOfRange";
    case ErrorCode::LambdaTooSmall: return "LambdaTooSmall";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

namespace {

void requireSize(std::size_t expected, std::size_t actual, const char* what) {
  if (expected != actual) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + ": expected dimension " +
                                                  std::to_string(expected) + ", got " +
                                                  std::to_string(actual));
  }
}

}  // namespace

namespace detail {

double weightedNorm(const Eigen::VectorXd& v, double r, const Eigen::VectorXd& w) {
  const bool unit = w.size() == 0;
  if (r == 2.0) {
    return unit ? v.norm() : std::sqrt((w.array() * v.array().square()).sum());
  }
  // Scale by the largest entry so |v_i|^r cannot overflow or flush to zero.
  const double scale = v.cwiseAbs().maxCoeff();
  if (scale == 0.0 || !std::isfinite(scale)) {
    return v.size() == 0 ? 0.0 : scale;
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double term = std::pow(std::abs(v[i]) / scale, r);
    sum += unit ? term : w[i] * term;
  }
  return scale * std::pow(sum, 1.0 / r);
}

Eigen::VectorXd weightedDualityMap(const Eigen::VectorXd& v, double r, const Eigen::VectorXd& w,
                                   double gauge) {
  const bool unit = w.size() == 0;
  const double n = weightedNorm(v, r, w);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
  if (n == 0.0) {
    return out;
  }
  if (r == 2.0 && gauge == 2.0) {
    return unit ? v : Eigen::VectorXd(w.array() * v.array());
  }
  const double factor = std::pow(n, gauge - r);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] == 0.0) continue;
    const double mag = r == 2.0 ? std::abs(v[i]) : std::pow(std::abs(v[i]), r - 1.0);
    out[i] = std::copysign(factor * (unit ? 1.0 : w[i]) * mag, v[i]);
  }
  return out;
}

double normEquivalence(std::size_t n, double from, double to) {
  const double e = 1.0 / to - 1.0 / from;
  return e > 0.0 ? std::pow(static_cast<double>(n), e) : 1.0;
}

double primalToLs(const SpaceGeometry& space, double s) {
  return normEquivalence(space.dim(), space.r(), s) * primalToSup(space);
}

double primalToSup(const SpaceGeometry& space) {
  if (space.unitWeights()) return 1.0;
  return std::pow(space.weights().minCoeff(), -1.0 / space.r());
}

}  // namespace detail

SpaceGeometry SpaceGeometry::make(std::size_t dim, double r, double p, double cp, double gq,
                                  Eigen::VectorXd weights) {
  if (dim == 0) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
  if (!(r > 1.0) || !std::isfinite(r)) {
    throw Error(ErrorCode::InvalidArgument, "norm exponent r must lie in (1, inf)");
  }
  if (!(p >= defaultGauge(r)) || !std::isfinite(p)) {
    throw Error(ErrorCode::InvalidArgument, "gauge exponent p must satisfy p >= max(r, 2)");
  }
  if (!(cp > 0.0) || !(gq > 0.0) || !std::isfinite(cp) || !std::isfinite(gq)) {
    throw Error(ErrorCode::InvalidArgument, "Cp and Gq must be positive and finite");
  }
  SpaceGeometry g;
  g.dim_ = dim;
  g.r_ = r;
  g.p_ = p;
  g.cp_ = cp;
  g.gq_ = gq;
  if (weights.size() == 0) {
    g.unitWeights_ = true;
  } else {
    requireSize(dim, static_cast<std::size_t>(weights.size()), "weights");
    if (!((weights.array() > 0.0).all()) || !weights.allFinite()) {
      throw Error(ErrorCode::InvalidArgument, "weights must be positive and finite");
    }
    g.unitWeights_ = (weights.array() == 1.0).all();
    if (!g.unitWeights_) {
      g.weights_ = std::move(weights);
      const double rs = r / (r - 1.0);
      g.dualWeights_ = g.weights_.array().pow(1.0 - rs).matrix();
    }
  }
  if (g.isHilbert() && (cp != 1.0 || gq != 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "the Hilbert configuration requires Cp = Gq = 1");
  }
  return g;
}

SpaceGeometry SpaceGeometry::hilbert(std::size_t dim) { return make(dim, 2.0, 2.0, 1.0, 1.0); }

SpaceGeometry SpaceGeometry::preset(std::string_view name, std::size_t dim) {
  if (name == "hilbert") return hilbert(dim);
  if (name == "l3") return make(dim, 3.0, 3.0, 0.5, 1.5);
  if (name == "l1.5") return make(dim, 1.5, 2.0, 0.5, 2.0);
  throw Error(ErrorCode::InvalidArgument, "unknown geometry preset '" + std::string(name) + "'");
}

double SpaceGeometry::defaultGauge(double r) noexcept { return std::max(r, 2.0); }

DataSpace DataSpace::make(std::size_t dim, double s) {
  if (dim == 0) throw Error(ErrorCode::InvalidArgument, "data dimension must be positive");
  if (!(s > 1.0) || !std::isfinite(s)) {
    throw Error(ErrorCode::InvalidArgument, "data norm exponent s must lie in (1, inf)");
  }
  DataSpace d;
  d.dim_ = dim;
  d.s_ = s;
  return d;
}

double norm(const SpaceGeometry& space, const PrimalVector& x) {
  requireSize(space.dim(), x.size(), "norm");
  return detail::weightedNorm(x.coords(), space.r(), space.weights());
}

double dualNorm(const SpaceGeometry& space, const DualVector& xstar) {
  requireSize(space.dim(), xstar.size(), "dualNorm");
  return detail::weightedNorm(xstar.coords(), space.dualExponent(), space.dualWeights());
}

double pairing(const DualVector& xstar, const PrimalVector& x) {
  requireSize(xstar.size(), x.size(), "pairing");
  return xstar.coords().dot(x.coords());
}

DualVector dualityMap(const SpaceGeometry& space, const PrimalVector& x) {
  requireSize(space.dim(), x.size(), "dualityMap");
  return DualVector(detail::weightedDualityMap(x.coords(), space.r(), space.weights(), space.p()));
}

PrimalVector inverseDualityMap(const SpaceGeometry& space, const DualVector& xstar) {
  requireSize(space.dim(), xstar.size(), "inverseDualityMap");
  return PrimalVector(detail::weightedDualityMap(xstar.coords(), space.dualExponent(),
                                                 space.dualWeights(), space.q()));
}

double bregmanDistance(const SpaceGeometry& space, const PrimalVector& x, const PrimalVector& xt) {
  requireSize(space.dim(), x.size(), "bregmanDistance");
  requireSize(space.dim(), xt.size(), "bregmanDistance");
  if (space.isHilbert()) {
    return 0.5 * (x.coords() - xt.coords()).squaredNorm();
  }
  const double p = space.p();
  const double nx = norm(space, x);
  const double nxt = norm(space, xt);
  const DualVector jx = dualityMap(space, x);
  const double value =
      std::pow(nxt, p) / p - std::pow(nx, p) / p - jx.coords().dot(xt.coords() - x.coords());
  return std::max(value, 0.0);
}

double dualBregmanDistance(const SpaceGeometry& space, const DualVector& xstar,
                           const DualVector& xtstar) {
  requireSize(space.dim(), xstar.size(), "dualBregmanDistance");
  requireSize(space.dim(), xtstar.size(), "dualBregmanDistance");
  const double q = space.q();
  const double n = dualNorm(space, xstar);
  const double nt = dualNorm(space, xtstar);
  const PrimalVector j = inverseDualityMap(space, xstar);
  const double value =
      std::pow(nt, q) / q - std::pow(n, q) / q - j.coords().dot(xtstar.coords() - xstar.coords());
  return std::max(value, 0.0);
}

double dataNorm(const DataSpace& data, const DataVector& y) {
  requireSize(data.dim(), y.size(), "dataNorm");
  return detail::weightedNorm(y.coords(), data.s(), {});
}

double dataDualNorm(const DataSpace& data, const DataDualVector& ystar) {
  requireSize(data.dim(), ystar.size(), "dataDualNorm");
  return detail::weightedNorm(ystar.coords(), data.s() / (data.s() - 1.0), {});
}

double pairing(const DataDualVector& ystar, const DataVector& y) {
  requireSize(ystar.size(), y.size(), "pairing");
  return ystar.coords().dot(y.coords());
}

DataDualVector dataDualityMap(const DataSpace& data, double gauge, const DataVector& y) {
  requireSize(data.dim(), y.size(), "dataDualityMap");
  return DataDualVector(detail::weightedDualityMap(y.coords(), data.s(), {}, gauge));
}

}  // namespace projsd

#include "projsd/convex_set.hpp"

#include "projsd/error.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace projsd {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr int kMaxBracketSteps = 2100;

double signedPow(double t, double e) {
  if (t == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(t), e), t);
}

/// Root of a continuous function on [lo, hi] with f(lo) and f(hi) of
/// opposite signs, to a few ulps.
template <class F>
double bracketedRoot(F&& f, double lo, double hi, double flo, double fhi) {
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  std::uintmax_t maxIter = 300;
  boost::math::tools::eps_tolerance<double> tol(std::numeric_limits<double>::digits - 3);
  const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, maxIter);
  if (maxIter >= 300) {
    throw Error(ErrorCode::NonConvergence, "projection root finder hit its iteration cap");
  }
  return 0.5 * (a + b);
}

/// Root of an increasing function on the real line, bracketed by expansion
/// from `guess` in steps that start at `scale` and double.
template <class F>
double increasingRoot(F&& f, double guess, double scale) {
  double f0 = f(guess);
  if (f0 == 0.0) return guess;
  double step = scale > 0.0 ? scale : 1.0;
  double a = guess;
  double fa = f0;
  for (int i = 0; i < kMaxBracketSteps; ++i) {
    const double b = f0 < 0.0 ? guess + step : guess - step;
    const double fb = f(b);
    if ((f0 < 0.0) != (fb < 0.0) || fb == 0.0) {
      return f0 < 0.0 ? bracketedRoot(f, a, b, fa, fb) : bracketedRoot(f, b, a, fb, fa);
    }
    a = b;
    fa = fb;
    step *= 2.0;
  }
  throw Error(ErrorCode::NonConvergence, "could not bracket a coordinate root");
}

/// Root on (0, inf) of a function that is positive near 0 and negative for
/// large arguments. Returns 0 if it stays non-positive down to the smallest
/// normal double.
template <class F>
double positiveRoot(F&& f, double guess) {
  double s = guess > 0.0 && std::isfinite(guess) ? guess : 1.0;
  double fs = f(s);
  if (fs == 0.0) return s;
  if (fs > 0.0) {
    for (int i = 0; i < kMaxBracketSteps; ++i) {
      const double hi = 2.0 * s;
      const double fhi = f(hi);
      if (fhi <= 0.0) return bracketedRoot(f, s, hi, fs, fhi);
      s = hi;
      fs = fhi;
    }
  } else {
    for (int i = 0; i < kMaxBracketSteps; ++i) {
      const double lo = 0.5 * s;
      if (lo < std::numeric_limits<double>::min()) return 0.0;
      const double flo = f(lo);
      if (flo >= 0.0) return bracketedRoot(f, lo, s, flo, fs);
      s = lo;
      fs = flo;
    }
  }
  throw Error(ErrorCode::NonConvergence, "could not bracket the norm fixed point");
}

double weightAt(const SpaceGeometry& space, Eigen::Index i) {
  return space.unitWeights() ? 1.0 : space.weights()[i];
}

bool isFullSupport(const CoordinateSubspace& s, std::size_t dim) {
  return s.support.size() == dim;
}

bool inSupport(const CoordinateSubspace& s, std::size_t i) {
  return std::binary_search(s.support.begin(), s.support.end(), i);
}

// Box: for a fixed value a = ||y||^(p-r) the optimality conditions decouple,
// y_i = clamp((xi_i / (a w_i))^(1/(r-1))). The norm is then a 1-D fixed point.
PrimalVector projectBox(const SpaceGeometry& space, const Box& box, const PrimalVector& x) {
  const Eigen::VectorXd& xv = x.coords();
  if (space.r() == 2.0 && space.p() == 2.0) {
    return PrimalVector(xv.cwiseMax(box.lower).cwiseMin(box.upper));
  }
  const Eigen::VectorXd xi = dualityMap(space, x).coords();
  const double r = space.r();
  const auto candidate = [&](double a) {
    Eigen::VectorXd y(xv.size());
    for (Eigen::Index i = 0; i < xv.size(); ++i) {
      double t;
      if (xi[i] == 0.0) {
        t = 0.0;
      } else if (a == 0.0) {
        t = std::copysign(std::numeric_limits<double>::infinity(), xi[i]);
      } else {
        t = signedPow(xi[i] / (a * weightAt(space, i)), 1.0 / (r - 1.0));
      }
      y[i] = std::clamp(t, box.lower[i], box.upper[i]);
    }
    return y;
  };
  if (space.p() == r) {
    return PrimalVector(candidate(1.0));
  }
  const double e = space.p() - r;
  const auto gap = [&](double s) {
    return detail::weightedNorm(candidate(std::pow(s, e)), r, space.weights()) - s;
  };
  const double s = positiveRoot(gap, norm(space, x));
  return PrimalVector(candidate(std::pow(s, e)));
}

// Ball with general center: minimize ||y||^p/p - <xi, y> + (lambda/r)||y - c||^r.
// For fixed lambda and a = ||y||^(p-r) each coordinate solves a monotone
// scalar equation; lambda is fixed by ||y - c|| = radius.
PrimalVector projectBall(const SpaceGeometry& space, const Ball& ball, const PrimalVector& x) {
  const Eigen::VectorXd& xv = x.coords();
  const Eigen::VectorXd& c = ball.center.coords();
  const double dist = detail::weightedNorm(xv - c, space.r(), space.weights());
  if (dist <= ball.radius) return x;
  if ((space.r() == 2.0 && space.p() == 2.0) || c.isZero(0.0)) {
    // Radial scaling is exact for a zero center in any geometry and for any
    // center in the (weighted) Hilbert case.
    return PrimalVector(c + (ball.radius / dist) * (xv - c));
  }

  const double r = space.r();
  const double e = space.p() - r;
  const Eigen::VectorXd xi = dualityMap(space, x).coords();
  const double scale = std::max({xv.cwiseAbs().maxCoeff(), c.cwiseAbs().maxCoeff(), 1e-300});

  const auto solveFixed = [&](double a, double lambda) {
    Eigen::VectorXd y(xv.size());
    for (Eigen::Index i = 0; i < xv.size(); ++i) {
      const double target = xi[i] / weightAt(space, i);
      const auto phi = [&](double t) {
        return a * signedPow(t, r - 1.0) + lambda * signedPow(t - c[i], r - 1.0) - target;
      };
      y[i] = increasingRoot(phi, xv[i], 0.25 * scale);
    }
    return y;
  };
  const auto solveLambda = [&](double lambda) {
    if (e == 0.0) return solveFixed(1.0, lambda);
    const auto gap = [&](double s) {
      return detail::weightedNorm(solveFixed(std::pow(s, e), lambda), r, space.weights()) - s;
    };
    const double s = positiveRoot(gap, norm(space, x));
    return solveFixed(std::pow(s, e), lambda);
  };
  const auto excess = [&](double lambda) {
    return detail::weightedNorm(solveLambda(lambda) - c, r, space.weights()) - ball.radius;
  };
  const double lambda = positiveRoot(excess, 1.0);
  return PrimalVector(solveLambda(lambda));
}

PrimalVector projectSubspace(const SpaceGeometry& space, const CoordinateSubspace& sub,
                             const PrimalVector& x) {
  Eigen::VectorXd restricted = Eigen::VectorXd::Zero(x.coords().size());
  bool inside = true;
  for (Eigen::Index i = 0; i < restricted.size(); ++i) {
    if (!inSupport(sub, static_cast<std::size_t>(i)) && x.coords()[i] != 0.0) inside = false;
  }
  if (inside) return x;
  if (space.r() == 2.0 && space.p() == 2.0) {
    for (std::size_t i : sub.support) restricted[static_cast<Eigen::Index>(i)] = x[i];
    return PrimalVector(restricted);
  }
  // Optimality: J_p(y) agrees with J_p(x) on the support and y vanishes
  // off it, i.e. y = J_q^*(J_p(x) restricted to the support).
  const DualVector xi = dualityMap(space, x);
  for (std::size_t i : sub.support) restricted[static_cast<Eigen::Index>(i)] = xi[i];
  return inverseDualityMap(space, DualVector(restricted));
}

}  // namespace

ConvexSet ConvexSet::wholeSpace() { return ConvexSet(WholeSpace{}); }

ConvexSet ConvexSet::box(Eigen::VectorXd lower, Eigen::VectorXd upper) {
  if (lower.size() != upper.size()) {
    throw Error(ErrorCode::DimensionMismatch, "box bounds differ in length");
  }
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (std::isnan(lower[i]) || std::isnan(upper[i]) || lower[i] > upper[i] ||
        lower[i] == std::numeric_limits<double>::infinity() ||
        upper[i] == -std::numeric_limits<double>::infinity()) {
      throw Error(ErrorCode::InvalidArgument,
                  "box bounds must satisfy lower <= upper with a nonempty interval");
    }
  }
  return ConvexSet(Box{std::move(lower), std::move(upper)});
}

ConvexSet ConvexSet::ball(PrimalVector center, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw Error(ErrorCode::InvalidArgument, "ball radius must be positive and finite");
  }
  if (!center.allFinite()) throw Error(ErrorCode::InvalidArgument, "ball center must be finite");
  return ConvexSet(Ball{std::move(center), radius});
}

ConvexSet ConvexSet::subspace(std::vector<std::size_t> support) {
  if (support.empty()) throw Error(ErrorCode::InvalidArgument, "subspace support is empty");
  std::sort(support.begin(), support.end());
  support.erase(std::unique(support.begin(), support.end()), support.end());
  return ConvexSet(CoordinateSubspace{std::move(support)});
}

ConvexSet ConvexSet::leadingSubspace(std::size_t count) {
  std::vector<std::size_t> support(count);
  for (std::size_t i = 0; i < count; ++i) support[i] = i;
  return subspace(std::move(support));
}

std::string ConvexSet::kind() const {
  return std::visit(Overloaded{[](const WholeSpace&) { return std::string("whole"); },
                               [](const Box&) { return std::string("box"); },
                               [](const Ball&) { return std::string("ball"); },
                               [](const CoordinateSubspace&) { return std::string("subspace"); }},
                    set_);
}

void ConvexSet::checkCompatible(const SpaceGeometry& space) const {
  const auto dim = space.dim();
  std::visit(
      Overloaded{
          [](const WholeSpace&) {},
          [dim](const Box& b) {
            if (static_cast<std::size_t>(b.lower.size()) != dim) {
              throw Error(ErrorCode::DimensionMismatch, "box dimension differs from the space");
            }
          },
          [dim](const Ball& b) {
            if (b.center.size() != dim) {
              throw Error(ErrorCode::DimensionMismatch, "ball center dimension differs from the space");
            }
          },
          [dim](const CoordinateSubspace& s) {
            if (s.support.back() >= dim) {
              throw Error(ErrorCode::InvalidArgument, "subspace index outside the space");
            }
          }},
      set_);
}

bool contains(const SpaceGeometry& space, const ConvexSet& set, const PrimalVector& x,
              double tol) {
  set.checkCompatible(space);
  if (x.size() != space.dim()) throw Error(ErrorCode::DimensionMismatch, "contains");
  return std::visit(
      Overloaded{
          [](const WholeSpace&) { return true; },
          [&](const Box& b) {
            const Eigen::VectorXd clamped = x.coords().cwiseMax(b.lower).cwiseMin(b.upper);
            return norm(space, PrimalVector(x.coords() - clamped)) <= tol;
          },
          [&](const Ball& b) { return norm(space, x - b.center) - b.radius <= tol; },
          [&](const CoordinateSubspace& s) {
            Eigen::VectorXd off = x.coords();
            for (std::size_t i : s.support) off[static_cast<Eigen::Index>(i)] = 0.0;
            return norm(space, PrimalVector(off)) <= tol;
          }},
      set.variant());
}

PrimalVector bregmanProject(const SpaceGeometry& space, const ConvexSet& set,
                            const PrimalVector& x) {
  set.checkCompatible(space);
  if (x.size() != space.dim()) throw Error(ErrorCode::DimensionMismatch, "bregmanProject");
  if (!x.allFinite()) throw Error(ErrorCode::InvalidArgument, "cannot project a non-finite point");
  return std::visit(
      Overloaded{[&](const WholeSpace&) { return x; },
                 [&](const Box& b) {
                   if (contains(space, set, x, 0.0)) return x;
                   return projectBox(space, b, x);
                 },
                 [&](const Ball& b) { return projectBall(space, b, x); },
                 [&](const CoordinateSubspace& s) {
                   if (isFullSupport(s, space.dim())) return x;
                   return projectSubspace(space, s, x);
                 }},
      set.variant());
}

NonExpansivenessCheck checkTotalNonExpansiveness(const SpaceGeometry& space,
                                                 const ConvexSet& set, const PrimalVector& x,
                                                 const PrimalVector& z) {
  const PrimalVector px = bregmanProject(space, set, x);
  NonExpansivenessCheck check;
  check.lhs = bregmanDistance(space, px, z) + bregmanDistance(space, x, px);
  check.rhs = bregmanDistance(space, x, z);
  check.ok = check.lhs <= check.rhs + 1e-10;
  return check;
}

bool isNestedIn(const SpaceGeometry& space, const ConvexSet& inner, const ConvexSet& outer) {
  inner.checkCompatible(space);
  outer.checkCompatible(space);
  const std::size_t dim = space.dim();
  const auto isWhole = [dim](const ConvexSet& s) {
    if (std::holds_alternative<WholeSpace>(s.variant())) return true;
    const auto* sub = std::get_if<CoordinateSubspace>(&s.variant());
    return sub != nullptr && isFullSupport(*sub, dim);
  };
  if (isWhole(outer)) return true;
  if (isWhole(inner)) return false;
  constexpr double inf = std::numeric_limits<double>::infinity();

  return std::visit(
      Overloaded{
          [&](const CoordinateSubspace& a, const CoordinateSubspace& b) {
            return std::includes(b.support.begin(), b.support.end(), a.support.begin(),
                                 a.support.end());
          },
          [&](const CoordinateSubspace& a, const Box& b) {
            for (std::size_t i = 0; i < dim; ++i) {
              const auto k = static_cast<Eigen::Index>(i);
              if (inSupport(a, i)) {
                if (b.lower[k] != -inf || b.upper[k] != inf) return false;
              } else if (b.lower[k] > 0.0 || b.upper[k] < 0.0) {
                return false;
              }
            }
            return true;
          },
          [&](const Box& a, const Box& b) {
            return (a.lower.array() >= b.lower.array()).all() &&
                   (a.upper.array() <= b.upper.array()).all();
          },
          [&](const Box& a, const CoordinateSubspace& b) {
            for (std::size_t i = 0; i < dim; ++i) {
              const auto k = static_cast<Eigen::Index>(i);
              if (!inSupport(b, i) && (a.lower[k] != 0.0 || a.upper[k] != 0.0)) return false;
            }
            return true;
          },
          [&](const Box& a, const Ball& b) {
            if (!a.lower.allFinite() || !a.upper.allFinite() || dim > 20) return false;
            // The norm is convex, so its maximum over the box sits at a vertex.
            Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
            for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << dim); ++mask) {
              for (std::size_t i = 0; i < dim; ++i) {
                const auto k = static_cast<Eigen::Index>(i);
                v[k] = (mask >> i) & 1U ? a.upper[k] : a.lower[k];
              }
              if (norm(space, PrimalVector(v) - b.center) > b.radius) return false;
            }
            return true;
          },
          [&](const Ball& a, const Box& b) {
            const double reach = detail::primalToSup(space) * a.radius;
            return ((a.center.coords().array() - reach) >= b.lower.array()).all() &&
                   ((a.center.coords().array() + reach) <= b.upper.array()).all();
          },
          [&](const Ball& a, const Ball& b) {
            return norm(space, a.center - b.center) + a.radius <= b.radius;
          },
          [](const auto&, const auto&) { return false; }},
      inner.variant(), outer.variant());
}

}  // namespace projsd

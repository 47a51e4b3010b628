#pragma once

#include "projsd/geometry.hpp"

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace projsd {

struct WholeSpace {};

/// Coordinate box; +-infinity bounds are allowed.
struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

/// Closed ball in the norm of the primal space.
struct Ball {
  PrimalVector center;
  double radius = 1.0;
};

/// {x : x_i = 0 for i outside `support`}. Support is kept sorted and unique.
struct CoordinateSubspace {
  std::vector<std::size_t> support;
};

/// A closed convex subset Z of X.
class ConvexSet {
 public:
  using Variant = std::variant<WholeSpace, Box, Ball, CoordinateSubspace>;

  ConvexSet() : set_(WholeSpace{}) {}

  static ConvexSet wholeSpace();
  static ConvexSet box(Eigen::VectorXd lower, Eigen::VectorXd upper);
  static ConvexSet ball(PrimalVector center, double radius);
  static ConvexSet subspace(std::vector<std::size_t> support);
  /// Subspace on coordinates {0, ..., count-1}.
  static ConvexSet leadingSubspace(std::size_t count);

  const Variant& variant() const noexcept { return set_; }
  std::string kind() const;

  /// Throws DimensionMismatch / InvalidArgument when the set cannot live in `space`.
  void checkCompatible(const SpaceGeometry& space) const;

 private:
  explicit ConvexSet(Variant v) : set_(std::move(v)) {}
  Variant set_;
};

/// Membership up to `tol`, measured as the space-norm size of the violation.
bool contains(const SpaceGeometry& space, const ConvexSet& set, const PrimalVector& x,
              double tol);

/// P_Z(x) = argmin { Delta_p(x, y) : y in Z }.
///
/// Exact on every variant: closed forms where they exist, otherwise 1-D
/// monotone root finding on the optimality conditions. Throws
/// NonConvergence if a bracket cannot be established.
PrimalVector bregmanProject(const SpaceGeometry& space, const ConvexSet& set,
                            const PrimalVector& x);

struct NonExpansivenessCheck {
  double lhs = 0.0;  // Delta_p(P_Z(x), z) + Delta_p(x, P_Z(x))
  double rhs = 0.0;  // Delta_p(x, z)
  bool ok = false;
};

/// Evaluates the total non-expansiveness inequality of P_Z with pole z in Z.
NonExpansivenessCheck checkTotalNonExpansiveness(const SpaceGeometry& space,
                                                 const ConvexSet& set, const PrimalVector& x,
                                                 const PrimalVector& z);

/// True when every point of `inner` is contained in `outer` (decidable pairs
/// only; mixed pairs that cannot be decided exactly return false).
bool isNestedIn(const SpaceGeometry& space, const ConvexSet& inner, const ConvexSet& outer);

}  // namespace projsd

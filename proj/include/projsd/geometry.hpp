#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <initializer_list>
#include <string_view>
#include <utility>

namespace projsd {

/// A coordinate vector tagged with the space it lives in. The tag keeps
/// primal iterates, dual objects (J_p(x), gradients) and data-space
/// residuals from being mixed up at compile time.
template <class Tag>
class TaggedVector {
 public:
  TaggedVector() = default;
  explicit TaggedVector(Eigen::VectorXd coords) : coords_(std::move(coords)) {}
  TaggedVector(std::initializer_list<double> values)
      : coords_(Eigen::Map<const Eigen::VectorXd>(values.begin(),
                                                  static_cast<Eigen::Index>(values.size()))) {}

  static TaggedVector zeros(std::size_t n) {
    return TaggedVector(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)));
  }

  const Eigen::VectorXd& coords() const noexcept { return coords_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(coords_.size()); }
  double operator[](std::size_t i) const { return coords_[static_cast<Eigen::Index>(i)]; }
  bool allFinite() const { return coords_.allFinite(); }

  friend TaggedVector operator+(const TaggedVector& a, const TaggedVector& b) {
    return TaggedVector(a.coords_ + b.coords_);
  }
  friend TaggedVector operator-(const TaggedVector& a, const TaggedVector& b) {
    return TaggedVector(a.coords_ - b.coords_);
  }
  friend TaggedVector operator*(double s, const TaggedVector& a) {
    return TaggedVector(s * a.coords_);
  }

 private:
  Eigen::VectorXd coords_;
};

struct PrimalTag {};
struct DualTag {};
struct DataTag {};
struct DataDualTag {};

using PrimalVector = TaggedVector<PrimalTag>;
using DualVector = TaggedVector<DualTag>;
using DataVector = TaggedVector<DataTag>;
using DataDualVector = TaggedVector<DataDualTag>;

/// X = R^dim with the weighted norm (sum_i w_i |x_i|^r)^(1/r), duality gauge
/// t -> t^(p-1) and the norm/Bregman comparison constants Cp, Gq.
///
/// The dual X* is R^dim with exponent r' = r/(r-1) and weights w_i^(1-r'),
/// which makes <x, x*> = sum_i x_i x*_i the canonical pairing.
class SpaceGeometry {
 public:
  /// Validating constructor. An empty `weights` means unit weights.
  /// p must satisfy p >= max(r, 2); the Hilbert configuration (r = p = 2,
  /// unit weights) only accepts Cp = Gq = 1.
  static SpaceGeometry make(std::size_t dim, double r, double p, double cp, double gq,
                            Eigen::VectorXd weights = {});
  static SpaceGeometry hilbert(std::size_t dim);
  /// Named configurations with certified constants: "hilbert", "l3", "l1.5".
  static SpaceGeometry preset(std::string_view name, std::size_t dim);
  /// max(r, 2)
  static double defaultGauge(double r) noexcept;

  std::size_t dim() const noexcept { return dim_; }
  double r() const noexcept { return r_; }
  double p() const noexcept { return p_; }
  double q() const noexcept { return p_ / (p_ - 1.0); }
  double cp() const noexcept { return cp_; }
  double gq() const noexcept { return gq_; }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  bool unitWeights() const noexcept { return unitWeights_; }
  bool isHilbert() const noexcept { return r_ == 2.0 && p_ == 2.0 && unitWeights_; }

  double dualExponent() const noexcept { return r_ / (r_ - 1.0); }
  const Eigen::VectorXd& dualWeights() const noexcept { return dualWeights_; }

 private:
  SpaceGeometry() = default;

  std::size_t dim_ = 0;
  double r_ = 2.0;
  double p_ = 2.0;
  double cp_ = 1.0;
  double gq_ = 1.0;
  Eigen::VectorXd weights_;
  Eigen::VectorXd dualWeights_;
  bool unitWeights_ = true;
};

/// Y = R^dim with the unweighted l^s norm, s in (1, inf).
class DataSpace {
 public:
  static DataSpace make(std::size_t dim, double s = 2.0);

  std::size_t dim() const noexcept { return dim_; }
  double s() const noexcept { return s_; }

 private:
  DataSpace() = default;
  std::size_t dim_ = 0;
  double s_ = 2.0;
};

double norm(const SpaceGeometry& space, const PrimalVector& x);
double dualNorm(const SpaceGeometry& space, const DualVector& xstar);
double pairing(const DualVector& xstar, const PrimalVector& x);

/// J_p(x)_i = ||x||^(p-r) w_i |x_i|^(r-1) sign(x_i), with J_p(0) = 0.
DualVector dualityMap(const SpaceGeometry& space, const PrimalVector& x);

/// J_q^*, the duality map of X* with gauge t -> t^(q-1); the inverse of J_p.
PrimalVector inverseDualityMap(const SpaceGeometry& space, const DualVector& xstar);

/// Delta_p(x, xt) = ||xt||^p/p - ||x||^p/p - <J_p(x), xt - x>. The duality
/// map is evaluated at the first argument.
double bregmanDistance(const SpaceGeometry& space, const PrimalVector& x, const PrimalVector& xt);

/// Delta_q on X*, built from J_q^*.
double dualBregmanDistance(const SpaceGeometry& space, const DualVector& xstar,
                           const DualVector& xtstar);

double dataNorm(const DataSpace& data, const DataVector& y);
double dataDualNorm(const DataSpace& data, const DataDualVector& ystar);
double pairing(const DataDualVector& ystar, const DataVector& y);

/// Single-valued duality map j of Y with gauge t -> t^(gauge-1).
DataDualVector dataDualityMap(const DataSpace& data, double gauge, const DataVector& y);

namespace detail {

/// (sum_i w_i |v_i|^r)^(1/r); an empty `w` means unit weights.
double weightedNorm(const Eigen::VectorXd& v, double r, const Eigen::VectorXd& w);

/// Duality map of the weighted l^r norm with gauge t -> t^(gauge-1).
Eigen::VectorXd weightedDualityMap(const Eigen::VectorXd& v, double r, const Eigen::VectorXd& w,
                                   double gauge);

/// Smallest c with ||v||_to <= c ||v||_from for all v in R^n (unweighted).
double normEquivalence(std::size_t n, double from, double to);

/// Smallest c with ||v||_s <= c ||v||_X on R^dim.
double primalToLs(const SpaceGeometry& space, double s);

/// Smallest c with max_i |v_i| <= c ||v||_X.
double primalToSup(const SpaceGeometry& space);

}  // namespace detail

}  // namespace projsd

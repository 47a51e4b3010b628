#pragma once

// Shared helpers for the test binaries. The oracles here are deliberately
// written with plain loops so they do not share code paths with the library.

#include "projsd/geometry.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace testing_support {

inline Eigen::VectorXd gaussian(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

/// (sum w_i |x_i|^r)^(1/r) by direct summation.
inline double oracleNorm(const Eigen::VectorXd& x, double r, const Eigen::VectorXd& w = {}) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    s += (w.size() ? w[i] : 1.0) * std::pow(std::abs(x[i]), r);
  }
  return std::pow(s, 1.0 / r);
}

/// Duality map of the weighted l^r norm with gauge p, straight from its
/// definition as the gradient of ||x||^p / p.
inline Eigen::VectorXd oracleJ(const Eigen::VectorXd& x, double r, double p,
                               const Eigen::VectorXd& w = {}) {
  const double n = oracleNorm(x, r, w);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(x.size());
  if (n == 0.0) return out;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double wi = w.size() ? w[i] : 1.0;
    out[i] = std::pow(n, p - r) * wi * std::pow(std::abs(x[i]), r - 1.0) * (x[i] > 0 ? 1 : x[i] < 0 ? -1 : 0);
  }
  return out;
}

/// Delta_p(x, xt) with the duality map at x.
inline double oracleBregman(const Eigen::VectorXd& x, const Eigen::VectorXd& xt, double r,
                            double p, const Eigen::VectorXd& w = {}) {
  const Eigen::VectorXd j = oracleJ(x, r, p, w);
  return std::pow(oracleNorm(xt, r, w), p) / p - std::pow(oracleNorm(x, r, w), p) / p -
         j.dot(xt - x);
}

inline Eigen::MatrixXd randomOrthogonal(std::mt19937_64& rng, Eigen::Index n) {
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index j = 0; j < n; ++j) g.col(j) = gaussian(rng, n);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  return qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
}

/// U diag(sigma) V^T with random orthogonal U, V.
inline Eigen::MatrixXd matrixWithSingularValues(std::mt19937_64& rng, const Eigen::VectorXd& sigma) {
  const auto n = sigma.size();
  return randomOrthogonal(rng, n) * sigma.asDiagonal() * randomOrthogonal(rng, n).transpose();
}

}  // namespace testing_support

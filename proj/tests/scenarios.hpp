#pragma once

// Problem set-ups shared by the multilevel tests and the acceptance binary.
// Every constant is written out in closed form here rather than asked of the
// library.

#include "projsd/multilevel.hpp"

#include <cmath>
#include <memory>

namespace testing_support {

/// sigma_i = e^-i in R^8, data y_i = e^-2i (i < 8) plus y_8 = 1e-7 outside
/// the range, nested leading subspaces of sizes 2, 4, 6, 8 in the Hilbert
/// configuration.
struct DiagonalDecay {
  static constexpr int kDim = 8;
  static constexpr double kOutside = 1e-7;
  static constexpr double kEtaHat = 1e-6;

  Eigen::VectorXd sigma = Eigen::VectorXd(kDim);
  Eigen::VectorXd y = Eigen::VectorXd(kDim + 1);
  std::shared_ptr<const projsd::DiagonalModel> model;

  DiagonalDecay() {
    for (int i = 0; i < kDim; ++i) {
      sigma[i] = std::exp(-i);
      y[i] = std::exp(-2.0 * i);
    }
    y[kDim] = kOutside;
    model = std::make_shared<projsd::DiagonalModel>(sigma, kDim + 1);
  }

  /// dist(y, F(Z_m)) for the leading subspace of size m.
  double eta(int m) const {
    double s = kOutside * kOutside;
    for (int i = m; i < kDim; ++i) s += y[i] * y[i];
    return std::sqrt(s);
  }
  /// 2^(-1/2) / min_{i<m} sigma_i.
  static double stability(int m) { return std::exp(m - 1.0) / std::sqrt(2.0); }
  /// z_i = y_i / sigma_i on the support.
  projsd::PrimalVector solution(int m) const {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(kDim);
    for (int i = 0; i < m; ++i) z[i] = y[i] / sigma[i];
    return projsd::PrimalVector(z);
  }

  /// Schedule with the exact constants; `lip` overrides the (true) value 0.
  projsd::Schedule schedule(double lip = 0.0) const {
    projsd::Schedule s;
    s.epsilon = 1.0;
    s.etaHat = kEtaHat;
    for (int n = 0; n < 4; ++n) {
      const int m = 2 * (n + 1);
      projsd::Level level;
      level.index = static_cast<std::size_t>(n);
      level.set = projsd::ConvexSet::leadingSubspace(static_cast<std::size_t>(m));
      level.model = model;
      level.eta = eta(m);
      level.stability = stability(m);
      level.lip = lip;
      level.lhat = 1.0;
      level.reference = solution(m);
      s.levels.push_back(std::move(level));
    }
    return s;
  }

  projsd::DataVector data() const { return projsd::DataVector(y); }
};

}  // namespace testing_support

#include "doctest.h"

#include "projsd/error.hpp"
#include "projsd/forward_model.hpp"
#include "support.hpp"

#include <cmath>

using namespace projsd;
using testing_support::gaussian;

TEST_CASE("linear model derivative and adjoint") {
  std::mt19937_64 rng(1);
  Eigen::MatrixXd a(3, 3);
  a << 2, 1, 0, 1, 3, 1, 0, 1, 4;  // symmetric
  const LinearModel m(a);
  const auto data = DataSpace::make(3);
  for (int i = 0; i < 20; ++i) {
    const PrimalVector x(gaussian(rng, 3)), h(gaussian(rng, 3));
    CHECK(fdDerivativeCheck(m, data, x, h, 1e-3) < 1e-12);
    CHECK(adjointCheck(m, x, h, DataDualVector(gaussian(rng, 3))) < 1e-12);
  }
  CHECK(adjointCheck(m, PrimalVector{1, 2, 3}, PrimalVector::zeros(3), DataDualVector{1, 1, 1}) == 0.0);
  const auto lc = m.lipschitz(SpaceGeometry::hilbert(3), data);
  CHECK(lc.lip == 0.0);
  CHECK(lc.lhat == doctest::Approx(Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues()[0]));
}

TEST_CASE("quadratic model derivative and adjoint") {
  std::mt19937_64 rng(2);
  const Eigen::MatrixXd a = testing_support::matrixWithSingularValues(rng, Eigen::Vector4d(1, 1.5, 1.8, 2));
  const QuadraticModel m(a, 0.05, PrimalVector::zeros(4), 3.0);
  const auto data = DataSpace::make(4);
  for (int i = 0; i < 50; ++i) {
    const PrimalVector x(gaussian(rng, 4)), h(gaussian(rng, 4));
    CHECK(fdDerivativeCheck(m, data, x, h, 1e-3) < 1e-10);
    CHECK(adjointCheck(m, x, h, DataDualVector(gaussian(rng, 4))) < 1e-10);
  }
  CHECK_THROWS_AS(QuadraticModel(Eigen::MatrixXd::Ones(2, 3), 0.1, PrimalVector::zeros(3), 1.0), Error);
  CHECK_THROWS_AS(QuadraticModel(a, -0.1, PrimalVector::zeros(4), 1.0), Error);
  CHECK_THROWS_AS(QuadraticModel(a, 0.1, PrimalVector::zeros(4), 0.0), Error);
}

TEST_CASE("quadratic model constants bound sampled values") {
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd a = testing_support::matrixWithSingularValues(rng, Eigen::Vector3d(1, 1.5, 2));
  const PrimalVector c{0.5, -0.2, 0.1};
  const QuadraticModel m(a, 0.05, c, 2.0);
  for (const char* preset : {"hilbert", "l3", "l1.5"}) {
    const auto space = SpaceGeometry::preset(preset, 3);
    for (double s : {2.0, 1.5, 3.0}) {
      const auto data = DataSpace::make(3, s);
      const auto claimed = m.lipschitz(space, data);
      const auto sampled = sampleLipschitzConstants(m, space, data, SamplingBall{c, 2.0}, 2000, 9);
      CHECK(sampled.lhat <= claimed.lhat);
      CHECK(sampled.lip <= claimed.lip);
    }
  }
  const auto h = SpaceGeometry::hilbert(3);
  const auto data = DataSpace::make(3);
  const auto set = ConvexSet::ball(c, 2.0);
  const auto cst = m.stabilityConstant(h, data, set);
  REQUIRE(cst.has_value());
  const auto est = estimateStabilityConstant(m, set, h, data, 4000, 5);
  CHECK(est.estimate <= *cst);
  CHECK(est.pairsUsed == 4000);
  // Too much curvature for the margin: no certificate.
  const QuadraticModel steep(a, 1.0, c, 2.0);
  CHECK_FALSE(steep.stabilityConstant(h, data, set).has_value());
  CHECK_FALSE(m.stabilityConstant(SpaceGeometry::preset("l3", 3), data, set).has_value());
}

TEST_CASE("stability estimates for diagonal operators") {
  const auto h = SpaceGeometry::hilbert(2);
  const auto data = DataSpace::make(2);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2);
  a(0, 0) = 1.0;
  a(1, 1) = std::exp(-1.0);
  const LinearModel lin(a);
  const auto sub0 = ConvexSet::subspace({0});
  const SamplingBall ball{PrimalVector::zeros(2), 1.0};
  const auto est = estimateStabilityConstant(lin, sub0, h, data, 500, 1, ball);
  CHECK(est.estimate == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(*lin.stabilityConstant(h, data, sub0) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(*lin.stabilityConstant(h, data, ConvexSet::wholeSpace()) ==
        doctest::Approx(std::exp(1.0) / std::sqrt(2.0)));

  const LinearModel identity(Eigen::MatrixXd::Identity(2, 2));
  const auto idEst = estimateStabilityConstant(identity, ConvexSet::wholeSpace(), h, data, 200, 2, ball);
  CHECK(idEst.estimate == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));

  // A constant model leaves nothing to compare.
  const LinearModel zero(Eigen::MatrixXd::Zero(2, 2));
  CHECK_THROWS_AS(estimateStabilityConstant(zero, ConvexSet::wholeSpace(), h, data, 50, 3, ball), Error);
  CHECK_THROWS_AS(estimateStabilityConstant(identity, ConvexSet::wholeSpace(), h, data, 10, 3), Error);
}

TEST_CASE("diagonal model best approximation") {
  Eigen::VectorXd sigma(3);
  sigma << 1.0, 0.5, 0.25;
  const DiagonalModel m(sigma, 4);
  const auto data = DataSpace::make(4);
  const DataVector y{1.0, 1.0, 1.0, 0.1};
  const auto set = ConvexSet::subspace({0, 1});
  const PrimalVector z = m.bestApproximation(y, set);
  CHECK(z[0] == doctest::Approx(1.0));
  CHECK(z[1] == doctest::Approx(2.0));
  CHECK(z[2] == 0.0);
  CHECK(m.approximationError(data, y, set) == doctest::Approx(std::sqrt(1.0 + 0.01)));
  CHECK(m.approximationError(data, y, ConvexSet::wholeSpace()) == doctest::Approx(0.1));
  CHECK(*m.stabilityConstant(SpaceGeometry::hilbert(3), data, set) ==
        doctest::Approx(1.0 / (std::sqrt(2.0) * 0.5)));
  CHECK_THROWS_AS(m.bestApproximation(y, ConvexSet::ball(PrimalVector::zeros(3), 1.0)), Error);
  CHECK_THROWS_AS(DiagonalModel(sigma, 2), Error);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 10; ++i) {
    const PrimalVector x(gaussian(rng, 3)), h(gaussian(rng, 3));
    CHECK(fdDerivativeCheck(m, data, x, h, 1e-3) < 1e-12);
    CHECK(adjointCheck(m, x, h, DataDualVector(gaussian(rng, 4))) < 1e-12);
  }
}

TEST_CASE("operator norm bound and Bregman ball radius") {
  std::mt19937_64 rng(6);
  const Eigen::MatrixXd a = testing_support::matrixWithSingularValues(rng, Eigen::Vector3d(0.5, 1, 3));
  CHECK(operatorNormBound(a, SpaceGeometry::hilbert(3), DataSpace::make(3)) == doctest::Approx(3.0));
  const auto l15 = SpaceGeometry::preset("l1.5", 3);
  const auto data = DataSpace::make(3, 3.0);
  const double bound = operatorNormBound(a, l15, data);
  for (int i = 0; i < 200; ++i) {
    const Eigen::VectorXd x = gaussian(rng, 3);
    CHECK(testing_support::oracleNorm(a * x, 3.0) <= bound * norm(l15, PrimalVector(x)) * (1 + 1e-14));
  }
  // Delta_p(x, z) <= rho implies ||x - z|| <= R.
  const auto l3 = SpaceGeometry::preset("l3", 3);
  const double rho = 0.7;
  const double radius = normRadiusOfBregmanBall(l3, rho);
  for (int i = 0; i < 200; ++i) {
    const PrimalVector z(gaussian(rng, 3)), x(gaussian(rng, 3));
    if (bregmanDistance(l3, x, z) <= rho) CHECK(norm(l3, x - z) <= radius);
  }
}

TEST_CASE("sampling respects the set") {
  std::mt19937_64 rng(7);
  const auto g = SpaceGeometry::preset("l3", 3);
  const SamplingBall ball{PrimalVector{1, 1, 1}, 0.5};
  const auto sub = ConvexSet::subspace({1});
  for (int i = 0; i < 50; ++i) {
    const PrimalVector x = sampleInSet(g, sub, ball, rng);
    CHECK(x[0] == 0.0);
    CHECK(x[2] == 0.0);
    CHECK(std::abs(x[1] - 1.0) <= 0.5);
  }
  CHECK_THROWS_AS(sampleInSet(g, ConvexSet::wholeSpace(), std::nullopt, rng), Error);
}

TEST_CASE("stability estimate converges to the closed form for diagonal operators") {
  const auto h = SpaceGeometry::hilbert(4);
  const auto data = DataSpace::make(4);
  const Eigen::Vector4d sigma(1.0, std::exp(-1.0), std::exp(-2.0), std::exp(-3.0));
  const LinearModel m(Eigen::MatrixXd(sigma.asDiagonal()));
  const auto set = ConvexSet::subspace({0, 1, 2});
  const double exact = std::exp(2.0) / std::sqrt(2.0);
  const auto est = estimateStabilityConstant(m, set, h, data, 100000, 17,
                                             SamplingBall{PrimalVector::zeros(4), 1.0});
  CHECK(est.estimate <= exact * (1 + 1e-12));
  CHECK(est.estimate >= 0.95 * exact);
}

#include "doctest.h"

#include "projsd/error.hpp"
#include "projsd/multilevel.hpp"
#include "scenarios.hpp"

#include <cmath>

using namespace projsd;
using testing_support::DiagonalDecay;

namespace {

ErrorCode codeOf(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("final level selection") {
  const double etaHat = 1e-3;
  std::vector<double> etas;
  for (int n = 0; n < 6; ++n) etas.push_back(std::ldexp(etaHat, -n));
  CHECK(selectFinalLevel(etas, 1.0, etaHat) == 2);
  CHECK(selectFinalLevel({0.0, 0.0}, 1.0, etaHat) == 0);
  CHECK(selectFinalLevel({1.0, 0.25}, 3.0, 1.5) == 1);
  CHECK((codeOf([&] { (void)selectFinalLevel({1.0, 0.5}, 1.0, 1.0); }) == ErrorCode::NoSuchLevel));
}

TEST_CASE("transition inequality") {
  const auto h = SpaceGeometry::hilbert(2);
  Level a, b;
  a.eta = 0.01;
  b.eta = 0.001;
  b.stability = 2.0;
  b.lhat = 1.0;
  b.lip = 0.0;
  auto t = validateTransition(h, a, b, 1.0);
  CHECK(t.lhs == doctest::Approx(0.04));
  CHECK(std::isinf(t.rhs));
  CHECK(t.ok);

  // C~ = L C^2 in the Hilbert case; hand-evaluated right side.
  b.lip = 0.1;
  const double ct = 0.4;
  const double bracket = (1 + std::sqrt(1 - 8 * ct * 0.001)) / (2 * ct) - 0.002;
  const double rhs = std::sqrt(0.5) / 2.0 * bracket - 0.001;
  t = validateTransition(h, a, b, 1.0);
  CHECK(t.rhs == doctest::Approx(rhs).epsilon(1e-14));
  CHECK(t.ok);
  a.eta = rhs / 4.0;
  CHECK_FALSE(validateTransition(h, a, b, 1.0).ok);
  b.eta = 0.5;
  CHECK((codeOf([&] { (void)validateTransition(h, a, b, 1.0); }) == ErrorCode::EtaTooLarge));
}

TEST_CASE("level radius matches the global formula") {
  const auto g = SpaceGeometry::preset("l3", 2);
  Level level;
  level.eta = 1e-3;
  level.stability = 3.0;
  level.lip = 0.01;
  level.lhat = 2.0;
  const double ct = level.ctilde(g);
  REQUIRE(level.rho(g).has_value());
  CHECK(*level.rho(g) == doctest::Approx(convergenceRadius(g, 2.0, ct, 1e-3)).epsilon(1e-12));
  level.lip = 0.0;
  CHECK_FALSE(level.rho(g).has_value());
}

TEST_CASE("example schedule") {
  const double etaHat = 1e-3;
  for (const char* preset : {"hilbert", "l3", "l1.5"}) {
    const auto g = SpaceGeometry::preset(preset, 2);
    const double lambda = 100 * etaHat;
    const double bound = exampleTauBound(g, lambda);
    CHECK(bound == doctest::Approx(std::pow(g.cp() / g.p(), 3 / g.p()) /
                                   (16 * lambda * (4 * std::exp(1.0) + 1))));
    for (double frac : {1e-3, 0.1, 0.5, 0.9, 0.999}) {
      const Schedule s = exampleSchedule(lambda, frac * bound, g, etaHat, 64);
      const auto v = validateSchedule(g, s);
      CHECK_MESSAGE(v.ok(), preset << " tau/bound = " << frac);
      CHECK(*v.finalLevel + 1 == s.levels.size());
      for (std::size_t n = 0; n < s.levels.size(); ++n) {
        const double a = static_cast<double>(n);
        CHECK(s.levels[n].eta == doctest::Approx(lambda * std::exp(-a) / (a + 2)));
        CHECK(s.levels[n].stability == doctest::Approx(2 * std::exp(a)));
        CHECK(s.levels[n].lhat == doctest::Approx((a + 1) * std::exp(-a)));
        // L_n C_n^2 = 4 tau e^n.
        CHECK(s.levels[n].ctilde(g) ==
              doctest::Approx(s.levels[0].ctilde(g) * std::exp(a)).epsilon(1e-12));
      }
    }
    CHECK((codeOf([&] { (void)exampleSchedule(lambda, bound, g, etaHat, 64); }) ==
           ErrorCode::TauOutOfRange));
    CHECK((codeOf([&] { (void)exampleSchedule(lambda, 0.0, g, etaHat, 64); }) ==
           ErrorCode::TauOutOfRange));
    CHECK((codeOf([&] { (void)exampleSchedule(10 * etaHat, 1e-9, g, etaHat, 64); }) ==
           ErrorCode::LambdaTooSmall));
    CHECK_NOTHROW(exampleSchedule(10 * etaHat, 1e-9, g, etaHat, 64, true));
    CHECK((codeOf([&] { (void)exampleSchedule(lambda, 0.5 * bound, g, etaHat, 2); }) ==
           ErrorCode::NoSuchLevel));
  }
}

TEST_CASE("the transition check has teeth above the tau bound") {
  // Inflating L_n far past the bound must break some transition.
  const auto g = SpaceGeometry::preset("l3", 2);
  const double etaHat = 1e-3, lambda = 0.1;
  const double bound = exampleTauBound(g, lambda);
  Schedule s = exampleSchedule(lambda, 0.5 * bound, g, etaHat, 64);
  double firstBad = 0.0;
  for (double factor = 1.0; factor < 1e6 && firstBad == 0.0; factor *= 1.5) {
    Schedule inflated = s;
    for (auto& level : inflated.levels) level.lip *= 2.0 * factor;  // tau = factor * bound
    bool bad = false;
    for (std::size_t n = 0; n + 1 < inflated.levels.size(); ++n) {
      try {
        bad = bad || !validateTransition(g, inflated.levels[n], inflated.levels[n + 1], 1.0).ok;
      } catch (const Error&) {
        bad = true;
      }
    }
    if (bad) firstBad = factor;
  }
  CHECK(firstBad > 1.0);
}

TEST_CASE("schedule validation collects problems") {
  const auto h = SpaceGeometry::hilbert(4);
  Schedule s;
  s.etaHat = 1e-3;
  Level a;
  a.set = ConvexSet::subspace({0, 1});
  a.eta = 1e-3;
  a.stability = 2.0;
  a.lhat = 1.0;
  Level b = a;
  b.index = 1;
  b.set = ConvexSet::subspace({2, 3});
  b.stability = 1.0;
  b.eta = 1e-4;
  s.levels = {a, b};
  const auto v = validateSchedule(h, s);
  CHECK_FALSE(v.ok());
  CHECK(v.problems.size() == 2);
  CHECK((codeOf([&] {
           (void)runMultiLevel(h, DataSpace::make(4), DataVector::zeros(4), s, PrimalVector::zeros(4));
         }) == ErrorCode::TransitionInvalid));
}

TEST_CASE("multi-level run on the diagonal decay problem") {
  const DiagonalDecay p;
  const auto h = SpaceGeometry::hilbert(DiagonalDecay::kDim);
  const auto data = DataSpace::make(DiagonalDecay::kDim + 1);
  const Schedule s = p.schedule();
  REQUIRE(validateSchedule(h, s).ok());
  CHECK(*validateSchedule(h, s).finalLevel == 3);

  MultiLevelOptions opt;
  opt.maxIterationsPerLevel = 200000;
  const auto rep = runMultiLevel(h, data, p.data(), s, PrimalVector::zeros(DiagonalDecay::kDim), opt);
  CHECK(rep.success);
  CHECK(rep.perLevel.size() == 4);
  CHECK(rep.finalResidual <= DiagonalDecay::kEtaHat);
  const double direct = (p.model->evaluate(rep.finalIterate) - p.data()).coords().norm();
  CHECK(direct == doctest::Approx(rep.finalResidual).epsilon(1e-12));
  for (const auto& run : rep.perLevel) {
    CHECK((run.report.stopReason == StopReason::DiscrepancyMet));
    CHECK(run.report.monotonicityViolations == 0);
    CHECK(run.report.strictBoundViolations == 0);
    CHECK(*run.startOk);
    CHECK_FALSE(run.handoffProjected);
  }
}

TEST_CASE("a single level reduces to the plain iteration") {
  const DiagonalDecay p;
  const auto h = SpaceGeometry::hilbert(DiagonalDecay::kDim);
  const auto data = DataSpace::make(DiagonalDecay::kDim + 1);
  Schedule s = p.schedule();
  s.levels.erase(s.levels.begin(), s.levels.begin() + 3);
  s.levels[0].index = 0;
  const PrimalVector x0 = PrimalVector::zeros(DiagonalDecay::kDim);
  const auto ml = runMultiLevel(h, data, p.data(), s, x0);
  SolverConfig cfg;
  cfg.eta = s.levels[0].eta;
  cfg.etaHat = 4 * s.levels[0].eta;
  const auto plain = runAlgorithm1(h, s.levels[0].set, *p.model, data,
                                   NoisyData{p.data(), cfg.eta}, x0, cfg, {1.0, 0.0, s.levels[0].stability});
  CHECK(ml.perLevel[0].report.stoppedAtK == plain.stoppedAtK);
  CHECK((ml.finalIterate.coords() - plain.finalIterate.coords()).norm() == 0.0);
}

TEST_CASE("rough start: levels cover a start the final level alone does not") {
  const DiagonalDecay p;
  const auto h = SpaceGeometry::hilbert(DiagonalDecay::kDim);
  const auto data = DataSpace::make(DiagonalDecay::kDim + 1);
  // An (over-)estimate L = 2e-6 makes every radius finite.
  const Schedule s = p.schedule(2e-6);
  REQUIRE(validateSchedule(h, s).ok());
  MultiLevelOptions opt;
  opt.runDirectFinal = true;
  opt.maxIterationsPerLevel = 200000;
  const auto rep = runMultiLevel(h, data, p.data(), s, PrimalVector::zeros(DiagonalDecay::kDim), opt);
  CHECK(rep.success);
  for (const auto& run : rep.perLevel) {
    REQUIRE(run.rho.has_value());
    CHECK(*run.startOk);
  }
  REQUIRE(rep.directCovered.has_value());
  CHECK_FALSE(*rep.directCovered);
  CHECK(*rep.directStartBregman > *rep.perLevel.back().rho);
}

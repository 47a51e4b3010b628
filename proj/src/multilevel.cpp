#include "projsd/multilevel.hpp"

#include "projsd/error.hpp"

#include <cmath>
#include <limits>

namespace projsd {

double Level::ctilde(const SpaceGeometry& space) const {
  return computeCtilde(space, lip, stability);
}

std::optional<double> Level::rho(const SpaceGeometry& space) const {
  const double ct = ctilde(space);
  if (ct == 0.0) return std::nullopt;
  const double level = levelConvergenceRadius(space, lhat, ct, eta);
  const double global = convergenceRadius(space, lhat, ct, eta);
  if (std::abs(level - global) > 1e-12 * std::max(level, global)) {
    throw Error(ErrorCode::NonConvergence, "the two radius formulas disagree at level " +
                                               std::to_string(index));
  }
  return level;
}

TransitionCheck validateTransition(const SpaceGeometry& space, const Level& level,
                                   const Level& next, double epsilon) {
  TransitionCheck out;
  out.from = level.index;
  out.lhs = (3.0 + epsilon) * level.eta;
  const double ct = next.ctilde(space);
  if (ct == 0.0) {
    out.rhs = std::numeric_limits<double>::infinity();
  } else {
    if (!(8.0 * ct * next.eta < 1.0)) {
      throw Error(ErrorCode::EtaTooLarge, "8 C~ eta >= 1 at level " + std::to_string(next.index));
    }
    const double p = space.p();
    const double bracket = (1.0 + std::sqrt(1.0 - 8.0 * ct * next.eta)) / (2.0 * ct) -
                           2.0 * next.eta;
    out.rhs = std::pow(space.cp() / p, 1.0 / p) / (next.lhat * next.stability) * bracket -
              next.eta;
  }
  out.ok = out.lhs < out.rhs;
  return out;
}

std::size_t selectFinalLevel(const std::vector<double>& etas, double epsilon, double etaHat) {
  for (std::size_t n = 0; n < etas.size(); ++n) {
    if ((3.0 + epsilon) * etas[n] <= etaHat) return n;
  }
  throw Error(ErrorCode::NoSuchLevel, "no level reaches (3+eps) eta_N <= etaHat");
}

ScheduleValidation validateSchedule(const SpaceGeometry& space, const Schedule& schedule) {
  ScheduleValidation v;
  const auto& lv = schedule.levels;
  if (lv.empty()) {
    v.problems.emplace_back("schedule has no levels");
    return v;
  }
  if (!(schedule.epsilon > 0.0)) v.problems.emplace_back("epsilon must be positive");
  if (!(schedule.etaHat > 0.0)) v.problems.emplace_back("etaHat must be positive");

  std::vector<double> etas;
  for (std::size_t n = 0; n < lv.size(); ++n) {
    etas.push_back(lv[n].eta);
    const std::string at = "level " + std::to_string(n) + ": ";
    if (!(lv[n].eta >= 0.0)) v.problems.push_back(at + "eta must be nonnegative");
    if (!(lv[n].stability > 0.0) || !(lv[n].lhat > 0.0) || !(lv[n].lip >= 0.0)) {
      v.problems.push_back(at + "constants C, lhat must be positive and L nonnegative");
    }
    if (n == 0) continue;
    if (!isNestedIn(space, lv[n - 1].set, lv[n].set)) {
      v.problems.push_back(at + "Z_" + std::to_string(n - 1) + " is not contained in Z_" +
                           std::to_string(n) + " (the sets must be nested)");
    }
    if (lv[n - 1].stability > lv[n].stability) {
      v.problems.push_back(at + "C_n must be nondecreasing");
    }
    if (lv[n - 1].eta < lv[n].eta) v.problems.push_back(at + "eta_n must be nonincreasing");
  }
  try {
    v.finalLevel = selectFinalLevel(etas, schedule.epsilon, schedule.etaHat);
    if (*v.finalLevel + 1 != lv.size()) {
      v.problems.push_back("level " + std::to_string(*v.finalLevel) +
                           " already meets (3+eps) eta_N <= etaHat; later levels are unused");
    }
  } catch (const Error& e) {
    v.problems.emplace_back(e.what());
  }
  for (std::size_t n = 0; n + 1 < lv.size(); ++n) {
    try {
      v.transitions.push_back(validateTransition(space, lv[n], lv[n + 1], schedule.epsilon));
      if (!v.transitions.back().ok) {
        v.problems.push_back("transition " + std::to_string(n) + " -> " + std::to_string(n + 1) +
                             " violates the level coupling inequality");
      }
    } catch (const Error& e) {
      v.problems.emplace_back(e.what());
    }
  }
  return v;
}

MultiLevelReport runMultiLevel(const SpaceGeometry& space, const DataSpace& data,
                               const DataVector& ydelta, const Schedule& schedule,
                               const PrimalVector& x00, const MultiLevelOptions& options) {
  const ScheduleValidation validation = validateSchedule(space, schedule);
  if (!validation.ok()) {
    std::string msg = "schedule failed validation:";
    for (const auto& p : validation.problems) msg += "\n  " + p;
    throw Error(ErrorCode::TransitionInvalid, msg);
  }
  for (const auto& level : schedule.levels) {
    if (!level.model) {
      throw Error(ErrorCode::InvalidArgument,
                  "level " + std::to_string(level.index) + " has no forward model");
    }
  }

  const auto levelConfig = [&](const Level& level, bool last) {
    SolverConfig cfg;
    cfg.eta = level.eta;
    cfg.etaHat = (3.0 + schedule.epsilon) * level.eta;
    // A zero-error final level would never meet a zero threshold.
    if (last && cfg.etaHat == 0.0) cfg.etaHat = schedule.etaHat;
    cfg.maxIterations = options.maxIterationsPerLevel;
    cfg.diagnosticReference = level.reference;
    return cfg;
  };
  const auto constantsOf = [](const Level& level) {
    return ModelConstants{level.lhat, level.lip, level.stability};
  };

  MultiLevelReport out;
  PrimalVector x = x00;
  const std::size_t last = schedule.levels.size() - 1;
  for (std::size_t n = 0; n <= last; ++n) {
    const Level& level = schedule.levels[n];
    LevelRun run;
    run.n = n;
    if (n > 0 && !contains(space, level.set, x, 1e-12)) {
      x = bregmanProject(space, level.set, x);
      run.handoffProjected = true;
    }
    run.rho = level.rho(space);
    if (level.reference) {
      run.startBregman = bregmanDistance(space, x, *level.reference);
      run.startOk = !run.rho || *run.startBregman < *run.rho;
    }
    const SolverConfig cfg = levelConfig(level, n == last);
    run.threshold = cfg.etaHat;
    run.report = runAlgorithm1(space, level.set, *level.model, data, NoisyData{ydelta, level.eta},
                               x, cfg, constantsOf(level));
    x = run.report.finalIterate;
    out.stopReason = run.report.stopReason;
    out.finalResidual = run.report.finalResidual;
    const bool stopped = run.report.stopReason == StopReason::DiscrepancyMet;
    out.perLevel.push_back(std::move(run));
    if (!stopped) break;
  }
  out.finalIterate = x;
  out.success = out.stopReason == StopReason::DiscrepancyMet &&
                out.perLevel.size() == schedule.levels.size() &&
                out.finalResidual <= schedule.etaHat;

  if (options.runDirectFinal) {
    const Level& level = schedule.levels[last];
    const std::optional<double> rho = level.rho(space);
    if (level.reference) {
      out.directStartBregman = bregmanDistance(space, x00, *level.reference);
      out.directCovered = !rho || *out.directStartBregman < *rho;
    }
    out.direct = runAlgorithm1(space, level.set, *level.model, data, NoisyData{ydelta, level.eta},
                               x00, levelConfig(level, true), constantsOf(level));
  }
  return out;
}

double exampleTauBound(const SpaceGeometry& space, double lambda) {
  return std::pow(space.cp() / space.p(), 3.0 / space.p()) /
         (16.0 * lambda * (4.0 * std::exp(1.0) + 1.0));
}

Schedule exampleSchedule(double lambda, double tau, const SpaceGeometry& space, double etaHat,
                         std::size_t maxLevels, bool allowSmallLambda) {
  if (!(etaHat > 0.0)) throw Error(ErrorCode::InvalidArgument, "etaHat must be positive");
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be positive");
  if (lambda < 100.0 * etaHat && !allowSmallLambda) {
    throw Error(ErrorCode::LambdaTooSmall, "lambda must be at least 100 etaHat");
  }
  const double bound = exampleTauBound(space, lambda);
  if (!(tau > 0.0 && tau < bound)) {
    throw Error(ErrorCode::TauOutOfRange, "tau must lie in (0, " + std::to_string(bound) + ")");
  }
  Schedule s;
  s.epsilon = 1.0;
  s.etaHat = etaHat;
  for (std::size_t n = 0; n < maxLevels; ++n) {
    const double a = static_cast<double>(n);
    Level level;
    level.index = n;
    level.eta = lambda * std::exp(-a) / (a + 2.0);
    level.stability = 2.0 * std::exp(a);
    level.lhat = (a + 1.0) * std::exp(-a);
    level.lip = tau * std::exp(-a);
    s.levels.push_back(std::move(level));
    if ((3.0 + s.epsilon) * s.levels.back().eta <= etaHat) return s;
  }
  throw Error(ErrorCode::NoSuchLevel, "no level within maxLevels reaches 4 eta_N <= etaHat");
}

}  // namespace projsd

#include "projsd/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace projsd {

namespace {

// Tolerances of the per-iteration theorem checks.
constexpr double kBoundTol = 1e-10;
constexpr double kSummabilityTol = 1e-8;
constexpr double kSelfCheckTol = 1e-9;

/// prod_i base_i^exp_i, falling back to logarithms when the direct product
/// over- or underflows. All bases must be positive.
double powerProduct(std::initializer_list<std::pair<double, double>> factors) {
  double direct = 1.0;
  double logSum = 0.0;
  for (const auto& [base, e] : factors) {
    direct *= std::pow(base, e);
    logSum += e * std::log(base);
  }
  if (std::isfinite(direct) && direct != 0.0) return direct;
  return std::exp(logSum);
}

double relDiff(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(eta >= 0.0) || !std::isfinite(eta)) {
    throw Error(ErrorCode::InvalidArgument, "eta must be a nonnegative finite number");
  }
  if (!(etaHat > 3.0 * eta) || !std::isfinite(etaHat) || !(etaHat > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "etaHat must satisfy etaHat > 3 eta (and be positive)");
  }
  if (maxIterations < 1) throw Error(ErrorCode::InvalidArgument, "maxIterations must be >= 1");
}

double computeCtilde(const SpaceGeometry& space, double lip, double stability) {
  if (!(lip >= 0.0) || !(stability >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "Lipschitz and stability constants must be nonnegative");
  }
  const double p = space.p();
  return 0.5 * std::pow(space.cp() / p, -2.0 / p) * lip * stability * stability;
}

namespace {

void requireRadiusDomain(double ctilde, double eta) {
  if (ctilde == 0.0) {
    throw Error(ErrorCode::LinearCaseUnbounded, "C~ = 0: the convergence radius is infinite");
  }
  if (!(8.0 * ctilde * eta < 1.0)) {
    throw Error(ErrorCode::EtaTooLarge, "8 C~ eta >= 1");
  }
}

}  // namespace

double convergenceRadius(const SpaceGeometry& space, double lhat, double ctilde, double eta) {
  requireRadiusDomain(ctilde, eta);
  const double p = space.p();
  const double bracket = 1.0 + std::sqrt(1.0 - 8.0 * ctilde * eta) - 4.0 * eta * ctilde;
  return space.cp() / p * std::pow(2.0 * ctilde * lhat, -p) * std::pow(bracket, p);
}

double levelConvergenceRadius(const SpaceGeometry& space, double lhat, double ctilde, double eta) {
  requireRadiusDomain(ctilde, eta);
  const double p = space.p();
  const double bracket = (1.0 + std::sqrt(1.0 - 8.0 * ctilde * eta)) / (2.0 * ctilde) - 2.0 * eta;
  return space.cp() / p * std::pow(lhat, -p) * std::pow(bracket, p);
}

double landweberRadius(const SpaceGeometry& space, double lhat, double lip, double stability) {
  const double p = space.p();
  const double prod = lhat * lip * stability * stability / 2.0;
  if (!(prod > 0.0)) {
    throw Error(ErrorCode::LinearCaseUnbounded, "L = 0: the convergence radius is infinite");
  }
  return std::pow(space.cp() / p, 3.0) * std::pow(prod, -p);
}

double residualCeiling(double ctilde, double eta) {
  if (ctilde == 0.0) return std::numeric_limits<double>::infinity();
  return (1.0 + std::sqrt(std::max(0.0, 1.0 - 8.0 * ctilde * eta))) / (2.0 * ctilde) - eta;
}

double computeU(double r, double ctilde, double eta) {
  const double disc = 1.0 - 8.0 * ctilde * eta;
  if (ctilde == 0.0 || disc < 0.0) {
    return -ctilde * r * r + (1.0 - 2.0 * ctilde * eta) * r - eta - ctilde * eta * eta;
  }
  const double s = std::sqrt(disc);
  // Small root written without the 1 - sqrt cancellation.
  const double a = 4.0 * eta / (1.0 + s) - eta;
  const double b = (1.0 + s) / (2.0 * ctilde) - eta;
  return -ctilde * (r - a) * (r - b);
}

StepQuantities stepQuantities(const SpaceGeometry& space, double r, double t, double ctilde,
                              double lip, double eta) {
  if (!(t > 0.0)) {
    throw Error(ErrorCode::ZeroGradient, "t_k = 0 while the residual is above the threshold");
  }
  const double p = space.p();
  const double q = space.q();
  const double e = p - 1.0;  // 1/(q-1)
  StepQuantities s;
  s.u = computeU(r, ctilde, eta);
  if (!(s.u > 0.0)) {
    throw Error(ErrorCode::NonpositiveU,
                "u_k <= 0: the start is outside the convergence radius or eta is too large");
  }
  s.tHat = space.gq() * std::pow(t, q);

  const double pref = powerProduct({{s.tHat, -e}, {s.u, e}, {r, p * p - p}});
  const double fullPower = powerProduct({{s.tHat, -e}, {s.u, p}, {r, p * p - p}});
  s.v = pref * (r - eta) - fullPower / q;
  s.w = lip / 2.0 * std::pow(space.cp() / p, -2.0 / p) * pref;
  s.mu = powerProduct({{s.tHat, -e}, {s.u, e}, {r, e * e}});
  s.descent = fullPower / p;

  const double check1 = relDiff(s.mu * std::pow(r, p - 1.0), pref);
  const double check2 =
      relDiff(space.gq() / q * std::pow(s.mu, q) * std::pow(t, q), fullPower / q);
  s.selfCheckError = std::max(check1, check2);
  return s;
}

StepResult sdStep(const SpaceGeometry& space, const ConvexSet& set, const PrimalVector& x,
                  const DualVector& gradient, double mu) {
  if (!(mu > 0.0)) throw Error(ErrorCode::InvalidArgument, "step size must be positive");
  StepResult out;
  out.xTilde = inverseDualityMap(space, dualityMap(space, x) - mu * gradient);
  out.next = bregmanProject(space, set, out.xTilde);
  return out;
}

std::string toString(StopReason reason) {
  switch (reason) {
    case StopReason::DiscrepancyMet: return "DiscrepancyMet";
    case StopReason::MaxIterations: return "MaxIterations";
    case StopReason::StepDegenerate: return "StepDegenerate";
  }
  return "Unknown";
}

RunReport runAlgorithm1(const SpaceGeometry& space, const ConvexSet& set,
                        const ForwardModel& model, const DataSpace& data, const NoisyData& noisy,
                        const PrimalVector& x0, const SolverConfig& config,
                        const ModelConstants& constants) {
  config.validate();
  set.checkCompatible(space);
  if (model.inputDim() != space.dim() || model.outputDim() != data.dim() ||
      noisy.ydelta.size() != data.dim() || x0.size() != space.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "model, data and starting point disagree in size");
  }
  const std::optional<PrimalVector>& ref = config.diagnosticReference;
  if (ref && ref->size() != space.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "reference solution dimension");
  }

  RunReport report;
  report.ctilde = computeCtilde(space, constants.lip, constants.stability);
  try {
    report.rho = convergenceRadius(space, constants.lhat, report.ctilde, config.eta);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::LinearCaseUnbounded) report.radiusUnbounded = true;
  }
  const double ceiling = residualCeiling(report.ctilde, config.eta);
  const double p = space.p();

  PrimalVector x = x0;
  if (!contains(space, set, x, 1e-12)) {
    x = bregmanProject(space, set, x);
    report.projectedStart = true;
  }
  report.checked = ref.has_value();
  if (ref) report.initialBregman = bregmanDistance(space, x, *ref);

  for (std::size_t k = 0;; ++k) {
    IterationState st;
    st.k = k;
    st.x = x;
    st.ctildeUsed = report.ctilde;
    st.residual = model.evaluate(x) - noisy.ydelta;
    st.r = dataNorm(data, st.residual);
    st.gradient = model.applyAdjoint(x, dataDualityMap(data, p, st.residual));
    st.t = dualNorm(space, st.gradient);
    double dk = 0.0;
    if (ref) {
      dk = bregmanDistance(space, x, *ref);
      st.bregmanToRef = dk;
      if (report.radiusUnbounded || report.rho) {
        st.radiusOk = report.radiusUnbounded || dk < *report.rho;
        if (!*st.radiusOk) ++report.radiusViolations;
      }
    }

    const auto finish = [&](StopReason why) {
      report.stopReason = why;
      report.stoppedAtK = k;
      report.finalResidual = st.r;
      report.finalIterate = x;
      report.perIteration.push_back(std::move(st));
    };

    if (st.r <= config.etaHat) {
      finish(StopReason::DiscrepancyMet);
      break;
    }
    if (k >= config.maxIterations) {
      finish(StopReason::MaxIterations);
      break;
    }
    if (report.ctilde > 0.0 && !(st.r < ceiling)) ++report.ceilingViolations;

    StepResult step;
    try {
      st.step = stepQuantities(space, st.r, st.t, report.ctilde, constants.lip, config.eta);
      step = sdStep(space, set, x, st.gradient, st.step->mu);
    } catch (const Error& e) {
      report.error = e.code();
      report.errorMessage = e.what();
      finish(StopReason::StepDegenerate);
      break;
    }
    const StepQuantities& sq = *st.step;
    if (sq.selfCheckError > kSelfCheckTol) ++report.selfCheckFailures;

    if (ref) {
      const double dNext = bregmanDistance(space, step.next, *ref);
      const double slack = sq.w * std::pow(dk, 2.0 / p) - sq.v;
      if (dNext > dk + slack + kBoundTol || dNext > dk + kBoundTol) {
        ++report.monotonicityViolations;
      }
      if (slack > -sq.descent + kBoundTol || !(sq.descent > 0.0)) {
        ++report.strictBoundViolations;
      }
      report.descentSum += sq.descent;
    }
    report.perIteration.push_back(std::move(st));
    x = std::move(step.next);
  }
  if (ref) report.summabilityOk = report.descentSum <= report.initialBregman + kSummabilityTol;
  return report;
}

bool checkStartingPoint(const SpaceGeometry& space, const PrimalVector& x0,
                        const PrimalVector& zdag, double rho) {
  return bregmanDistance(space, x0, zdag) < rho;
}

SpaceConstantCertificate certifySpaceConstants(const SpaceGeometry& space, std::size_t nSamples,
                                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> scalePick(-3, 3);
  const auto n = static_cast<Eigen::Index>(space.dim());
  const auto draw = [&]() {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = gauss(rng);
    return Eigen::VectorXd(std::pow(10.0, scalePick(rng)) * v);
  };
  const double p = space.p();
  const double q = space.q();
  // Relative slack for rounding in the Bregman formula; pairs closer than
  // 1e-3 relative are skipped since cancellation would dominate the ratio.
  constexpr double kRel = 1e-9;

  SpaceConstantCertificate cert;
  cert.cpRatioMin = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < nSamples; ++s) {
    const PrimalVector x(draw());
    // Alternate far pairs with close pairs, where the comparison is tightest.
    const PrimalVector xt = (s % 2 == 0) ? PrimalVector(draw())
                                         : PrimalVector(x.coords() + 1e-2 * draw());
    const double dn = norm(space, x - xt);
    if (dn <= 1e-3 * std::max(norm(space, x), norm(space, xt))) continue;
    const double cpRatio = bregmanDistance(space, x, xt) / (std::pow(dn, p) / p);
    cert.cpRatioMin = std::min(cert.cpRatioMin, cpRatio);
    if (cpRatio < space.cp() * (1.0 - kRel)) ++cert.cpViolations;

    const DualVector xs(draw());
    const DualVector xts = (s % 2 == 0) ? DualVector(draw()) : DualVector(xs.coords() + 1e-2 * draw());
    const double dd = dualNorm(space, xs - xts);
    if (dd <= 1e-3 * std::max(dualNorm(space, xs), dualNorm(space, xts))) continue;
    const double gqRatio = dualBregmanDistance(space, xs, xts) / (std::pow(dd, q) / q);
    cert.gqRatioMax = std::max(cert.gqRatioMax, gqRatio);
    if (gqRatio > space.gq() * (1.0 + kRel)) ++cert.gqViolations;
  }
  return cert;
}

}  // namespace projsd

#include "projsd/runner.hpp"

#include "projsd/error.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <unistd.h>

namespace projsd {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

Eigen::VectorXd toEigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::MatrixXd matrixOf(const ModelSpec& spec, const std::string& baseDir) {
  if (!spec.matrixFile.empty()) {
    const fs::path p(spec.matrixFile);
    return readCsvMatrix(p.is_absolute() ? p.string() : (fs::path(baseDir) / p).string());
  }
  Eigen::MatrixXd a(static_cast<Eigen::Index>(spec.matrix.size()),
                    static_cast<Eigen::Index>(spec.matrix.front().size()));
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = spec.matrix[i][j];
  }
  return a;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return nullptr;
  return x > 0 ? "inf" : "-inf";
}

template <class T>
json optNumber(const std::optional<T>& v) {
  return v ? number(static_cast<double>(*v)) : json(nullptr);
}

int exitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io: return kExitIo;
    case ErrorCode::NonConvergence:
    case ErrorCode::NonpositiveU:
    case ErrorCode::ZeroGradient: return kExitSolverAbort;
    default: return kExitInvalid;
  }
}

/// Everything a run needs, built from the config.
struct Problem {
  SpaceGeometry space = SpaceGeometry::hilbert(1);
  DataSpace data = DataSpace::make(1);
  std::shared_ptr<const ForwardModel> model;
  DataVector ydelta;
  PrimalVector x0;
};

Problem buildProblem(const RunConfig& c) {
  Problem pr;
  pr.space = buildSpace(c.space);
  pr.model = buildModel(*c.model, c.space.dim, c.baseDir);
  pr.data = DataSpace::make(pr.model->outputDim(), c.s);
  if (c.ydelta.size() != pr.model->outputDim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "data.ydelta has " + std::to_string(c.ydelta.size()) + " entries, the model " +
                    std::to_string(pr.model->outputDim()) + " outputs");
  }
  pr.ydelta = DataVector(toEigen(c.ydelta));
  pr.x0 = c.x0.empty() ? PrimalVector::zeros(c.space.dim) : PrimalVector(toEigen(c.x0));
  return pr;
}

const DiagonalModel* asExactDiagonal(const Problem& pr) {
  if (pr.data.s() != 2.0) return nullptr;
  return dynamic_cast<const DiagonalModel*>(pr.model.get());
}

bool closedFormSet(const ConvexSet& set) {
  return std::holds_alternative<WholeSpace>(set.variant()) ||
         std::holds_alternative<CoordinateSubspace>(set.variant());
}

/// eta, constants and reference of one level (or of the single run).
struct Resolved {
  double eta = 0.0;
  bool etaCertified = false;
  ModelConstants constants;
  std::optional<PrimalVector> reference;
};

Resolved resolve(const Problem& pr, const ConvexSet& set, const std::optional<double>& eta,
                 const std::optional<double>& lhat, const std::optional<double>& lip,
                 const std::optional<double>& stability, const std::vector<double>& reference,
                 bool wantReference, const std::string& where) {
  Resolved out;
  const DiagonalModel* diag = asExactDiagonal(pr);
  if (eta) {
    out.eta = *eta;
  } else if (diag && closedFormSet(set)) {
    out.eta = diag->approximationError(pr.data, pr.ydelta, set);
    out.etaCertified = true;
  } else {
    throw Error(ErrorCode::InvalidArgument,
                where + ": eta is required (it is computed only for diagonal models on subspaces)");
  }
  const LipschitzConstants lc = pr.model->lipschitz(pr.space, pr.data);
  out.constants.lhat = lhat.value_or(lc.lhat);
  out.constants.lip = lip.value_or(lc.lip);
  if (stability) {
    out.constants.stability = *stability;
  } else if (auto c = pr.model->stabilityConstant(pr.space, pr.data, set)) {
    out.constants.stability = *c;
  } else if (out.constants.lip == 0.0) {
    out.constants.stability = 0.0;  // does not enter C~ when L = 0
  } else {
    throw Error(ErrorCode::InvalidArgument,
                where + ": no stability constant is known for this model and set; supply one");
  }
  if (!reference.empty()) {
    out.reference = PrimalVector(toEigen(reference));
  } else if (wantReference && diag && closedFormSet(set)) {
    out.reference = diag->bestApproximation(pr.ydelta, set);
  }
  return out;
}

json tallies(const RunReport& r) {
  json t;
  t["enabled"] = r.checked;
  t["monotonicityViolations"] = r.monotonicityViolations;
  t["strictBoundViolations"] = r.strictBoundViolations;
  t["radiusViolations"] = r.radiusViolations;
  t["ceilingViolations"] = r.ceilingViolations;
  t["selfCheckFailures"] = r.selfCheckFailures;
  t["descentSum"] = number(r.descentSum);
  t["initialBregman"] = number(r.initialBregman);
  t["summabilityOk"] = r.summabilityOk;
  return t;
}

json runJson(const RunReport& r) {
  json j;
  j["stopReason"] = toString(r.stopReason);
  j["K"] = r.stoppedAtK;
  j["finalResidual"] = number(r.finalResidual);
  j["ctilde"] = number(r.ctilde);
  j["rho"] = r.radiusUnbounded ? json("inf") : optNumber(r.rho);
  j["projectedStart"] = r.projectedStart;
  if (r.error) {
    j["error"] = std::string(toString(*r.error));
    j["errorMessage"] = r.errorMessage;
  }
  j["theoremChecks"] = tallies(r);
  j["finalIterate"] = std::vector<double>(r.finalIterate.coords().data(),
                                          r.finalIterate.coords().data() + r.finalIterate.size());
  return j;
}

json probeModel(const Problem& pr, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  double fdMax = 0.0;
  double adjMax = 0.0;
  const auto n = static_cast<Eigen::Index>(pr.space.dim());
  const auto m = static_cast<Eigen::Index>(pr.data.dim());
  for (int i = 0; i < 8; ++i) {
    Eigen::VectorXd h(n), ys(m), dx(n);
    for (Eigen::Index k = 0; k < n; ++k) h[k] = g(rng);
    for (Eigen::Index k = 0; k < n; ++k) dx[k] = g(rng);
    for (Eigen::Index k = 0; k < m; ++k) ys[k] = g(rng);
    const PrimalVector x(pr.x0.coords() + 0.1 * dx);
    fdMax = std::max(fdMax, fdDerivativeCheck(*pr.model, pr.data, x, PrimalVector(h), 1e-5));
    adjMax = std::max(adjMax, adjointCheck(*pr.model, x, PrimalVector(h), DataDualVector(ys)));
  }
  return {{"derivativeDefect", number(fdMax)}, {"adjointDefect", number(adjMax)}};
}

/// Rejects non-Hilbert geometries whose Cp/Gq fail sampling.
json certifyGeometry(const SpaceGeometry& space, std::uint64_t seed) {
  if (space.isHilbert()) return {{"exact", true}};
  const SpaceConstantCertificate cert = certifySpaceConstants(space, 4000, seed);
  json j{{"exact", false},
         {"cpRatioMin", number(cert.cpRatioMin)},
         {"gqRatioMax", number(cert.gqRatioMax)},
         {"cpViolations", cert.cpViolations},
         {"gqViolations", cert.gqViolations}};
  if (!cert.ok()) {
    throw Error(ErrorCode::InvalidArgument,
                "sampling contradicts the configured Cp/Gq (min ratio " + fmt(cert.cpRatioMin) +
                    " vs Cp, max dual ratio " + fmt(cert.gqRatioMax) + " vs Gq)");
  }
  return j;
}

Schedule scheduleFromLevels(const RunConfig& c, const Problem* pr) {
  Schedule s;
  s.epsilon = c.multilevel->epsilon;
  s.etaHat = c.solver.etaHat;
  const auto dim = c.space.dim;
  for (std::size_t n = 0; n < c.multilevel->levels.size(); ++n) {
    const LevelSpec& ls = c.multilevel->levels[n];
    Level level;
    level.index = n;
    level.set = buildSet(ls.set, dim);
    const std::string where = "multilevel.levels[" + std::to_string(n) + "]";
    if (pr) {
      const Resolved r = resolve(*pr, level.set, ls.eta, ls.lhat, ls.lip, ls.stability,
                                 ls.reference, c.diagnostics.checkTheorems, where);
      level.model = pr->model;
      level.eta = r.eta;
      level.lhat = r.constants.lhat;
      level.lip = r.constants.lip;
      level.stability = r.constants.stability;
      if (c.diagnostics.checkTheorems) level.reference = r.reference;
    } else {
      if (!ls.eta || !ls.lhat || !ls.lip || !ls.stability) {
        throw Error(ErrorCode::InvalidArgument,
                    where + ": eta, stability, lip and lhat are required without model data");
      }
      level.eta = *ls.eta;
      level.lhat = *ls.lhat;
      level.lip = *ls.lip;
      level.stability = *ls.stability;
      if (!ls.reference.empty()) level.reference = PrimalVector(toEigen(ls.reference));
    }
    s.levels.push_back(std::move(level));
  }
  return s;
}

Schedule scheduleFromExample(const RunConfig& c, const SpaceGeometry& space) {
  const ExampleSpec& ex = *c.example;
  const double tau = ex.tau.value_or(0.5 * exampleTauBound(space, ex.lambda));
  return exampleSchedule(ex.lambda, tau, space, c.solver.etaHat, ex.maxLevels, ex.allowSmallLambda);
}

json levelsJson(const SpaceGeometry& space, const Schedule& s) {
  json arr = json::array();
  for (const auto& l : s.levels) {
    json j{{"n", l.index},         {"eta", number(l.eta)},   {"stability", number(l.stability)},
           {"lip", number(l.lip)}, {"lhat", number(l.lhat)}, {"ctilde", number(l.ctilde(space))}};
    try {
      const auto rho = l.rho(space);
      j["rho"] = rho ? number(*rho) : json("inf");
    } catch (const Error& e) {
      j["rho"] = nullptr;
      j["rhoError"] = e.what();
    }
    arr.push_back(j);
  }
  return arr;
}

json validationJson(const ScheduleValidation& v) {
  json t = json::array();
  for (const auto& tr : v.transitions) {
    t.push_back({{"from", tr.from},
                 {"to", tr.from + 1},
                 {"lhs", number(tr.lhs)},
                 {"rhs", number(tr.rhs)},
                 {"ok", tr.ok}});
  }
  return {{"ok", v.ok()},
          {"transitions", t},
          {"finalLevel", optNumber(v.finalLevel)},
          {"problems", v.problems}};
}

struct Outputs {
  std::string trace;
  json summary = json::object();
};

int runSingle(const RunConfig& c, std::uint64_t seed, Outputs& out) {
  const Problem pr = buildProblem(c);
  out.summary["spaceConstants"] = certifyGeometry(pr.space, seed);
  const ConvexSet set = buildSet(c.set, c.space.dim);
  const Resolved r = resolve(pr, set, c.solver.eta, c.model->lhat, c.model->lip,
                             c.model->stability, c.diagnostics.referenceSolution,
                             c.diagnostics.checkTheorems, "solver");
  SolverConfig cfg;
  cfg.eta = r.eta;
  cfg.etaHat = c.solver.etaHat;
  cfg.maxIterations = c.solver.maxIterations;
  if (c.diagnostics.checkTheorems) cfg.diagnosticReference = r.reference;
  cfg.validate();

  out.summary["eta"] = number(r.eta);
  out.summary["etaProvenance"] = r.etaCertified ? "certified" : "asserted, not certified";
  out.summary["etaHat"] = number(cfg.etaHat);
  out.summary["constants"] = {{"lhat", number(r.constants.lhat)},
                              {"lip", number(r.constants.lip)},
                              {"stability", number(r.constants.stability)}};
  out.summary["probes"] = probeModel(pr, seed);

  const RunReport report = runAlgorithm1(pr.space, set, *pr.model, pr.data,
                                         NoisyData{pr.ydelta, r.eta, r.etaCertified}, pr.x0, cfg,
                                         r.constants);
  out.trace = formatTrace({{0, &report}});
  out.summary["run"] = runJson(report);
  out.summary["stopReason"] = toString(report.stopReason);
  out.summary["finalResidual"] = number(report.finalResidual);
  return report.stopReason == StopReason::DiscrepancyMet ? kExitOk : kExitSolverAbort;
}

int runMulti(const RunConfig& c, std::uint64_t seed, Outputs& out) {
  const Problem pr = buildProblem(c);
  out.summary["spaceConstants"] = certifyGeometry(pr.space, seed);
  out.summary["probes"] = probeModel(pr, seed);
  const Schedule schedule = scheduleFromLevels(c, &pr);
  out.summary["schedule"] = levelsJson(pr.space, schedule);
  const ScheduleValidation v = validateSchedule(pr.space, schedule);
  out.summary["validation"] = validationJson(v);

  MultiLevelOptions opts;
  opts.maxIterationsPerLevel = c.solver.maxIterations;
  opts.runDirectFinal = c.multilevel->runDirect;
  const MultiLevelReport rep = runMultiLevel(pr.space, pr.data, pr.ydelta, schedule, pr.x0, opts);

  std::vector<std::pair<std::size_t, const RunReport*>> runs;
  json levels = json::array();
  for (const auto& lr : rep.perLevel) {
    runs.emplace_back(lr.n, &lr.report);
    json j = runJson(lr.report);
    j["n"] = lr.n;
    j["threshold"] = number(lr.threshold);
    j["handoffProjected"] = lr.handoffProjected;
    j["startBregman"] = optNumber(lr.startBregman);
    j["startOk"] = lr.startOk ? json(*lr.startOk) : json(nullptr);
    levels.push_back(j);
  }
  out.trace = formatTrace(runs);
  out.summary["levels"] = levels;
  out.summary["stopReason"] = toString(rep.stopReason);
  out.summary["finalResidual"] = number(rep.finalResidual);
  out.summary["success"] = rep.success;
  if (rep.direct) {
    json d = runJson(*rep.direct);
    d["covered"] = rep.directCovered ? json(*rep.directCovered) : json(nullptr);
    d["startBregman"] = optNumber(rep.directStartBregman);
    out.summary["directFinalLevel"] = d;
  }
  return rep.success ? kExitOk : kExitSolverAbort;
}

int runValidate(const RunConfig& c, Outputs& out) {
  const SpaceGeometry space = buildSpace(c.space);
  Schedule schedule;
  if (c.multilevel) {
    std::optional<Problem> pr;
    if (c.model && !c.ydelta.empty()) pr = buildProblem(c);
    schedule = scheduleFromLevels(c, pr ? &*pr : nullptr);
  } else {
    schedule = scheduleFromExample(c, space);
  }
  const ScheduleValidation v = validateSchedule(space, schedule);
  out.summary["schedule"] = levelsJson(space, schedule);
  out.summary["validation"] = validationJson(v);
  return v.ok() ? kExitOk : kExitInvalid;
}

int runExampleSchedule(const RunConfig& c, Outputs& out) {
  const SpaceGeometry space = buildSpace(c.space);
  const Schedule schedule = scheduleFromExample(c, space);
  const ScheduleValidation v = validateSchedule(space, schedule);
  out.summary["tau"] =
      number(c.example->tau.value_or(0.5 * exampleTauBound(space, c.example->lambda)));
  out.summary["tauBound"] = number(exampleTauBound(space, c.example->lambda));
  out.summary["schedule"] = levelsJson(space, schedule);
  out.summary["validation"] = validationJson(v);

  RunConfig gen = c;
  gen.mode = "multilevel";
  gen.example.reset();
  gen.output.schedulePath.clear();
  MultilevelSpec ml;
  ml.epsilon = schedule.epsilon;
  for (const auto& l : schedule.levels) {
    LevelSpec ls;
    ls.eta = l.eta;
    ls.stability = l.stability;
    ls.lip = l.lip;
    ls.lhat = l.lhat;
    ml.levels.push_back(ls);
  }
  gen.multilevel = ml;
  writeFileAtomic(c.output.schedulePath, serializeConfig(gen));
  return v.ok() ? kExitOk : kExitInvalid;
}

}  // namespace

SpaceGeometry buildSpace(const SpaceSpec& spec) {
  return SpaceGeometry::make(spec.dim, spec.r, spec.p, spec.cp, spec.gq,
                             spec.weights.empty() ? Eigen::VectorXd() : toEigen(spec.weights));
}

ConvexSet buildSet(const SetSpec& spec, std::size_t dim) {
  if (spec.kind == "box") return ConvexSet::box(toEigen(spec.lower), toEigen(spec.upper));
  if (spec.kind == "ball") return ConvexSet::ball(PrimalVector(toEigen(spec.center)), spec.radius);
  if (spec.kind == "subspace") return ConvexSet::subspace(spec.support);
  if (spec.kind == "whole") return ConvexSet::wholeSpace();
  (void)dim;
  throw Error(ErrorCode::SchemaError, "unknown set kind '" + spec.kind + "'");
}

std::shared_ptr<const ForwardModel> buildModel(const ModelSpec& spec, std::size_t dim,
                                               const std::string& baseDir) {
  if (spec.kind == "diagonal") {
    return std::make_shared<DiagonalModel>(toEigen(spec.sigma), spec.outputDim.value_or(dim));
  }
  const Eigen::MatrixXd a = matrixOf(spec, baseDir);
  if (static_cast<std::size_t>(a.cols()) != dim) {
    throw Error(ErrorCode::DimensionMismatch, "model matrix needs " + std::to_string(dim) + " columns");
  }
  if (spec.kind == "linear") return std::make_shared<LinearModel>(a);
  if (spec.kind == "quadratic") {
    return std::make_shared<QuadraticModel>(a, spec.eps, PrimalVector(toEigen(spec.ballCenter)),
                                            spec.ballRadius);
  }
  throw Error(ErrorCode::SchemaError, "unknown model kind '" + spec.kind + "'");
}

Eigen::MatrixXd readCsvMatrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read matrix file '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw Error(ErrorCode::SchemaError, path + ": row " + std::to_string(rows.size()) +
                                                ": not a number: '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorCode::SchemaError,
                  path + ": row " + std::to_string(rows.size()) + " has a different length");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::SchemaError, path + ": empty matrix file");
  Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = rows[i][j];
  }
  return a;
}

void writeFileAtomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::Io, "write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::Io, "cannot move output into place at '" + path + "'");
  }
}

std::string formatTrace(const std::vector<std::pair<std::size_t, const RunReport*>>& runs) {
  std::string out = "level,k,r_k,t_k,tHat_k,u_k,v_k,w_k,mu_k,bregman_to_ref,radius_ok\n";
  for (const auto& [level, report] : runs) {
    for (const auto& st : report->perIteration) {
      out += std::to_string(level) + ',' + std::to_string(st.k) + ',' + fmt(st.r) + ',' + fmt(st.t);
      if (st.step) {
        const auto& s = *st.step;
        for (double v : {s.tHat, s.u, s.v, s.w, s.mu}) out += ',' + fmt(v);
      } else {
        out += ",,,,,";
      }
      out += ',';
      if (st.bregmanToRef) out += fmt(*st.bregmanToRef);
      out += ',';
      if (st.radiusOk) out += *st.radiusOk ? '1' : '0';
      out += '\n';
    }
  }
  return out;
}

int execute(const RunConfig& config, const ExecuteOptions& options) {
  const std::uint64_t seed = options.seed.value_or(config.solver.seed);
  const std::string tracePath = options.tracePath.value_or(config.output.tracePath);
  const std::string summaryPath = options.summaryPath.value_or(config.output.summaryPath);
  const auto say = [&](const std::string& msg) {
    if (options.log && !options.quiet) *options.log << msg << '\n';
  };

  Outputs out;
  out.summary["mode"] = config.mode;
  out.summary["seed"] = seed;
  int code = kExitOk;
  try {
    if (config.mode == "single") {
      code = runSingle(config, seed, out);
    } else if (config.mode == "multilevel") {
      code = runMulti(config, seed, out);
    } else if (config.mode == "validate") {
      code = runValidate(config, out);
    } else if (config.mode == "example-schedule") {
      code = runExampleSchedule(config, out);
    } else {
      throw Error(ErrorCode::SchemaError, "unknown mode '" + config.mode + "'");
    }
  } catch (const Error& e) {
    code = exitCodeFor(e.code());
    out.summary["error"] = std::string(toString(e.code()));
    out.summary["errorMessage"] = e.what();
    if (options.log) *options.log << "error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    code = kExitSolverAbort;
    out.summary["error"] = "Internal";
    out.summary["errorMessage"] = e.what();
    if (options.log) *options.log << "error: " << e.what() << '\n';
  }
  out.summary["exitCode"] = code;
  if (out.summary.contains("stopReason")) {
    say("stop: " + out.summary["stopReason"].get<std::string>() +
        ", final residual " + out.summary["finalResidual"].dump());
  }

  try {
    if (!tracePath.empty() && !out.trace.empty()) writeFileAtomic(tracePath, out.trace);
    if (!summaryPath.empty()) writeFileAtomic(summaryPath, out.summary.dump(2) + "\n");
  } catch (const Error& e) {
    if (options.log) *options.log << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return code;
}

}  // namespace projsd

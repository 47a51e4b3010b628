#include "projsd/config.hpp"

#include "projsd/error.hpp"
#include "projsd/runner.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <filesystem>
#include <limits>
#include <set>
#include <sstream>

namespace projsd {

using nlohmann::json;

namespace {

struct Ctx {
  std::vector<std::string> errors;
  void add(const std::string& path, const std::string& msg) { errors.push_back(path + ": " + msg); }
};

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

/// True when `obj` is an object; unknown keys are reported.
bool checkObject(Ctx& ctx, const json& obj, const std::string& path,
                 std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) {
    ctx.add(path.empty() ? "<root>" : path, "expected an object");
    return false;
  }
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      ctx.add(join(path, key), "unknown key");
    }
  }
  return true;
}

const json* child(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

std::optional<double> asNumber(const json& v, bool allowInf) {
  if (v.is_number()) return v.get<double>();
  if (allowInf && v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  return std::nullopt;
}

std::optional<double> readNumber(Ctx& ctx, const json& obj, const std::string& path,
                                 const char* key) {
  const json* v = child(obj, key);
  if (!v) return std::nullopt;
  auto x = asNumber(*v, false);
  if (!x) ctx.add(join(path, key), "expected a number");
  return x;
}

std::optional<std::size_t> readCount(Ctx& ctx, const json& obj, const std::string& path,
                                     const char* key) {
  const json* v = child(obj, key);
  if (!v) return std::nullopt;
  if (!v->is_number_unsigned()) {
    ctx.add(join(path, key), "expected a nonnegative integer");
    return std::nullopt;
  }
  return v->get<std::size_t>();
}

std::optional<bool> readBool(Ctx& ctx, const json& obj, const std::string& path, const char* key) {
  const json* v = child(obj, key);
  if (!v) return std::nullopt;
  if (!v->is_boolean()) {
    ctx.add(join(path, key), "expected true or false");
    return std::nullopt;
  }
  return v->get<bool>();
}

std::optional<std::string> readString(Ctx& ctx, const json& obj, const std::string& path,
                                      const char* key) {
  const json* v = child(obj, key);
  if (!v) return std::nullopt;
  if (!v->is_string()) {
    ctx.add(join(path, key), "expected a string");
    return std::nullopt;
  }
  return v->get<std::string>();
}

std::optional<std::vector<double>> readNumbers(Ctx& ctx, const json& obj, const std::string& path,
                                               const char* key, bool allowInf = false) {
  const json* v = child(obj, key);
  if (!v) return std::nullopt;
  const std::string p = join(path, key);
  if (!v->is_array()) {
    ctx.add(p, "expected an array of numbers");
    return std::nullopt;
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < v->size(); ++i) {
    auto x = asNumber((*v)[i], allowInf);
    if (!x) {
      ctx.add(p + "[" + std::to_string(i) + "]", allowInf ? "expected a number, \"inf\" or \"-inf\""
                                                          : "expected a number");
      return std::nullopt;
    }
    out.push_back(*x);
  }
  return out;
}

void requireLength(Ctx& ctx, const std::string& path, const std::vector<double>& v,
                   std::size_t n) {
  if (v.size() != n) {
    ctx.add(path, "expected " + std::to_string(n) + " entries, got " + std::to_string(v.size()));
  }
}

void requirePositive(Ctx& ctx, const std::string& path, const std::optional<double>& v) {
  if (v && !(*v > 0.0 && std::isfinite(*v))) ctx.add(path, "must be positive and finite");
}

void requireNonnegative(Ctx& ctx, const std::string& path, const std::optional<double>& v) {
  if (v && !(*v >= 0.0 && std::isfinite(*v))) ctx.add(path, "must be nonnegative and finite");
}

SetSpec parseSet(Ctx& ctx, const json& obj, const std::string& path, std::size_t dim) {
  SetSpec s;
  if (!checkObject(ctx, obj, path, {"kind", "lower", "upper", "center", "radius", "support"})) {
    return s;
  }
  s.kind = readString(ctx, obj, path, "kind").value_or("whole");
  const auto lower = readNumbers(ctx, obj, path, "lower", true);
  const auto upper = readNumbers(ctx, obj, path, "upper", true);
  const auto center = readNumbers(ctx, obj, path, "center");
  const auto radius = readNumber(ctx, obj, path, "radius");
  const json* support = child(obj, "support");
  const auto forbid = [&](bool present, const char* key) {
    if (present) ctx.add(join(path, key), "not used by a '" + s.kind + "' set");
  };
  if (s.kind == "whole") {
    forbid(lower.has_value(), "lower");
    forbid(upper.has_value(), "upper");
    forbid(center.has_value(), "center");
    forbid(radius.has_value(), "radius");
    forbid(support != nullptr, "support");
  } else if (s.kind == "box") {
    if (!lower || !upper) {
      ctx.add(path, "a box needs both 'lower' and 'upper'");
    } else {
      s.lower = *lower;
      s.upper = *upper;
      requireLength(ctx, join(path, "lower"), s.lower, dim);
      requireLength(ctx, join(path, "upper"), s.upper, dim);
      for (std::size_t i = 0; i < std::min(s.lower.size(), s.upper.size()); ++i) {
        if (!(s.lower[i] <= s.upper[i]) || s.lower[i] == std::numeric_limits<double>::infinity() ||
            s.upper[i] == -std::numeric_limits<double>::infinity()) {
          ctx.add(join(path, "lower") + "[" + std::to_string(i) + "]",
                  "lower bound must not exceed the upper bound");
        }
      }
    }
    forbid(center.has_value(), "center");
    forbid(radius.has_value(), "radius");
    forbid(support != nullptr, "support");
  } else if (s.kind == "ball") {
    s.center = center.value_or(std::vector<double>(dim, 0.0));
    requireLength(ctx, join(path, "center"), s.center, dim);
    if (!radius) {
      ctx.add(join(path, "radius"), "required for a ball");
    } else {
      s.radius = *radius;
      requirePositive(ctx, join(path, "radius"), radius);
    }
    forbid(lower.has_value(), "lower");
    forbid(upper.has_value(), "upper");
    forbid(support != nullptr, "support");
  } else if (s.kind == "subspace") {
    if (!support || !support->is_array()) {
      ctx.add(join(path, "support"), "required array of coordinate indices");
    } else {
      for (std::size_t i = 0; i < support->size(); ++i) {
        const json& e = (*support)[i];
        if (!e.is_number_unsigned() || e.get<std::size_t>() >= dim) {
          ctx.add(join(path, "support") + "[" + std::to_string(i) + "]",
                  "expected an index below " + std::to_string(dim));
          continue;
        }
        s.support.push_back(e.get<std::size_t>());
      }
      std::sort(s.support.begin(), s.support.end());
      s.support.erase(std::unique(s.support.begin(), s.support.end()), s.support.end());
      if (s.support.empty()) ctx.add(join(path, "support"), "must not be empty");
    }
    forbid(lower.has_value(), "lower");
    forbid(upper.has_value(), "upper");
    forbid(center.has_value(), "center");
    forbid(radius.has_value(), "radius");
  } else {
    ctx.add(join(path, "kind"), "expected one of whole, box, ball, subspace");
  }
  return s;
}

std::vector<std::vector<double>> parseMatrix(Ctx& ctx, const json& v, const std::string& path) {
  std::vector<std::vector<double>> rows;
  if (!v.is_array() || v.empty()) {
    ctx.add(path, "expected a nonempty array of rows");
    return rows;
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string rp = path + "[" + std::to_string(i) + "]";
    if (!v[i].is_array()) {
      ctx.add(rp, "expected an array of numbers");
      continue;
    }
    std::vector<double> row;
    for (const auto& e : v[i]) {
      if (!e.is_number()) {
        ctx.add(rp, "expected numbers only");
        break;
      }
      row.push_back(e.get<double>());
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      ctx.add(rp, "row length differs from row 0");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

ModelSpec parseModel(Ctx& ctx, const json& obj, std::size_t dim) {
  const std::string path = "model";
  ModelSpec m;
  if (!checkObject(ctx, obj, path,
                   {"kind", "matrix", "matrixFile", "sigma", "outputDim", "eps", "ballCenter",
                    "ballRadius", "lhat", "lip", "stability"})) {
    return m;
  }
  const auto kind = readString(ctx, obj, path, "kind");
  if (!kind) {
    ctx.add(join(path, "kind"), "required (linear, diagonal or quadratic)");
    return m;
  }
  m.kind = *kind;
  if (const json* mat = child(obj, "matrix")) m.matrix = parseMatrix(ctx, *mat, join(path, "matrix"));
  m.matrixFile = readString(ctx, obj, path, "matrixFile").value_or("");
  if (auto s = readNumbers(ctx, obj, path, "sigma")) m.sigma = *s;
  m.outputDim = readCount(ctx, obj, path, "outputDim");
  const auto eps = readNumber(ctx, obj, path, "eps");
  const auto center = readNumbers(ctx, obj, path, "ballCenter");
  const auto radius = readNumber(ctx, obj, path, "ballRadius");
  m.lhat = readNumber(ctx, obj, path, "lhat");
  m.lip = readNumber(ctx, obj, path, "lip");
  m.stability = readNumber(ctx, obj, path, "stability");
  requireNonnegative(ctx, join(path, "lhat"), m.lhat);
  requireNonnegative(ctx, join(path, "lip"), m.lip);
  requirePositive(ctx, join(path, "stability"), m.stability);

  const bool hasMatrix = !m.matrix.empty() || child(obj, "matrix") != nullptr;
  const bool hasFile = !m.matrixFile.empty();
  const auto needMatrix = [&](bool square) {
    if (hasMatrix == hasFile) {
      ctx.add(path, "exactly one of 'matrix' and 'matrixFile' is required");
    } else if (hasMatrix && !m.matrix.empty()) {
      if (m.matrix.front().size() != dim) {
        ctx.add(join(path, "matrix"), "needs " + std::to_string(dim) + " columns");
      }
      if (square && m.matrix.size() != dim) ctx.add(join(path, "matrix"), "must be square");
    }
  };
  if (m.kind == "linear") {
    needMatrix(false);
  } else if (m.kind == "diagonal") {
    if (hasMatrix || hasFile) ctx.add(path, "a diagonal model takes 'sigma', not a matrix");
    requireLength(ctx, join(path, "sigma"), m.sigma, dim);
    if (!m.outputDim) m.outputDim = dim;
    if (*m.outputDim < dim) ctx.add(join(path, "outputDim"), "must be at least space.dim");
  } else if (m.kind == "quadratic") {
    needMatrix(true);
    m.eps = eps.value_or(0.0);
    requireNonnegative(ctx, join(path, "eps"), eps);
    m.ballCenter = center.value_or(std::vector<double>(dim, 0.0));
    requireLength(ctx, join(path, "ballCenter"), m.ballCenter, dim);
    if (!radius) {
      ctx.add(join(path, "ballRadius"), "required for the quadratic model");
    } else {
      m.ballRadius = *radius;
      requirePositive(ctx, join(path, "ballRadius"), radius);
    }
  } else {
    ctx.add(join(path, "kind"), "expected one of linear, diagonal, quadratic");
  }
  if (m.kind != "diagonal" && (!m.sigma.empty() || m.outputDim)) {
    ctx.add(path, "'sigma' and 'outputDim' are only used by the diagonal model");
  }
  if (m.kind != "quadratic" && (eps || center || radius)) {
    ctx.add(path, "'eps', 'ballCenter' and 'ballRadius' are only used by the quadratic model");
  }
  return m;
}

std::optional<std::size_t> modelOutputDim(const ModelSpec& m) {
  if (m.kind == "diagonal") return m.outputDim;
  if (m.kind == "quadratic") return m.matrix.empty() ? std::nullopt : std::optional(m.matrix.size());
  if (!m.matrix.empty()) return m.matrix.size();
  return std::nullopt;  // from file, checked at build time
}

}  // namespace

RunConfig parseConfig(const std::string& text, const std::string& baseDir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, std::string("<root>: invalid JSON: ") + e.what());
  }
  Ctx ctx;
  RunConfig c;
  c.baseDir = baseDir;
  if (!checkObject(ctx, root, "",
                   {"mode", "space", "dataSpace", "model", "data", "set", "x0", "solver",
                    "diagnostics", "multilevel", "example", "output"})) {
    throw Error(ErrorCode::SchemaError, ctx.errors.front());
  }

  const auto mode = readString(ctx, root, "", "mode");
  if (!mode) {
    ctx.add("mode", "required (single, multilevel, validate or example-schedule)");
  } else if (*mode != "single" && *mode != "multilevel" && *mode != "validate" &&
             *mode != "example-schedule") {
    ctx.add("mode", "expected one of single, multilevel, validate, example-schedule");
  } else {
    c.mode = *mode;
  }

  // space
  bool spaceOk = false;
  if (const json* sp = child(root, "space")) {
    if (checkObject(ctx, *sp, "space", {"dim", "r", "p", "Cp", "Gq", "weights"})) {
      const std::size_t before = ctx.errors.size();
      const auto dim = readCount(ctx, *sp, "space", "dim");
      if (!dim || *dim == 0) ctx.add("space.dim", "required positive integer");
      c.space.dim = dim.value_or(0);
      c.space.r = readNumber(ctx, *sp, "space", "r").value_or(2.0);
      if (!(c.space.r > 1.0) || !std::isfinite(c.space.r)) ctx.add("space.r", "must lie in (1, inf)");
      c.space.p = readNumber(ctx, *sp, "space", "p").value_or(SpaceGeometry::defaultGauge(c.space.r));
      if (!(c.space.p >= SpaceGeometry::defaultGauge(c.space.r)) || !std::isfinite(c.space.p)) {
        ctx.add("space.p", "must satisfy p >= max(r, 2)");
      }
      const auto cp = readNumber(ctx, *sp, "space", "Cp");
      const auto gq = readNumber(ctx, *sp, "space", "Gq");
      const bool hilbertLike = c.space.r == 2.0 && c.space.p == 2.0;
      if ((!cp || !gq) && !hilbertLike) {
        ctx.add("space", "'Cp' and 'Gq' are required outside the Hilbert configuration");
      }
      c.space.cp = cp.value_or(1.0);
      c.space.gq = gq.value_or(1.0);
      requirePositive(ctx, "space.Cp", cp);
      requirePositive(ctx, "space.Gq", gq);
      if (auto w = readNumbers(ctx, *sp, "space", "weights")) {
        c.space.weights = *w;
        requireLength(ctx, "space.weights", *w, c.space.dim);
        if (std::any_of(w->begin(), w->end(), [](double x) { return !(x > 0.0) || !std::isfinite(x); })) {
          ctx.add("space.weights", "weights must be positive and finite");
        }
      }
      if (ctx.errors.size() == before) {
        try {
          (void)buildSpace(c.space);
          spaceOk = true;
        } catch (const Error& e) {
          ctx.add("space", e.what());
        }
      }
    }
  } else {
    ctx.add("space", "required");
  }
  const std::size_t dim = c.space.dim;

  if (const json* ds = child(root, "dataSpace")) {
    if (checkObject(ctx, *ds, "dataSpace", {"s"})) {
      c.s = readNumber(ctx, *ds, "dataSpace", "s").value_or(2.0);
      if (!(c.s > 1.0) || !std::isfinite(c.s)) ctx.add("dataSpace.s", "must lie in (1, inf)");
    }
  }

  if (const json* m = child(root, "model")) c.model = parseModel(ctx, *m, dim);

  if (const json* d = child(root, "data")) {
    if (checkObject(ctx, *d, "data", {"ydelta"})) {
      if (auto y = readNumbers(ctx, *d, "data", "ydelta")) c.ydelta = *y;
    }
  }
  if (c.model && !c.ydelta.empty()) {
    if (const auto out = modelOutputDim(*c.model)) requireLength(ctx, "data.ydelta", c.ydelta, *out);
  }

  if (const json* s = child(root, "set")) c.set = parseSet(ctx, *s, "set", dim);
  if (auto x0 = readNumbers(ctx, root, "", "x0")) {
    c.x0 = *x0;
    requireLength(ctx, "x0", c.x0, dim);
  }

  if (const json* sv = child(root, "solver")) {
    if (checkObject(ctx, *sv, "solver", {"eta", "etaHat", "maxIterations", "seed"})) {
      c.solver.eta = readNumber(ctx, *sv, "solver", "eta");
      requireNonnegative(ctx, "solver.eta", c.solver.eta);
      const auto etaHat = readNumber(ctx, *sv, "solver", "etaHat");
      if (!etaHat) ctx.add("solver.etaHat", "required");
      c.solver.etaHat = etaHat.value_or(0.0);
      requirePositive(ctx, "solver.etaHat", etaHat);
      if (etaHat && c.solver.eta && !(*etaHat > 3.0 * *c.solver.eta)) {
        ctx.add("solver.etaHat", "must exceed 3 * eta (the discrepancy threshold requires etaHat > 3 eta)");
      }
      c.solver.maxIterations = readCount(ctx, *sv, "solver", "maxIterations").value_or(1'000'000);
      if (c.solver.maxIterations == 0) ctx.add("solver.maxIterations", "must be at least 1");
      if (const json* seed = child(*sv, "seed")) {
        if (seed->is_number_unsigned()) {
          c.solver.seed = seed->get<std::uint64_t>();
        } else {
          ctx.add("solver.seed", "expected a nonnegative integer");
        }
      }
    }
  } else {
    ctx.add("solver", "required (at least 'etaHat')");
  }

  if (const json* dg = child(root, "diagnostics")) {
    if (checkObject(ctx, *dg, "diagnostics", {"referenceSolution", "checkTheorems"})) {
      if (auto ref = readNumbers(ctx, *dg, "diagnostics", "referenceSolution")) {
        c.diagnostics.referenceSolution = *ref;
        requireLength(ctx, "diagnostics.referenceSolution", *ref, dim);
      }
      c.diagnostics.checkTheorems =
          readBool(ctx, *dg, "diagnostics", "checkTheorems").value_or(true);
    }
  }

  if (const json* ml = child(root, "multilevel")) {
    if (checkObject(ctx, *ml, "multilevel", {"epsilon", "levels", "runDirect"})) {
      MultilevelSpec spec;
      const auto eps = readNumber(ctx, *ml, "multilevel", "epsilon");
      spec.epsilon = eps.value_or(1.0);
      requirePositive(ctx, "multilevel.epsilon", eps);
      spec.runDirect = readBool(ctx, *ml, "multilevel", "runDirect").value_or(false);
      const json* levels = child(*ml, "levels");
      if (!levels || !levels->is_array() || levels->empty()) {
        ctx.add("multilevel.levels", "required nonempty array");
      } else {
        for (std::size_t i = 0; i < levels->size(); ++i) {
          const std::string lp = "multilevel.levels[" + std::to_string(i) + "]";
          const json& lj = (*levels)[i];
          LevelSpec level;
          if (checkObject(ctx, lj, lp, {"set", "eta", "stability", "lip", "lhat", "reference"})) {
            if (const json* s = child(lj, "set")) level.set = parseSet(ctx, *s, join(lp, "set"), dim);
            level.eta = readNumber(ctx, lj, lp, "eta");
            level.stability = readNumber(ctx, lj, lp, "stability");
            level.lip = readNumber(ctx, lj, lp, "lip");
            level.lhat = readNumber(ctx, lj, lp, "lhat");
            requireNonnegative(ctx, join(lp, "eta"), level.eta);
            requirePositive(ctx, join(lp, "stability"), level.stability);
            requireNonnegative(ctx, join(lp, "lip"), level.lip);
            requirePositive(ctx, join(lp, "lhat"), level.lhat);
            if (auto ref = readNumbers(ctx, lj, lp, "reference")) {
              level.reference = *ref;
              requireLength(ctx, join(lp, "reference"), *ref, dim);
            }
          }
          spec.levels.push_back(std::move(level));
        }
      }
      c.multilevel = std::move(spec);
    }
  }

  if (const json* ex = child(root, "example")) {
    if (checkObject(ctx, *ex, "example", {"lambda", "tau", "maxLevels", "allowSmallLambda"})) {
      ExampleSpec spec;
      const auto lambda = readNumber(ctx, *ex, "example", "lambda");
      if (!lambda) ctx.add("example.lambda", "required");
      requirePositive(ctx, "example.lambda", lambda);
      spec.lambda = lambda.value_or(0.0);
      spec.tau = readNumber(ctx, *ex, "example", "tau");
      requirePositive(ctx, "example.tau", spec.tau);
      spec.maxLevels = readCount(ctx, *ex, "example", "maxLevels").value_or(64);
      spec.allowSmallLambda = readBool(ctx, *ex, "example", "allowSmallLambda").value_or(false);
      c.example = spec;
    }
  }

  if (const json* out = child(root, "output")) {
    if (checkObject(ctx, *out, "output", {"tracePath", "summaryPath", "schedulePath"})) {
      c.output.tracePath = readString(ctx, *out, "output", "tracePath").value_or("");
      c.output.summaryPath = readString(ctx, *out, "output", "summaryPath").value_or("");
      c.output.schedulePath = readString(ctx, *out, "output", "schedulePath").value_or("");
    }
  }

  // Mode-dependent requirements.
  const bool running = c.mode == "single" || c.mode == "multilevel";
  if (running) {
    if (!c.model) ctx.add("model", "required in mode '" + c.mode + "'");
    if (c.ydelta.empty()) ctx.add("data.ydelta", "required in mode '" + c.mode + "'");
  }
  if (c.mode == "multilevel" && !c.multilevel) ctx.add("multilevel", "required in mode 'multilevel'");
  if (c.mode == "validate" && !c.multilevel && !c.example) {
    ctx.add("<root>", "mode 'validate' needs a 'multilevel' or an 'example' section");
  }
  if (c.mode == "validate" && c.multilevel && !c.model) {
    for (std::size_t i = 0; i < c.multilevel->levels.size(); ++i) {
      const auto& l = c.multilevel->levels[i];
      if (!l.eta || !l.stability || !l.lip || !l.lhat) {
        ctx.add("multilevel.levels[" + std::to_string(i) + "]",
                "without a model, eta, stability, lip and lhat are all required");
      }
    }
  }
  if (c.mode == "example-schedule") {
    if (!c.example) ctx.add("example", "required in mode 'example-schedule'");
    if (c.output.schedulePath.empty()) {
      ctx.add("output.schedulePath", "required in mode 'example-schedule'");
    }
  }
  // Nesting of the level sets.
  if (c.multilevel && spaceOk && ctx.errors.empty()) {
    const SpaceGeometry space = buildSpace(c.space);
    const auto& lv = c.multilevel->levels;
    for (std::size_t i = 1; i < lv.size(); ++i) {
      if (!isNestedIn(space, buildSet(lv[i - 1].set, dim), buildSet(lv[i].set, dim))) {
        ctx.add("multilevel.levels[" + std::to_string(i) + "].set",
                "must contain the set of level " + std::to_string(i - 1) +
                    " (level sets have to be nested)");
      }
    }
  }

  if (!ctx.errors.empty()) {
    std::string msg = std::to_string(ctx.errors.size()) + " configuration error(s)";
    for (const auto& e : ctx.errors) msg += "\n  " + e;
    throw Error(ErrorCode::SchemaError, msg);
  }
  return c;
}

RunConfig loadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return parseConfig(ss.str(), dir.empty() ? "." : dir.string());
}

namespace {

json numbersWithInf(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) {
    if (std::isinf(x)) {
      a.push_back(x > 0 ? "inf" : "-inf");
    } else {
      a.push_back(x);
    }
  }
  return a;
}

json setToJson(const SetSpec& s) {
  json j;
  j["kind"] = s.kind;
  if (s.kind == "box") {
    j["lower"] = numbersWithInf(s.lower);
    j["upper"] = numbersWithInf(s.upper);
  } else if (s.kind == "ball") {
    j["center"] = s.center;
    j["radius"] = s.radius;
  } else if (s.kind == "subspace") {
    j["support"] = s.support;
  }
  return j;
}

template <class T>
void putOpt(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

}  // namespace

std::string serializeConfig(const RunConfig& c) {
  json j;
  j["mode"] = c.mode;
  json sp;
  sp["dim"] = c.space.dim;
  sp["r"] = c.space.r;
  sp["p"] = c.space.p;
  sp["Cp"] = c.space.cp;
  sp["Gq"] = c.space.gq;
  if (!c.space.weights.empty()) sp["weights"] = c.space.weights;
  j["space"] = sp;
  j["dataSpace"] = {{"s", c.s}};
  if (c.model) {
    const ModelSpec& m = *c.model;
    json mj;
    mj["kind"] = m.kind;
    if (!m.matrixFile.empty()) {
      mj["matrixFile"] = m.matrixFile;
    } else if (!m.matrix.empty()) {
      mj["matrix"] = m.matrix;
    }
    if (m.kind == "diagonal") {
      mj["sigma"] = m.sigma;
      putOpt(mj, "outputDim", m.outputDim);
    }
    if (m.kind == "quadratic") {
      mj["eps"] = m.eps;
      mj["ballCenter"] = m.ballCenter;
      mj["ballRadius"] = m.ballRadius;
    }
    putOpt(mj, "lhat", m.lhat);
    putOpt(mj, "lip", m.lip);
    putOpt(mj, "stability", m.stability);
    j["model"] = mj;
  }
  if (!c.ydelta.empty()) j["data"] = {{"ydelta", c.ydelta}};
  j["set"] = setToJson(c.set);
  if (!c.x0.empty()) j["x0"] = c.x0;
  json sv;
  putOpt(sv, "eta", c.solver.eta);
  sv["etaHat"] = c.solver.etaHat;
  sv["maxIterations"] = c.solver.maxIterations;
  sv["seed"] = c.solver.seed;
  j["solver"] = sv;
  json dg;
  if (!c.diagnostics.referenceSolution.empty()) dg["referenceSolution"] = c.diagnostics.referenceSolution;
  dg["checkTheorems"] = c.diagnostics.checkTheorems;
  j["diagnostics"] = dg;
  if (c.multilevel) {
    json ml;
    ml["epsilon"] = c.multilevel->epsilon;
    ml["runDirect"] = c.multilevel->runDirect;
    json levels = json::array();
    for (const auto& l : c.multilevel->levels) {
      json lj;
      lj["set"] = setToJson(l.set);
      putOpt(lj, "eta", l.eta);
      putOpt(lj, "stability", l.stability);
      putOpt(lj, "lip", l.lip);
      putOpt(lj, "lhat", l.lhat);
      if (!l.reference.empty()) lj["reference"] = l.reference;
      levels.push_back(lj);
    }
    ml["levels"] = levels;
    j["multilevel"] = ml;
  }
  if (c.example) {
    json ex;
    ex["lambda"] = c.example->lambda;
    putOpt(ex, "tau", c.example->tau);
    ex["maxLevels"] = c.example->maxLevels;
    ex["allowSmallLambda"] = c.example->allowSmallLambda;
    j["example"] = ex;
  }
  json out = json::object();
  if (!c.output.tracePath.empty()) out["tracePath"] = c.output.tracePath;
  if (!c.output.summaryPath.empty()) out["summaryPath"] = c.output.summaryPath;
  if (!c.output.schedulePath.empty()) out["schedulePath"] = c.output.schedulePath;
  j["output"] = out;
  return j.dump(2) + "\n";
}

}  // namespace projsd

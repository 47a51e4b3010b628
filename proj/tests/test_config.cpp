#include "doctest.h"
#include "json.hpp"

#include "projsd/config.hpp"
#include "projsd/error.hpp"
#include "projsd/runner.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace projsd;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("projsd_test_" + std::to_string(std::random_device{}()) + "_" +
            std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string readFile(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string schemaMessage(const std::string& text) {
  try {
    (void)parseConfig(text);
  } catch (const Error& e) {
    CHECK((e.code() == ErrorCode::SchemaError));
    return e.what();
  }
  FAIL("expected a schema error");
  return {};
}

const char* kMinimal = R"({
  "mode": "single",
  "space": {"dim": 2, "r": 2, "p": 2},
  "model": {"kind": "linear", "matrix": [[1, 0], [0, 2]]},
  "data": {"ydelta": [1, 1]},
  "solver": {"eta": 0, "etaHat": 1e-8}
})";

// F(x) = A x + 0.01 x.x with A = diag(2, 1.5, 1), data generated from
// z = (0.5, -0.3, 0.2).
json quadraticSingle() {
  const double z[] = {0.5, -0.3, 0.2};
  const double a[] = {2.0, 1.5, 1.0};
  json y = json::array();
  for (int i = 0; i < 3; ++i) y.push_back(a[i] * z[i] + 0.01 * z[i] * z[i]);
  return {{"mode", "single"},
          {"space", {{"dim", 3}, {"r", 2}, {"p", 2}}},
          {"model",
           {{"kind", "quadratic"},
            {"matrix", {{2, 0, 0}, {0, 1.5, 0}, {0, 0, 1}}},
            {"eps", 0.01},
            {"ballCenter", {0, 0, 0}},
            {"ballRadius", 5}}},
          {"data", {{"ydelta", y}}},
          {"set", {{"kind", "ball"}, {"center", {0, 0, 0}}, {"radius", 5}}},
          {"x0", {1, 1, 1}},
          {"solver", {{"eta", 0}, {"etaHat", 1e-9}, {"seed", 3}}},
          {"diagnostics", {{"referenceSolution", {0.5, -0.3, 0.2}}}}};
}

json exampleConfig(const std::string& mode) {
  return {{"mode", mode},
          {"space", {{"dim", 2}, {"r", 2}, {"p", 2}}},
          {"solver", {{"etaHat", 1e-3}}},
          {"example", {{"lambda", 0.1}}}};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string l; std::getline(ss, l);) out.push_back(l);
  return out;
}

std::vector<std::string> splitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string f; std::getline(ss, f, ',');) out.push_back(f);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

TEST_CASE("minimal config gets defaults") {
  const RunConfig c = parseConfig(kMinimal);
  CHECK(c.mode == "single");
  CHECK(c.s == 2.0);
  CHECK(c.space.weights.empty());
  CHECK(c.space.cp == 1.0);
  CHECK(c.solver.maxIterations == 1'000'000);
  CHECK(c.set.kind == "whole");
  CHECK(c.diagnostics.checkTheorems);
}

TEST_CASE("schema errors") {
  json j = json::parse(kMinimal);
  j["solver"]["eta"] = 0.1;
  j["solver"]["etaHat"] = 0.3;
  CHECK(schemaMessage(j.dump()).find("etaHat > 3 eta") != std::string::npos);

  json k = json::parse(kMinimal);
  k["solver"]["tolerance"] = 1;
  CHECK(schemaMessage(k.dump()).find("solver.tolerance") != std::string::npos);

  // Every problem is reported, not just the first.
  json m = json::parse(kMinimal);
  m["space"]["r"] = 3;
  m["bogus"] = true;
  m["data"]["ydelta"] = {1, 2, 3};
  const std::string msg = schemaMessage(m.dump());
  CHECK(msg.find("Cp") != std::string::npos);
  CHECK(msg.find("bogus") != std::string::npos);
  CHECK(msg.find("data.ydelta") != std::string::npos);

  CHECK(schemaMessage("{not json").find("parse") != std::string::npos);
  CHECK(schemaMessage(R"({"mode": "sweep"})").find("mode") != std::string::npos);
}

TEST_CASE("non-nested levels are rejected") {
  const json j = {{"mode", "validate"},
                  {"space", {{"dim", 4}, {"r", 2}, {"p", 2}}},
                  {"solver", {{"etaHat", 1e-3}}},
                  {"multilevel",
                   {{"levels",
                     {{{"set", {{"kind", "subspace"}, {"support", {0, 1}}}},
                       {"eta", 1e-3}, {"stability", 1}, {"lip", 0}, {"lhat", 1}},
                      {{"set", {{"kind", "subspace"}, {"support", {2, 3}}}},
                       {"eta", 1e-4}, {"stability", 1}, {"lip", 0}, {"lhat", 1}}}}}}};
  CHECK(schemaMessage(j.dump()).find("nested") != std::string::npos);
}

TEST_CASE("serialization round trip") {
  for (const json& j : {json::parse(kMinimal), quadraticSingle(), exampleConfig("validate")}) {
    const RunConfig c = parseConfig(j.dump());
    const RunConfig back = parseConfig(serializeConfig(c));
    CHECK(back == c);
  }
  json boxed = json::parse(kMinimal);
  boxed["set"] = {{"kind", "box"}, {"lower", {"-inf", 0}}, {"upper", {1, "inf"}}};
  const RunConfig c = parseConfig(boxed.dump());
  CHECK(std::isinf(c.set.lower[0]));
  CHECK(parseConfig(serializeConfig(c)) == c);
}

TEST_CASE("matrix from a CSV file") {
  TempDir dir;
  {
    std::ofstream out(dir / "a.csv");
    out << "1, 0\n0, 2\n";
  }
  json j = json::parse(kMinimal);
  j["model"].erase("matrix");
  j["model"]["matrixFile"] = "a.csv";
  {
    std::ofstream out(dir / "run.json");
    out << j.dump();
  }
  const RunConfig c = loadConfig(dir / "run.json");
  const Eigen::MatrixXd a = readCsvMatrix(dir / "a.csv");
  CHECK(a(1, 1) == 2.0);
  CHECK(a(0, 1) == 0.0);
  CHECK(execute(c, {.summaryPath = dir / "s.json"}) == kExitOk);
  CHECK_THROWS_AS(readCsvMatrix(dir / "missing.csv"), Error);
  CHECK_THROWS_AS(loadConfig(dir / "missing.json"), Error);
}

TEST_CASE("single run writes a monotone Bregman trace") {
  TempDir dir;
  const RunConfig c = parseConfig(quadraticSingle().dump());
  const int code = execute(c, {.tracePath = dir / "t.csv", .summaryPath = dir / "s.json"});
  CHECK(code == kExitOk);
  const auto rows = lines(readFile(dir / "t.csv"));
  REQUIRE(rows.size() > 2);
  CHECK(rows[0] == "level,k,r_k,t_k,tHat_k,u_k,v_k,w_k,mu_k,bregman_to_ref,radius_ok");
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto f = splitCsv(rows[i]);
    REQUIRE(f.size() == 11);
    const double d = std::stod(f[9]);
    CHECK(d < prev);
    prev = d;
  }
  const json s = json::parse(readFile(dir / "s.json"));
  CHECK(s["stopReason"] == "DiscrepancyMet");
  CHECK(s["run"]["theoremChecks"]["monotonicityViolations"] == 0);
  CHECK(s["run"]["theoremChecks"]["strictBoundViolations"] == 0);
  CHECK(s["exitCode"] == 0);
  // No temporaries are left next to the outputs.
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir.path)) ++files;
  CHECK(files == 2);
}

TEST_CASE("trace without a reference leaves the diagnostic columns empty") {
  TempDir dir;
  const RunConfig c = parseConfig(kMinimal);
  CHECK(execute(c, {.tracePath = dir / "t.csv"}) == kExitOk);
  const auto rows = lines(readFile(dir / "t.csv"));
  REQUIRE(rows.size() >= 2);
  const auto f = splitCsv(rows[1]);
  REQUIRE(f.size() == 11);
  CHECK(f[9].empty());
  CHECK(f[10].empty());
}

TEST_CASE("exit codes") {
  TempDir dir;
  json j = json::parse(kMinimal);
  j["solver"]["maxIterations"] = 1;
  j["solver"]["etaHat"] = 1e-300;
  CHECK(execute(parseConfig(j.dump())) == kExitSolverAbort);

  // An inadmissible tau fails validation.
  json v = exampleConfig("validate");
  v["example"]["tau"] = 1.0;
  CHECK(execute(parseConfig(v.dump()), {.summaryPath = dir / "s.json"}) == kExitInvalid);
  CHECK(json::parse(readFile(dir / "s.json"))["error"] == "TauOutOfRange");

  CHECK(execute(parseConfig(kMinimal), {.summaryPath = dir / "no/such/dir/s.json"}) == kExitIo);
}

TEST_CASE("validate mode lists every transition") {
  TempDir dir;
  const RunConfig c = parseConfig(exampleConfig("validate").dump());
  CHECK(execute(c, {.summaryPath = dir / "s.json"}) == kExitOk);
  const json s = json::parse(readFile(dir / "s.json"));
  const auto& levels = s["schedule"];
  const auto& transitions = s["validation"]["transitions"];
  REQUIRE(levels.size() >= 2);
  CHECK(transitions.size() + 1 == levels.size());
  for (const auto& t : transitions) {
    CHECK(t["ok"] == true);
    CHECK(t["lhs"].get<double>() < t["rhs"].get<double>());
  }
  CHECK(levels[0]["eta"].get<double>() == doctest::Approx(0.05));
}

TEST_CASE("example-schedule output runs in multilevel mode") {
  TempDir dir;
  json j = exampleConfig("example-schedule");
  j["model"] = {{"kind", "linear"}, {"matrix", {{1, 0}, {0, 1}}}};
  j["data"] = {{"ydelta", {0.3, -0.2}}};
  j["output"] = {{"schedulePath", dir / "schedule.json"}};
  CHECK(execute(parseConfig(j.dump())) == kExitOk);
  const RunConfig gen = loadConfig(dir / "schedule.json");
  CHECK(gen.mode == "multilevel");
  REQUIRE(gen.multilevel.has_value());
  CHECK(gen.multilevel->levels.size() >= 2);
  CHECK(execute(gen, {.summaryPath = dir / "s.json"}) == kExitOk);
  const json s = json::parse(readFile(dir / "s.json"));
  CHECK(s["success"] == true);
  CHECK(s["finalResidual"].get<double>() <= 1e-3);
}

TEST_CASE("atomic writes replace whole files") {
  TempDir dir;
  const std::string path = dir / "out.txt";
  writeFileAtomic(path, "first version, longer than the second\n");
  writeFileAtomic(path, "second\n");
  CHECK(readFile(path) == "second\n");
  CHECK_THROWS_AS(writeFileAtomic(dir / "missing/out.txt", "x"), Error);
}

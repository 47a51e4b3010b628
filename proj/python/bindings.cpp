#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "projsd/config.hpp"
#include "projsd/error.hpp"
#include "projsd/multilevel.hpp"
#include "projsd/runner.hpp"
#include "projsd/solver.hpp"

namespace py = pybind11;
using namespace projsd;

namespace {

PrimalVector primal(const Eigen::VectorXd& v) { return PrimalVector(v); }

py::dict reportDict(const RunReport& r) {
  std::vector<double> residuals, bregman;
  std::vector<Eigen::VectorXd> iterates;
  for (const auto& st : r.perIteration) {
    residuals.push_back(st.r);
    if (st.bregmanToRef) bregman.push_back(*st.bregmanToRef);
    iterates.push_back(st.x.coords());
  }
  py::dict d;
  d["stop_reason"] = toString(r.stopReason);
  d["k"] = r.stoppedAtK;
  d["final_residual"] = r.finalResidual;
  d["final_iterate"] = r.finalIterate.coords();
  d["residuals"] = residuals;
  d["bregman_to_ref"] = bregman;
  d["iterates"] = iterates;
  d["ctilde"] = r.ctilde;
  d["rho"] = r.radiusUnbounded ? py::cast(std::numeric_limits<double>::infinity())
                               : (r.rho ? py::cast(*r.rho) : py::none());
  d["monotonicity_violations"] = r.monotonicityViolations;
  d["strict_bound_violations"] = r.strictBoundViolations;
  d["summability_ok"] = r.summabilityOk;
  d["error"] = r.error ? py::cast(std::string(toString(*r.error))) : py::none();
  return d;
}

std::shared_ptr<const ForwardModel> asModel(const py::object& m) {
  return m.cast<std::shared_ptr<ForwardModel>>();
}

}  // namespace

PYBIND11_MODULE(_projsd, m) {
  m.doc() = "Projected steepest descent in p-convex Banach spaces.";
  py::register_exception<Error>(m, "Error", PyExc_ValueError);

  py::class_<SpaceGeometry>(m, "SpaceGeometry")
      .def_static("make",
                  [](std::size_t dim, double r, double p, double cp, double gq,
                     std::optional<Eigen::VectorXd> w) {
                    return SpaceGeometry::make(dim, r, p, cp, gq, w.value_or(Eigen::VectorXd()));
                  },
                  py::arg("dim"), py::arg("r"), py::arg("p"), py::arg("cp"), py::arg("gq"),
                  py::arg("weights") = py::none())
      .def_static("hilbert", &SpaceGeometry::hilbert, py::arg("dim"))
      .def_static("preset", [](const std::string& name, std::size_t dim) { return SpaceGeometry::preset(name, dim); },
                  py::arg("name"), py::arg("dim"))
      .def_property_readonly("dim", &SpaceGeometry::dim)
      .def_property_readonly("r", &SpaceGeometry::r)
      .def_property_readonly("p", &SpaceGeometry::p)
      .def_property_readonly("q", &SpaceGeometry::q)
      .def_property_readonly("cp", &SpaceGeometry::cp)
      .def_property_readonly("gq", &SpaceGeometry::gq)
      .def_property_readonly("is_hilbert", &SpaceGeometry::isHilbert);

  m.def("norm", [](const SpaceGeometry& g, const Eigen::VectorXd& x) { return norm(g, primal(x)); });
  m.def("duality_map", [](const SpaceGeometry& g, const Eigen::VectorXd& x) {
    return dualityMap(g, primal(x)).coords();
  });
  m.def("inverse_duality_map", [](const SpaceGeometry& g, const Eigen::VectorXd& xs) {
    return inverseDualityMap(g, DualVector(xs)).coords();
  });
  m.def("bregman_distance", [](const SpaceGeometry& g, const Eigen::VectorXd& x, const Eigen::VectorXd& xt) {
    return bregmanDistance(g, primal(x), primal(xt));
  });

  py::class_<ConvexSet>(m, "ConvexSet")
      .def_static("whole_space", &ConvexSet::wholeSpace)
      .def_static("box", &ConvexSet::box, py::arg("lower"), py::arg("upper"))
      .def_static("ball", [](const Eigen::VectorXd& c, double radius) { return ConvexSet::ball(primal(c), radius); },
                  py::arg("center"), py::arg("radius"))
      .def_static("subspace", &ConvexSet::subspace, py::arg("support"))
      .def_property_readonly("kind", &ConvexSet::kind);
  m.def("bregman_project", [](const SpaceGeometry& g, const ConvexSet& s, const Eigen::VectorXd& x) {
    return bregmanProject(g, s, primal(x)).coords();
  });
  m.def("contains", [](const SpaceGeometry& g, const ConvexSet& s, const Eigen::VectorXd& x, double tol) {
    return contains(g, s, primal(x), tol);
  }, py::arg("space"), py::arg("set"), py::arg("x"), py::arg("tol") = 1e-10);

  py::class_<ForwardModel, std::shared_ptr<ForwardModel>>(m, "ForwardModel")
      .def_property_readonly("kind", &ForwardModel::kind)
      .def_property_readonly("input_dim", &ForwardModel::inputDim)
      .def_property_readonly("output_dim", &ForwardModel::outputDim)
      .def("evaluate", [](const ForwardModel& f, const Eigen::VectorXd& x) { return f.evaluate(primal(x)).coords(); })
      .def("derivative", [](const ForwardModel& f, const Eigen::VectorXd& x, const Eigen::VectorXd& h) {
        return f.applyDerivative(primal(x), primal(h)).coords();
      })
      .def("adjoint", [](const ForwardModel& f, const Eigen::VectorXd& x, const Eigen::VectorXd& ys) {
        return f.applyAdjoint(primal(x), DataDualVector(ys)).coords();
      })
      .def("lipschitz", [](const ForwardModel& f, const SpaceGeometry& g, double s) {
        const auto c = f.lipschitz(g, DataSpace::make(f.outputDim(), s));
        return py::make_tuple(c.lhat, c.lip);
      }, py::arg("space"), py::arg("s") = 2.0)
      .def("stability_constant", [](const ForwardModel& f, const SpaceGeometry& g, const ConvexSet& set, double s) {
        return f.stabilityConstant(g, DataSpace::make(f.outputDim(), s), set);
      }, py::arg("space"), py::arg("set"), py::arg("s") = 2.0);
  py::class_<LinearModel, ForwardModel, std::shared_ptr<LinearModel>>(m, "LinearModel")
      .def(py::init<Eigen::MatrixXd>(), py::arg("matrix"));
  py::class_<DiagonalModel, ForwardModel, std::shared_ptr<DiagonalModel>>(m, "DiagonalModel")
      .def(py::init<Eigen::VectorXd, std::size_t>(), py::arg("sigma"), py::arg("output_dim"));
  py::class_<QuadraticModel, ForwardModel, std::shared_ptr<QuadraticModel>>(m, "QuadraticModel")
      .def(py::init([](const Eigen::MatrixXd& a, double eps, const Eigen::VectorXd& c, double radius) {
             return std::make_shared<QuadraticModel>(a, eps, primal(c), radius);
           }),
           py::arg("matrix"), py::arg("eps"), py::arg("ball_center"), py::arg("ball_radius"));

  m.def("compute_ctilde", &computeCtilde, py::arg("space"), py::arg("lip"), py::arg("stability"));
  m.def("convergence_radius", &convergenceRadius, py::arg("space"), py::arg("lhat"),
        py::arg("ctilde"), py::arg("eta"));

  m.def(
      "run",
      [](const SpaceGeometry& g, const ConvexSet& set, const py::object& model, const Eigen::VectorXd& ydelta,
         const Eigen::VectorXd& x0, double eta, double eta_hat, double lhat, double lip, double stability,
         std::size_t max_iterations, std::optional<Eigen::VectorXd> reference, double s) {
        const auto f = asModel(model);
        SolverConfig cfg;
        cfg.eta = eta;
        cfg.etaHat = eta_hat;
        cfg.maxIterations = max_iterations;
        if (reference) cfg.diagnosticReference = primal(*reference);
        cfg.validate();
        const auto rep = runAlgorithm1(g, set, *f, DataSpace::make(f->outputDim(), s),
                                       NoisyData{DataVector(ydelta), eta}, primal(x0), cfg,
                                       {lhat, lip, stability});
        return reportDict(rep);
      },
      py::arg("space"), py::arg("set"), py::arg("model"), py::arg("ydelta"), py::arg("x0"),
      py::arg("eta"), py::arg("eta_hat"), py::arg("lhat"), py::arg("lip"), py::arg("stability"),
      py::arg("max_iterations") = 1'000'000, py::arg("reference") = py::none(), py::arg("s") = 2.0);

  m.def("example_tau_bound", &exampleTauBound, py::arg("space"), py::arg("lambda_"));
  m.def(
      "example_schedule",
      [](double lambda, double tau, const SpaceGeometry& g, double etaHat, std::size_t maxLevels,
         bool allowSmallLambda) {
        const Schedule s = exampleSchedule(lambda, tau, g, etaHat, maxLevels, allowSmallLambda);
        const auto v = validateSchedule(g, s);
        py::list levels;
        for (const auto& l : s.levels) {
          py::dict d;
          d["eta"] = l.eta;
          d["stability"] = l.stability;
          d["lip"] = l.lip;
          d["lhat"] = l.lhat;
          d["ctilde"] = l.ctilde(g);
          d["rho"] = l.rho(g);
          levels.append(d);
        }
        py::dict out;
        out["levels"] = levels;
        out["final_level"] = v.finalLevel;
        out["valid"] = v.ok();
        out["problems"] = v.problems;
        return out;
      },
      py::arg("lambda_"), py::arg("tau"), py::arg("space"), py::arg("eta_hat"),
      py::arg("max_levels") = 64, py::arg("allow_small_lambda") = false);

  m.def(
      "run_config",
      [](const std::string& text, const std::string& baseDir, std::optional<std::string> trace,
         std::optional<std::string> summary, std::optional<std::uint64_t> seed) {
        const RunConfig c = parseConfig(text, baseDir);
        ExecuteOptions opt;
        opt.tracePath = trace;
        opt.summaryPath = summary;
        opt.seed = seed;
        opt.quiet = true;
        py::gil_scoped_release release;
        return execute(c, opt);
      },
      py::arg("text"), py::arg("base_dir") = ".", py::arg("trace") = py::none(),
      py::arg("summary") = py::none(), py::arg("seed") = py::none(),
      "Parses a JSON run configuration, executes it and returns the exit code.");
}

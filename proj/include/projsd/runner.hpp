#pragma once

#include "projsd/config.hpp"
#include "projsd/convex_set.hpp"
#include "projsd/forward_model.hpp"
#include "projsd/geometry.hpp"
#include "projsd/multilevel.hpp"
#include "projsd/solver.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace projsd {

SpaceGeometry buildSpace(const SpaceSpec& spec);
ConvexSet buildSet(const SetSpec& spec, std::size_t dim);
/// Reads `matrixFile` (relative to baseDir) when the matrix is not inline.
std::shared_ptr<const ForwardModel> buildModel(const ModelSpec& spec, std::size_t dim,
                                               const std::string& baseDir);

/// Rows of comma-separated numbers; throws Io or SchemaError.
Eigen::MatrixXd readCsvMatrix(const std::string& path);

/// Writes to a temporary sibling and renames over `path`; throws Io.
void writeFileAtomic(const std::string& path, const std::string& content);

/// Header plus one row per iteration of every level:
/// level,k,r_k,t_k,tHat_k,u_k,v_k,w_k,mu_k,bregman_to_ref,radius_ok
std::string formatTrace(const std::vector<std::pair<std::size_t, const RunReport*>>& runs);

struct ExecuteOptions {
  std::optional<std::string> tracePath;
  std::optional<std::string> summaryPath;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  std::ostream* log = nullptr;
};

enum ExitCode : int { kExitOk = 0, kExitSolverAbort = 2, kExitInvalid = 3, kExitIo = 4 };

/// Runs the configured mode and writes trace/summary files. Never throws;
/// failures become exit codes with a message on `log`.
int execute(const RunConfig& config, const ExecuteOptions& options = {});

}  // namespace projsd

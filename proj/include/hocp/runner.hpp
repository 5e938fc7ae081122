#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hocp/drivers.hpp"
#include "hocp/io.hpp"

namespace hocp {

struct ProblemSpec {
  std::string name;
  int n = 1;
  int m = 0;
  std::uint64_t seed = 0;
  /// Instance JSON (sumabs, maxeig); resolved against the config's folder.
  std::string instance_file;
};

struct ModelExportSpec {
  std::vector<double> centers;
  double lo = -1.5;
  double hi = 1.5;
  int points = 601;
};

struct RemainderSpec {
  std::vector<int> q_values{1, 2, 3};
  std::vector<double> eps_values{0.2, 0.1, 0.05, 0.025};
  /// Center of the sampled balls; NaN selects the fig1 branch switch.
  double center = std::numeric_limits<double>::quiet_NaN();
  int grid_points = 9;
  int samples = 2000;
};

/// Parsed and validated run configuration.
struct RunConfig {
  ProblemSpec problem;
  /// local | global | model | remainder
  std::string method = "local";
  int q = 1;
  int p = 1;
  double sigma = 0.5;
  double kappa = 0.75;
  double eps1 = 0.5;
  double eps_thr = 1e-6;
  /// Decimal text of eps_thr when the config gave a string (bigfloat runs
  /// with thresholds below the binary64 range); empty otherwise.
  std::string eps_thr_text;
  int max_iter = 200;
  std::vector<double> x1;
  SolverStrategy solver = SolverStrategy::Auto;
  SolverOptions solver_options;
  BundleInit init;
  BundleLimits limits;
  Norm norm = Norm::Euclidean;
  bool stop_on_active_trust_region = false;
  bool abort_on_degraded = false;
  /// binary64 | bigfloat
  std::string scalar = "binary64";
  unsigned bits = 512;
  std::uint64_t seed = 0;
  GlobalConfig global;
  ModelExportSpec model;
  RemainderSpec remainder;
  /// Output path prefix: <output>.csv and <output>.json.
  std::string output;
  json raw;
};

/// Validates every field; throws config_error with a readable message.
RunConfig parse_run_config(const json& j, const std::string& base_dir = ".");
RunConfig load_run_config(const std::string& path);

struct RunOutcome {
  int exit_code = 0;
  json summary;
  std::string csv;
};

/// Executes a validated configuration. Writes nothing to disk.
RunOutcome execute_run(const RunConfig& cfg);

/// Writes <output>.csv and <output>.json.
void write_outcome(const RunConfig& cfg, const RunOutcome& out);

int exit_code_for(Termination t);

/// Replaces the values at dotted paths (e.g. "problem.n") of `base`.
json apply_overrides(json base, const json& overrides);

/// Grid points of a sweep: either {"points": [{...}, ...]} or a map from
/// dotted path to value list, expanded as a cartesian product in key order.
std::vector<json> expand_grid(const json& grid);

/// Output suffix naming one grid point, e.g. "q=2_problem.n=5".
std::string grid_label(const json& point);

/// Worker count from HOCP_THREADS (default: hardware concurrency), at least 1.
int thread_cap();

struct SweepPointResult {
  std::string label;
  int exit_code = 0;
  std::string error;
  json summary;
};

struct SweepOutcome {
  int exit_code = 0;
  std::vector<SweepPointResult> points;
  json summary;
};

/// Runs every grid point of `base` (validated up front) on up to `threads`
/// workers and writes one trace per point plus <output>_sweep.json.
SweepOutcome run_sweep(const json& base, const json& grid, const std::string& base_dir, int threads);

/// Names, dimensions and supported orders of the built-in problems.
json list_problems();

}  // namespace hocp

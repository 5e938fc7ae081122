#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "hocp/model.hpp"
#include "hocp/problems.hpp"

namespace hocp {

/// Point in [lo, hi] where the demo function switches between its second
/// and third branch, located by bisection on their difference.
double fig1_kink(double lo = 0.9, double hi = 1.0);

/// Bundle with one cut at every node of a tensor grid of `grid_points` per
/// axis spanning the box [x - eps, x + eps]. Nodes outside a Euclidean
/// region are skipped.
Bundle<double> grid_bundle(const Problem<double>& problem, const TrustRegion<double>& tr, int q, int grid_points);

struct RemainderPoint {
  int q = 0;
  double eps = 0;
  double probe = 0;
};

struct RemainderSweep {
  std::vector<RemainderPoint> points;
  /// Least-squares slope of log(probe) against log(eps), per q.
  std::map<int, double> slope;
};

/// remainder_probe on grid-dense bundles centered at x for every (q, eps).
RemainderSweep remainder_sweep(const Problem<double>& problem, const VecD& x, const std::vector<int>& q_values,
                               const std::vector<double>& eps_values, int grid_points, int samples,
                               std::uint64_t seed);

struct ModelSample {
  double z = 0;
  double model = 0;
  double f = 0;
  int active_cut = -1;
};

/// Samples a one-dimensional model built from cuts at `centers` on
/// `points` equispaced z in [lo, hi].
std::vector<ModelSample> model_export(const Problem<double>& problem, const std::vector<double>& centers, int q,
                                      double lo, double hi, int points);

}  // namespace hocp

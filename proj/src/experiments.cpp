#include "hocp/experiments.hpp"

#include <cmath>

#include "hocp/diagnostics.hpp"

namespace hocp {

double fig1_kink(double lo, double hi) {
  auto diff = [](double x) { return Fig1Problem<double>::branch(1, x) - Fig1Problem<double>::branch(2, x); };
  double flo = diff(lo);
  require(flo * diff(hi) < 0, "fig1_kink: bracket does not contain a branch switch");
  for (int it = 0; it < 200 && hi - lo > 0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double fm = diff(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Bundle<double> grid_bundle(const Problem<double>& problem, const TrustRegion<double>& tr, int q, int grid_points) {
  require(grid_points >= 2, "grid_bundle: at least two grid points per axis");
  const int n = tr.dim();
  double total = 1;
  for (int i = 0; i < n; ++i) total *= grid_points;
  require(total <= 1e5, "grid_bundle: grid too large");
  Bundle<double> w(tr);
  std::vector<int> idx(n, 0);
  for (long long k = 0; k < static_cast<long long>(total); ++k) {
    VecD y(n);
    for (int i = 0; i < n; ++i) y[i] = tr.center[i] - tr.radius + 2.0 * tr.radius * idx[i] / (grid_points - 1);
    if (tr.contains(y)) w.add(Cut<double>(problem.oracle(y, q)));
    for (int i = 0; i < n; ++i) {
      if (++idx[i] < grid_points) break;
      idx[i] = 0;
    }
  }
  return w;
}

RemainderSweep remainder_sweep(const Problem<double>& problem, const VecD& x, const std::vector<int>& q_values,
                               const std::vector<double>& eps_values, int grid_points, int samples,
                               std::uint64_t seed) {
  require(!q_values.empty() && eps_values.size() >= 2, "remainder_sweep: need q values and two or more radii");
  RemainderSweep out;
  for (int q : q_values) {
    std::vector<double> le, lp;
    for (double eps : eps_values) {
      const TrustRegion<double> tr(x, eps);
      const Bundle<double> w = grid_bundle(problem, tr, q, grid_points);
      const double probe = remainder_probe(problem, w, samples, seed);
      out.points.push_back({q, eps, probe});
      le.push_back(std::log(eps));
      lp.push_back(std::log(probe));
    }
    out.slope[q] = least_squares_slope(le, lp);
  }
  return out;
}

std::vector<ModelSample> model_export(const Problem<double>& problem, const std::vector<double>& centers, int q,
                                      double lo, double hi, int points) {
  require(problem.dim() == 1, "model_export: one-dimensional problems only");
  require(hi > lo && points >= 2, "model_export: need hi > lo and two or more points");
  require(!centers.empty(), "model_export: no centers");
  const TrustRegion<double> tr(VecD::Constant(1, 0.5 * (lo + hi)), 0.5 * (hi - lo));
  Bundle<double> w(tr);
  for (double c : centers) w.add(Cut<double>(problem.oracle(VecD::Constant(1, c), q)));
  std::vector<ModelSample> out;
  out.reserve(points);
  for (int k = 0; k < points; ++k) {
    const double z = k + 1 == points ? hi : lo + (hi - lo) * k / (points - 1);
    const VecD zv = VecD::Constant(1, z);
    const auto mv = model_eval(w, zv);
    out.push_back({z, mv.value, problem.value(zv), mv.index});
  }
  return out;
}

}  // namespace hocp

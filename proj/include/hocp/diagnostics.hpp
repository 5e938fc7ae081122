#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "hocp/model.hpp"
#include "hocp/schedule.hpp"
#include "hocp/scalar.hpp"

namespace hocp {

struct MinNormResult {
  VecD point;
  /// Convex weights, one per input point.
  VecD weights;
  int iterations = 0;
};

/// Minimum-norm point of the convex hull of `points` (Wolfe's algorithm),
/// stopped once ||v||^2 - min_i v^T g_i <= tol.
MinNormResult min_norm_convex_hull(const std::vector<VecD>& points, double tol = 1e-12);

/// Norm of the min-norm element of the hull of all cut gradients (taken at
/// their own centers).
template <class Scalar>
double criticality_measure(const Bundle<Scalar>& w, double tol = 1e-12) {
  require(!w.empty(), "criticality_measure: empty bundle");
  std::vector<VecD> g;
  g.reserve(w.size());
  for (const auto& c : w.cuts()) g.push_back(to_double_vec<Scalar>(c.jet.gradient_at_center()));
  return min_norm_convex_hull(g, tol).point.norm();
}

struct RateReport {
  std::vector<double> distances;  ///< d_j as double (may underflow to 0)
  std::vector<double> log_distances;  ///< log d_j computed in the run's scalar type
  std::vector<double> eps;
  std::vector<bool> envelope_ok;
  std::vector<int> violations;  ///< 1-based j with d_j > eps_j
  /// Smallest j such that d_i <= eps_i for every recorded i >= j.
  int j0 = 1;
  /// Least-squares slope of log(L_{j+1} - L_j), L_j = -log d_j, against j.
  std::optional<double> order_slope;
  /// The same slope over the last three usable increments only; the early
  /// iterates of a run are pre-asymptotic and bias the full fit low.
  std::optional<double> tail_order_slope;
  /// Least-squares slope of log(-log d_j) against j.
  std::optional<double> loglog_slope;
  /// log d_{j+1} / log d_j for consecutive usable pairs.
  std::vector<double> step_ratios;
  /// log Q of the schedule, for comparison with order_slope.
  double schedule_log_q = 0;
};

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Builds a RateReport from log d_j, log eps_j (j = 1..J) and log Q.
RateReport rate_report_from_logs(const std::vector<double>& log_d, const std::vector<double>& log_eps, double log_q);

/// Rate diagnostics for distances d_1..d_J against a schedule. Requires at
/// least four positive distances.
template <class Scalar, class Schedule>
RateReport estimate_r_order(const std::vector<Scalar>& distances, const Schedule& schedule) {
  int positive = 0;
  for (const auto& d : distances)
    if (d > 0) ++positive;
  if (positive < 4) throw precondition_error("estimate_r_order: need at least four positive distances");
  std::vector<double> log_d, log_eps;
  using std::log;
  for (std::size_t j = 0; j < distances.size(); ++j) {
    const Scalar& d = distances[j];
    log_d.push_back(d > 0 ? to_double(Scalar(log(d))) : -INFINITY);
    log_eps.push_back(to_double(Scalar(log(eps_at(schedule, static_cast<int>(j) + 1)))));
  }
  return rate_report_from_logs(log_d, log_eps, std::log(to_double(schedule.Q())));
}

}  // namespace hocp

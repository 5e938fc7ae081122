#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hocp/bundle_loop.hpp"
#include "hocp/diagnostics.hpp"
#include "hocp/schedule.hpp"

namespace hocp {

enum class Termination { EpsThreshold, TrustRegionActive, MaxIterations, SubproblemDegraded, Converged, NotConverged };

std::string to_string(Termination t);

/// One row per performed outer iteration j (x^j is the iterate the bundle
/// was built around).
template <class Scalar>
struct TraceRow {
  int j = 0;
  Scalar eps;
  Scalar f;
  std::optional<Scalar> dist;
  int bundle_size = 0;
  int inner_iters = 0;
  /// Cumulative oracle (jet) calls after this iteration.
  long long oracle_calls = 0;
  bool boundary_active = false;
  /// Final gap f(z) - model(z) of the bundle loop.
  Scalar gap;
  double crit = 0;
};

struct LocalOptions {
  SolverStrategy strategy = SolverStrategy::Auto;
  SolverOptions solver;
  BundleInit init;
  BundleLimits limits;
  Norm norm = Norm::Euclidean;
  /// Stop once the trust region is active at some j >= 2.
  bool stop_on_active_trust_region = false;
  /// Stop as soon as a subproblem solve reports degraded quality.
  bool abort_on_degraded = false;
  int max_iter = 200;
  std::uint64_t seed = 0;
};

template <class Scalar>
struct LocalRunResult {
  /// x^1, ..., x^J; the last entry is the final point.
  std::vector<Vec<Scalar>> iterates;
  std::vector<Scalar> values;
  std::vector<TraceRow<Scalar>> trace;
  Termination termination = Termination::MaxIterations;
  /// Iteration at which the trust region was active (TrustRegionActive).
  int active_iteration = 0;
  long long total_oracle_calls = 0;
  long long total_objective_evals = 0;
  int degraded_solves = 0;
  int max_inner_hits = 0;
  int stagnations = 0;
  int max_inner_iterations = 0;
  /// eps_J of the final point.
  Scalar final_eps;
  bool q_below_p = false;

  const Vec<Scalar>& final_point() const { return iterates.back(); }
  const Scalar& final_value() const { return values.back(); }
};

/// Distance of x to the problem's known minimizer in the given norm.
template <class Scalar>
std::optional<Scalar> distance_to_minimizer(const Problem<Scalar>& problem, const Vec<Scalar>& x, Norm norm) {
  if (!problem.minimizer) return std::nullopt;
  const Vec<Scalar> d = x - *problem.minimizer;
  if (norm == Norm::Max) return Scalar(d.cwiseAbs().maxCoeff());
  using std::sqrt;
  return Scalar(sqrt(d.squaredNorm()));
}

/// Local superlinear method: x^{j+1} = model minimizer of the bundle built
/// around x^j with radius eps_j, until eps_j <= eps_thr.
template <class Scalar>
LocalRunResult<Scalar> run_local(const Problem<Scalar>& problem, const Vec<Scalar>& x1, const EpsSchedule<Scalar>& schedule,
                                 const Scalar& eps_thr, const LocalOptions& opt) {
  schedule.validate();
  require(eps_thr > 0, "run_local: eps_thr must be positive");
  require(opt.max_iter >= 1, "run_local: max_iter >= 1 required");
  if (x1.size() != problem.dim()) throw dimension_error("run_local: start point has wrong dimension");
  if (schedule.q > problem.max_order())
    throw precondition_error("run_local: problem '" + problem.name() + "' supports q <= " +
                             std::to_string(problem.max_order()));

  LocalRunResult<Scalar> res;
  res.q_below_p = schedule.q < schedule.p;
  MemoryStore<Scalar> memory;
  Vec<Scalar> x = x1;
  Scalar fx = problem.value(x);
  res.total_objective_evals = 1;
  res.iterates.push_back(x);
  res.values.push_back(fx);

  for (int j = 1;; ++j) {
    const Scalar eps = eps_at(schedule, j);
    res.final_eps = eps;
    if (eps <= eps_thr) {
      res.termination = Termination::EpsThreshold;
      break;
    }
    if (j > opt.max_iter) {
      res.termination = Termination::MaxIterations;
      break;
    }
    const TrustRegion<Scalar> tr(x, eps, opt.norm);
    const auto br = build_bundle(problem, tr, schedule.q, schedule.sigma, opt.init, opt.strategy, opt.solver,
                                 opt.limits, &memory, opt.seed + 0x632BE59BD9B4E019ULL * static_cast<std::uint64_t>(j));
    res.total_oracle_calls += br.oracle_calls;
    res.total_objective_evals += br.objective_evals;
    res.degraded_solves += br.degraded_solves;
    res.max_inner_hits += br.max_inner_hit ? 1 : 0;
    res.stagnations += br.stagnated ? 1 : 0;
    res.max_inner_iterations = std::max(res.max_inner_iterations, br.inner_iterations);

    TraceRow<Scalar> row;
    row.j = j;
    row.eps = eps;
    row.f = fx;
    row.dist = distance_to_minimizer(problem, x, opt.norm);
    row.bundle_size = br.bundle.size();
    row.inner_iters = br.inner_iterations;
    row.oracle_calls = res.total_oracle_calls;
    row.boundary_active = br.solution.boundary_active;
    row.gap = br.gap_history.back();
    row.crit = criticality_measure(br.bundle);
    res.trace.push_back(row);

    x = br.solution.z;
    fx = br.f_z;
    res.iterates.push_back(x);
    res.values.push_back(fx);

    if (opt.abort_on_degraded && br.degraded_solves > 0) {
      res.termination = Termination::SubproblemDegraded;
      res.final_eps = eps_at(schedule, j + 1);
      break;
    }
    if (opt.stop_on_active_trust_region && j >= 2 && br.solution.boundary_active) {
      res.termination = Termination::TrustRegionActive;
      res.active_iteration = j;
      res.final_eps = eps_at(schedule, j + 1);
      break;
    }
  }
  return res;
}

struct CauchyReport {
  double constant = 0;
  int j0 = 1;
  /// max over checked j of |x^j - x^J| / (C eps_j).
  double max_ratio = 0;
  std::vector<int> violations;
  bool ok = true;
};

/// Checks |x^j - x^J| <= C eps_j for every traced j >= j0, where x^J is the
/// final point and C = sum_l kappa^(Q^l - 1).
template <class Scalar>
CauchyReport cauchy_envelope(const LocalRunResult<Scalar>& run, const EpsSchedule<Scalar>& schedule, Norm norm,
                             int j0) {
  CauchyReport rep;
  const Scalar c = cauchy_constant(schedule);
  rep.constant = to_double(c);
  rep.j0 = j0;
  const TrustRegion<Scalar> at_final(run.final_point(), Scalar(1), norm);
  for (const auto& row : run.trace) {
    if (row.j < j0) continue;
    const Scalar d = at_final.distance(run.iterates[static_cast<std::size_t>(row.j) - 1]);
    const Scalar bound = c * row.eps;
    rep.max_ratio = std::max(rep.max_ratio, to_double(Scalar(d / bound)));
    if (d > bound) {
      rep.violations.push_back(row.j);
      rep.ok = false;
    }
  }
  return rep;
}

/// (f(x) - f(z)) / delta^p for the model minimizer z of a bundle built at x.
template <class Scalar>
Scalar decrease_measure(const Scalar& fx, const Scalar& delta, int p, const BundleLoopResult<Scalar>& br) {
  require(delta > 0, "decrease_measure: delta must be positive");
  using std::pow;
  return (fx - br.f_z) / pow(delta, Scalar(p));
}

template <class Scalar>
Scalar decrease_measure(const Problem<Scalar>& problem, const Vec<Scalar>& x, const Scalar& delta, int p,
                        const BundleLoopResult<Scalar>& br) {
  return decrease_measure(problem.value(x), delta, p, br);
}

struct GlobalConfig {
  double delta1 = 1.0;
  double delta_shrink = 0.5;
  double tau1 = 0.1;
  double tau_shrink = 0.5;
  int p = 1;
  int max_outer = 60;
  /// Accepted descent steps per outer iteration.
  int max_descent_steps = 200;
  /// Outer iterations allowed per local attempt.
  int local_budget = 100;

  void validate() const {
    require(delta1 > 0, "global: delta1 must be positive");
    require(delta_shrink > 0 && delta_shrink < 1, "global: delta_shrink must lie in (0,1)");
    require(tau1 > 0, "global: tau1 must be positive");
    require(tau_shrink > 0 && tau_shrink < 1, "global: tau_shrink must lie in (0,1)");
    require(p >= 1, "global: p >= 1 required");
    require(max_outer >= 1 && max_descent_steps >= 1 && local_budget >= 1, "global: caps must be positive");
  }
};

struct LocalAttempt {
  int outer = 0;
  double delta = 0;
  Termination termination = Termination::MaxIterations;
  int iterations = 0;
  bool successful = false;
  bool adopted = false;
};

template <class Scalar>
struct GlobalRunResult {
  Termination termination = Termination::NotConverged;
  Vec<Scalar> x;
  Scalar f;
  std::vector<LocalAttempt> attempts;
  /// Decrease measure of every descent-phase bundle.
  std::vector<double> lambda_history;
  /// Whether the known minimizer was inside the ball for that entry.
  std::vector<bool> lambda_minimizer_inside;
  std::optional<LocalRunResult<Scalar>> local;
  long long total_oracle_calls = 0;
  long long total_objective_evals = 0;
  int outer_iterations = 0;
};

/// Globalized method: descent steps while the decrease measure exceeds
/// tau_j, then a local attempt started with eps1 = Delta_j.
template <class Scalar>
GlobalRunResult<Scalar> run_global(const Problem<Scalar>& problem, const Vec<Scalar>& x0, const GlobalConfig& cfg,
                                   const EpsSchedule<Scalar>& local_template, const Scalar& eps_thr,
                                   const LocalOptions& local_opt) {
  cfg.validate();
  local_template.validate();
  GlobalRunResult<Scalar> res;
  Vec<Scalar> xh = x0;
  Scalar fh = problem.value(xh);
  res.total_objective_evals = 1;
  Scalar delta = Scalar(cfg.delta1);
  Scalar tau = Scalar(cfg.tau1);

  for (int j = 1; j <= cfg.max_outer; ++j) {
    res.outer_iterations = j;
    for (int i = 0; i < cfg.max_descent_steps; ++i) {
      const TrustRegion<Scalar> tr(xh, delta, local_opt.norm);
      MemoryStore<Scalar>* no_memory = nullptr;
      const auto br = build_bundle(problem, tr, local_template.q, local_template.sigma, BundleInit{},
                                   local_opt.strategy, local_opt.solver, local_opt.limits, no_memory,
                                   local_opt.seed + 7919ULL * static_cast<std::uint64_t>(j * 1000 + i));
      res.total_oracle_calls += br.oracle_calls;
      res.total_objective_evals += br.objective_evals;
      const Scalar lambda = decrease_measure(fh, delta, cfg.p, br);
      res.lambda_history.push_back(to_double(lambda));
      if (problem.minimizer) res.lambda_minimizer_inside.push_back(tr.contains(*problem.minimizer));
      else res.lambda_minimizer_inside.push_back(false);
      if (lambda < tau) break;
      xh = br.solution.z;
      fh = br.f_z;
    }

    EpsSchedule<Scalar> sched = local_template;
    sched.eps1 = delta;
    LocalOptions lo = local_opt;
    lo.stop_on_active_trust_region = true;
    lo.max_iter = cfg.local_budget;
    lo.seed = local_opt.seed + 104729ULL * static_cast<std::uint64_t>(j);
    auto lr = run_local(problem, xh, sched, eps_thr, lo);
    res.total_oracle_calls += lr.total_oracle_calls;
    res.total_objective_evals += lr.total_objective_evals;

    LocalAttempt att;
    att.outer = j;
    att.delta = to_double(delta);
    att.termination = lr.termination;
    att.iterations = static_cast<int>(lr.trace.size());
    att.successful = lr.termination == Termination::EpsThreshold || lr.termination == Termination::MaxIterations;
    if (att.successful) {
      res.attempts.push_back(att);
      res.termination = Termination::Converged;
      res.x = lr.final_point();
      res.f = lr.final_value();
      res.local = std::move(lr);
      return res;
    }
    // Keep the best point the failed attempt paid for.
    std::size_t best = 0;
    for (std::size_t k = 1; k < lr.values.size(); ++k)
      if (lr.values[k] < lr.values[best]) best = k;
    if (lr.values[best] < fh) {
      xh = lr.iterates[best];
      fh = lr.values[best];
      att.adopted = true;
    }
    res.attempts.push_back(att);
    delta *= Scalar(cfg.delta_shrink);
    tau *= Scalar(cfg.tau_shrink);
  }
  res.termination = Termination::NotConverged;
  res.x = xh;
  res.f = fh;
  return res;
}

}  // namespace hocp

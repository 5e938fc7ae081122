#pragma once

#include <cstdint>
#include <string>
#include <type_traits>
#include <vector>

#include "hocp/diagnostics.hpp"
#include "hocp/model.hpp"
#include "hocp/poly1d.hpp"

namespace hocp {

enum class SolverStrategy { Auto, Exact1D, LP, Smoothed };

std::string to_string(SolverStrategy s);
SolverStrategy parse_solver_strategy(const std::string& s);

struct SolverOptions {
  /// Target accuracy of the smoothed solver (t_min = max(tol, 1e-12)(1+|theta|))
  /// and pivot tolerance scale of the LP.
  double tol = 1e-10;
  /// Root tolerance of the 1-D solver relative to the radius; 0 picks 64
  /// machine epsilons of the active scalar type.
  double root_tol = 0;
  double tol_bnd = 1e-6;
  double tol_act = 1e-8;
  /// Random starts of the smoothed solver; negative means 2n.
  int n_rand = -1;
  int max_stages = 14;
  double homotopy_factor = 10;
  int max_newton = 60;
  std::uint64_t seed = 0;
};

struct SolverStats {
  int starts = 0;
  int inner_iterations = 0;
  int stages = 0;
  int candidates = 0;
};

template <class Scalar>
struct SubproblemSolution {
  Vec<Scalar> z;
  Scalar theta;
  bool boundary_active = false;
  /// Convex weights per cut; empty unless the boundary is inactive.
  std::vector<double> multipliers;
  SolverStats stats;
  bool degraded = false;
};

/// Weights over the cuts active at z with sum(w_k grad T_k(z)) of least norm.
template <class Scalar>
std::vector<double> kkt_multipliers(const Bundle<Scalar>& w, const Vec<Scalar>& z, double tol_act) {
  const std::vector<int> act = active_cuts(w, z, tol_act);
  std::vector<VecD> grads;
  for (int k : act) grads.push_back(to_double_vec<Scalar>(w[k].gradient(z)));
  const MinNormResult mn = min_norm_convex_hull(grads);
  std::vector<double> out(w.size(), 0.0);
  for (std::size_t i = 0; i < act.size(); ++i) out[act[i]] = mn.weights[static_cast<Eigen::Index>(i)];
  return out;
}

/// Fills theta, boundary flag and multipliers for a chosen z.
template <class Scalar>
void finish_solution(const Bundle<Scalar>& w, const TrustRegion<Scalar>& tr, const SolverOptions& opt,
                     SubproblemSolution<Scalar>& sol) {
  sol.theta = model_eval(w, sol.z).value;
  sol.boundary_active = tr.distance(sol.z) >= tr.radius * (1 - Scalar(opt.tol_bnd));
  sol.multipliers.clear();
  if (!sol.boundary_active) sol.multipliers = kkt_multipliers(w, sol.z, opt.tol_act);
}

/// Global minimizer of a 1-D model over [x - eps, x + eps] by enumerating
/// the endpoints, the critical points of every cut and the crossings of
/// every pair of cuts. Leftmost point wins ties.
template <class Scalar>
SubproblemSolution<Scalar> solve_exact_1d(const Bundle<Scalar>& w, const TrustRegion<Scalar>& tr,
                                          const SolverOptions& opt = {}) {
  if (tr.dim() != 1 || w.dim() != 1) throw precondition_error("solve_exact_1d: needs n = 1");
  if (w.empty()) throw precondition_error("solve_exact_1d: empty bundle");
  const Scalar eps = tr.radius;
  const Scalar rel = opt.root_tol > 0 ? Scalar(opt.root_tol) : Scalar(64) * machine_epsilon<Scalar>();
  const Scalar tol = rel * eps;
  const Scalar x = tr.center[0];

  std::vector<Poly1D<Scalar>> polys;
  polys.reserve(w.size());
  for (const auto& c : w.cuts()) polys.push_back(jet_restrict_1d(c.jet, x));

  std::vector<Scalar> cand{-eps, eps};
  auto add_roots = [&](const Poly1D<Scalar>& p) {
    if (p.degree() < 1) return;
    for (const auto& r : poly_roots_in_interval(p, -eps, eps, tol)) cand.push_back(r);
  };
  for (const auto& p : polys) add_roots(p.derivative());
  for (std::size_t i = 0; i < polys.size(); ++i)
    for (std::size_t j = i + 1; j < polys.size(); ++j) add_roots(polys[i] - polys[j]);
  std::sort(cand.begin(), cand.end());

  SubproblemSolution<Scalar> sol;
  sol.stats.candidates = static_cast<int>(cand.size());
  sol.stats.starts = 1;
  bool have = false;
  Scalar best = 0;
  Vec<Scalar> z(1);
  for (const auto& t : cand) {
    z[0] = x + t;
    const Scalar v = model_eval(w, z).value;
    if (!have || v < best) {
      have = true;
      best = v;
      sol.z = z;
    }
  }
  finish_solution(w, tr, opt, sol);
  return sol;
}

/// Epigraph LP for linear cuts over a max-norm box, solved by a dense
/// bounded-variable simplex.
SubproblemSolution<double> solve_lp_q1(const Bundle<double>& w, const TrustRegion<double>& tr,
                                       const SolverOptions& opt = {});

/// Log-sum-exp homotopy with trust-region Newton steps from several starts.
SubproblemSolution<double> solve_smoothed_multistart(const Bundle<double>& w, const TrustRegion<double>& tr,
                                                     const SolverOptions& opt = {});

/// Strategy that `solve` would pick for Auto.
template <class Scalar>
SolverStrategy resolve_strategy(SolverStrategy s, const Bundle<Scalar>& w, const TrustRegion<Scalar>& tr) {
  if (s != SolverStrategy::Auto) return s;
  if (tr.dim() == 1) return SolverStrategy::Exact1D;
  if (w.degree() <= 1 && tr.norm == Norm::Max) return SolverStrategy::LP;
  return SolverStrategy::Smoothed;
}

template <class Scalar>
SubproblemSolution<Scalar> solve(const Bundle<Scalar>& w, const TrustRegion<Scalar>& tr, const SolverOptions& opt,
                                 SolverStrategy strategy = SolverStrategy::Auto) {
  if (w.empty()) throw precondition_error("solve: empty bundle");
  if (w.dim() != tr.dim()) throw dimension_error("solve: bundle and trust region differ in dimension");
  for (const auto& c : w.cuts())
    if (!tr.contains(c.center())) throw precondition_error("solve: cut center outside trust region");
  const SolverStrategy s = resolve_strategy(strategy, w, tr);
  switch (s) {
    case SolverStrategy::Exact1D:
      return solve_exact_1d(w, tr, opt);
    case SolverStrategy::LP:
      if (w.degree() > 1) throw precondition_error("solve: lp strategy needs q = 1");
      if (tr.norm != Norm::Max) throw precondition_error("solve: lp strategy needs the max-norm");
      if constexpr (std::is_same_v<Scalar, double>) {
        return solve_lp_q1(w, tr, opt);
      } else {
        throw precondition_error("solve: lp strategy is binary64 only");
      }
    default:
      if (tr.norm != Norm::Euclidean) throw precondition_error("solve: smoothed strategy needs the Euclidean norm");
      if constexpr (std::is_same_v<Scalar, double>) {
        return solve_smoothed_multistart(w, tr, opt);
      } else {
        throw precondition_error("solve: smoothed strategy is binary64 only");
      }
  }
}

}  // namespace hocp

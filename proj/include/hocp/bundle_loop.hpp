#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hocp/model.hpp"
#include "hocp/problems.hpp"
#include "hocp/subproblem.hpp"

namespace hocp {

enum class InitStrategy { Singleton, MemoryReuse, RandomSample };

std::string to_string(InitStrategy s);
InitStrategy parse_init_strategy(const std::string& s);

struct BundleInit {
  InitStrategy strategy = InitStrategy::Singleton;
  /// Extra random points for RandomSample.
  int random_count = 1;
};

/// Every point the oracle was called at, keyed by exact coordinates.
template <class Scalar>
class MemoryStore {
 public:
  /// Returns false if a cut with exactly this center is already stored.
  bool add(const Cut<Scalar>& cut) {
    const Key k = key(cut.center());
    if (index_.count(k)) return false;
    index_.emplace(k, cuts_.size());
    cuts_.push_back(cut);
    return true;
  }

  const Cut<Scalar>* find(const Vec<Scalar>& x) const {
    auto it = index_.find(key(x));
    return it == index_.end() ? nullptr : &cuts_[it->second];
  }

  const std::vector<Cut<Scalar>>& cuts() const { return cuts_; }
  std::size_t size() const { return cuts_.size(); }

 private:
  using Key = std::vector<std::string>;
  static Key key(const Vec<Scalar>& x) {
    Key k;
    k.reserve(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) k.push_back(format_scalar(x[i]));
    return k;
  }
  std::vector<Cut<Scalar>> cuts_;
  std::map<Key, std::size_t> index_;
};

/// Stored cuts whose centers lie in tr, one per distinct center, in
/// insertion order.
template <class Scalar>
std::vector<Cut<Scalar>> memory_filter(const MemoryStore<Scalar>& memory, const TrustRegion<Scalar>& tr) {
  std::vector<Cut<Scalar>> out;
  for (const auto& c : memory.cuts())
    if (tr.contains(c.center())) out.push_back(c);
  return out;
}

struct BundleLimits {
  /// Cap on inner iterations; <= 0 picks 10|S| for finite |S|, else 50 + 10n.
  int max_inner = 0;
  /// Relative slack added to the gap threshold: noise_floor * u * scale,
  /// u the machine epsilon. 0 disables it.
  double noise_floor = 64;
};

template <class Scalar>
struct BundleLoopResult {
  Bundle<Scalar> bundle;
  SubproblemSolution<Scalar> solution;
  /// Objective value at solution.z.
  Scalar f_z;
  int inner_iterations = 0;
  /// Oracle (jet) calls made here, including initialization.
  int oracle_calls = 0;
  /// Objective evaluations made here (one per inner iteration).
  int objective_evals = 0;
  std::vector<Scalar> gap_history;
  std::vector<Scalar> theta_history;
  Scalar threshold;
  bool converged = false;
  bool max_inner_hit = false;
  bool stagnated = false;
  int degraded_solves = 0;
};

template <class Scalar>
int default_max_inner(const Problem<Scalar>& problem) {
  if (problem.selection_count && *problem.selection_count < 100000000LL)
    return static_cast<int>(10 * *problem.selection_count);
  return 50 + 10 * problem.dim();
}

/// Builds a bundle W in tr with f(z) - model(z) <= eps^(q+sigma) at the
/// model minimizer z. `memory` (optional) receives every new cut and feeds
/// MemoryReuse initialization.
template <class Scalar>
BundleLoopResult<Scalar> build_bundle(const Problem<Scalar>& problem, const TrustRegion<Scalar>& tr, int q,
                                      const Scalar& sigma, const BundleInit& init, SolverStrategy strategy,
                                      const SolverOptions& solver, const BundleLimits& limits,
                                      MemoryStore<Scalar>* memory = nullptr, std::uint64_t seed = 0) {
  require(sigma > 0 && sigma < 1, "build_bundle: sigma must lie in (0,1)");
  require(q >= 1, "build_bundle: q >= 1 required");
  if (init.strategy == InitStrategy::RandomSample)
    require(init.random_count >= 1, "build_bundle: RandomSample needs count >= 1");
  const Vec<Scalar>& x = tr.center;

  BundleLoopResult<Scalar> res;
  res.bundle = Bundle<Scalar>(tr);
  using std::pow;
  res.threshold = pow(tr.radius, Scalar(q) + sigma);

  auto call_oracle = [&](const Vec<Scalar>& at) {
    Cut<Scalar> cut(problem.oracle(at, q));
    ++res.oracle_calls;
    if (memory) memory->add(cut);
    return cut;
  };
  auto try_add = [&](Cut<Scalar> cut) {
    try {
      res.bundle.add(std::move(cut));
      return true;
    } catch (const duplicate_center_error&) {
      return false;
    }
  };

  // Initial bundle.
  if (init.strategy == InitStrategy::MemoryReuse && memory) {
    const Cut<Scalar>* at_x = memory->find(x);
    if (at_x && at_x->jet.degree() >= q) try_add(*at_x);
    else try_add(call_oracle(x));
    for (const auto& c : memory_filter(*memory, tr))
      if (c.jet.degree() >= q) try_add(c);
  } else {
    try_add(call_oracle(x));
    if (init.strategy == InitStrategy::RandomSample) {
      SplitMix64 rng(seed ^ 0x5bd1e995ULL);
      for (int i = 0; i < init.random_count; ++i) try_add(call_oracle(sample_ball(tr, rng)));
    }
  }

  const int max_inner = limits.max_inner > 0 ? limits.max_inner : default_max_inner(problem);
  SolverOptions sopt = solver;
  for (int it = 0;; ++it) {
    sopt.seed = seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(it + 1);
    res.solution = solve(res.bundle, tr, sopt, strategy);
    if (res.solution.degraded) ++res.degraded_solves;
    ++res.inner_iterations;
    const Vec<Scalar>& z = res.solution.z;
    res.f_z = problem.value(z);
    ++res.objective_evals;
    const Scalar gap = res.f_z - res.solution.theta;
    res.gap_history.push_back(gap);
    res.theta_history.push_back(res.solution.theta);

    Scalar slack = 0;
    if (limits.noise_floor > 0) {
      using std::abs;
      using std::sqrt;
      // Rounding level of f(z) and of the cut expansions at z.
      Scalar mag = abs(res.f_z) + abs(res.solution.theta);
      for (const auto& c : res.bundle.cuts()) {
        const Scalar lin = tr.radius * Scalar(sqrt(c.jet.gradient_at_center().squaredNorm()));
        mag = std::max<Scalar>(mag, abs(c.jet.value()) + lin);
      }
      slack = Scalar(limits.noise_floor) * machine_epsilon<Scalar>() * mag;
    }
    if (gap <= res.threshold + slack) {
      res.converged = true;
      break;
    }
    if (res.inner_iterations >= max_inner) {
      res.max_inner_hit = true;
      break;
    }
    if (!try_add(call_oracle(z))) {
      res.stagnated = true;
      break;
    }
  }
  return res;
}

}  // namespace hocp

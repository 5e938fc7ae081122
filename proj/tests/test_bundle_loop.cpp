#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "hocp/bundle_loop.hpp"
#include "support.hpp"

using namespace hocp;
using hocp::test::random_vec;

namespace {

VecD scalar_vec(double v) { return VecD::Constant(1, v); }

BundleLoopResult<double> build(const Problem<double>& p, const TrustRegion<double>& tr, int q, BundleInit init = {},
                               MemoryStore<double>* memory = nullptr, BundleLimits limits = {}) {
  return build_bundle(p, tr, q, 0.5, init, SolverStrategy::Auto, SolverOptions{}, limits, memory, 3);
}

}  // namespace

TEST_SUITE("bundle_loop") {
  TEST_CASE("memory filter keeps centers inside the region in insertion order") {
    const auto p = problem_maxroot(2);
    MemoryStore<double> memory;
    std::vector<VecD> pts;
    for (double a : {0.0, 0.3, -0.2, 0.9, 0.05}) {
      VecD v(2);
      v << a, -a / 2;
      pts.push_back(v);
      CHECK(memory.add(Cut<double>(p->oracle(v, 1))));
    }
    CHECK_FALSE(memory.add(Cut<double>(p->oracle(pts[1], 2))));
    CHECK(memory.size() == 5);
    CHECK(memory.find(pts[3]) != nullptr);
    CHECK(memory.find(VecD::Constant(2, 0.123)) == nullptr);

    const TrustRegion<double> tr(VecD::Zero(2), 0.4);
    const auto kept = memory_filter(memory, tr);
    std::vector<VecD> want;
    for (const auto& v : pts)
      if (v.norm() <= 0.4) want.push_back(v);
    REQUIRE(kept.size() == want.size());
    for (std::size_t i = 0; i < kept.size(); ++i) CHECK(kept[i].center() == want[i]);
  }

  TEST_CASE("first max-root bundle needs exactly one extra cut") {
    const auto p = problem_maxroot(1);
    const TrustRegion<double> tr(scalar_vec(0.1), 0.5);
    const auto r = build(*p, tr, 1);
    REQUIRE(r.gap_history.size() == 2);
    // cut at 0.1 is minimized at the left end -0.4 where f jumps to the other root
    const double by_hand = std::sqrt(0.65) - 0.5 - (std::sqrt(0.35) - 0.5 - 0.5 / (2 * std::sqrt(0.35)));
    CHECK(r.gap_history[0] == doctest::Approx(by_hand).epsilon(1e-12));
    CHECK(r.gap_history[0] == doctest::Approx(0.6372).epsilon(1e-4));
    CHECK(r.threshold == doctest::Approx(std::pow(0.5, 1.5)));
    CHECK(r.converged);
    CHECK(r.bundle.size() == 2);
    CHECK(r.oracle_calls == 2);
    CHECK(r.objective_evals == 2);
  }

  TEST_CASE("a constant function converges in one iteration") {
    test::PolynomialProblem constant(test::Polynomial{3, {{{0, 0, 0}, 2.5}}}, 3);
    const TrustRegion<double> tr(VecD::Constant(3, 0.2), 0.7);
    for (int q = 1; q <= 3; ++q) {
      const auto r = build(constant, tr, q);
      CHECK(r.inner_iterations == 1);
      CHECK(r.converged);
      CHECK(r.gap_history[0] == 0);
      CHECK(r.solution.theta == doctest::Approx(2.5));
    }
  }

  TEST_CASE("exact selection jets need at most one inner iteration per selection") {
    // sum-abs pieces are quartic polynomials, so q = 4 cuts are exact on their
    // own piece and every non-final iteration reaches a new piece
    SplitMix64 rng(5);
    for (int trial = 0; trial < 6; ++trial) {
      const auto p = problem_sumabs(generate_sumabs_instance(100 + trial, 3, 3));
      const TrustRegion<double> tr(random_vec(rng, 3, -0.3, 0.3), 0.5);
      const auto r = build(*p, tr, 4);
      CHECK(r.converged);
      CHECK(r.inner_iterations <= *p->selection_count);
    }
  }

  TEST_CASE("loop invariants on random sum-abs bundles") {
    SplitMix64 rng(8);
    const auto p = problem_sumabs(generate_sumabs_instance(4, 4, 3));
    for (int trial = 0; trial < 8; ++trial) {
      const TrustRegion<double> tr(random_vec(rng, 4, -0.5, 0.5), rng.uniform(0.05, 0.8));
      const int q = 1 + trial % 2;
      const auto r = build(*p, tr, q);
      const int cap = default_max_inner(*p);
      CHECK(r.inner_iterations <= cap);
      CHECK(r.inner_iterations == static_cast<int>(r.gap_history.size()));
      // one new cut per non-final inner iteration
      if (!r.stagnated) CHECK(r.bundle.size() == r.inner_iterations);
      CHECK(r.oracle_calls == r.bundle.size());
      for (std::size_t k = 1; k < r.theta_history.size(); ++k)
        CHECK(r.theta_history[k] >= r.theta_history[k - 1] - 1e-9 * (1 + std::abs(r.theta_history[k - 1])));
      for (const auto& c : r.bundle.cuts()) {
        const double fy = p->value(c.center());
        CHECK(model_gap(*p, r.bundle, c.center()) <= 1e-12 * std::max(1.0, std::abs(fy)));
      }
      CHECK(tr.contains(r.solution.z, 1e-12));
      CHECK(r.f_z == p->value(r.solution.z));
      if (r.converged) CHECK(r.gap_history.back() <= r.threshold * (1 + 1e-9) + 1e-12);
    }
  }

  TEST_CASE("random-sample initialization adds the requested points") {
    const auto p = problem_maxroot(3);
    const TrustRegion<double> tr(VecD::Constant(3, 0.1), 0.3);
    BundleInit init{InitStrategy::RandomSample, 4};
    BundleLimits one;
    one.max_inner = 1;
    const auto r = build(*p, tr, 2, init, nullptr, one);
    CHECK(r.bundle.size() == 5);
    CHECK(r.oracle_calls == 5);
    CHECK(r.inner_iterations == 1);
    init.random_count = 0;
    CHECK_THROWS_AS(build(*p, tr, 2, init), precondition_error);
  }

  TEST_CASE("memory reuse seeds the bundle with stored cuts") {
    const auto p = problem_sumabs(generate_sumabs_instance(9, 3, 4));
    MemoryStore<double> memory;
    const TrustRegion<double> first(VecD::Constant(3, 0.2), 0.5);
    const BundleInit reuse{InitStrategy::MemoryReuse, 1};
    const auto r1 = build(*p, first, 2, reuse, &memory);
    CHECK(memory.size() == static_cast<std::size_t>(r1.oracle_calls));

    const TrustRegion<double> second(r1.solution.z, 0.5);
    const auto stored = memory_filter(memory, second).size();
    const auto r2 = build(*p, second, 2, reuse, &memory);
    // the new center was never queried, everything else in range is reused
    CHECK(r2.bundle.size() >= static_cast<int>(stored) + 1);
    CHECK(r2.oracle_calls == r2.inner_iterations);

    // lower-order stored cuts are not reused for a higher-order bundle
    MemoryStore<double> low;
    low.add(Cut<double>(p->oracle(second.center, 1)));
    const auto r3 = build(*p, second, 2, reuse, &low);
    CHECK(r3.bundle[0].jet.degree() == 2);
  }

  TEST_CASE("argument checks") {
    const auto p = problem_maxroot(1);
    const TrustRegion<double> tr(scalar_vec(0.1), 0.5);
    CHECK_THROWS_AS(build_bundle(*p, tr, 1, 1.0, {}, SolverStrategy::Auto, {}, {}), precondition_error);
    CHECK_THROWS_AS(build_bundle(*p, tr, 0, 0.5, {}, SolverStrategy::Auto, {}, {}), precondition_error);
  }
}

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "hocp/bundle_loop.hpp"
#include "hocp/subproblem.hpp"
#include "support.hpp"

using namespace hocp;
using hocp::test::random_vec;

namespace {

VecD scalar_vec(double v) { return VecD::Constant(1, v); }

Bundle<double> bundle_of(const TrustRegion<double>& tr, const std::vector<TaylorJet<double>>& jets) {
  Bundle<double> w(tr);
  for (const auto& j : jets) w.add(Cut<double>(j, false));
  return w;
}

// min 1/2 d^T H d + g^T d over ||d|| <= r for SPD H: eigenbasis plus
// bisection on the multiplier.
VecD tr_quadratic_oracle(const MatD& h, const VecD& g, double r) {
  Eigen::SelfAdjointEigenSolver<MatD> es(h);
  const VecD lam = es.eigenvalues();
  const VecD gt = es.eigenvectors().transpose() * g;
  auto step = [&](double mu) {
    VecD d(g.size());
    for (Eigen::Index i = 0; i < g.size(); ++i) d[i] = -gt[i] / (lam[i] + mu);
    return d;
  };
  if (step(0).norm() <= r) return es.eigenvectors() * step(0);
  double lo = 0, hi = 1;
  while (step(hi).norm() > r) hi *= 2;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (step(mid).norm() > r ? lo : hi) = mid;
  }
  return es.eigenvectors() * step(hi);
}

// LP optimum over the box |z - x|_inf <= eps for linear cuts, by solving
// every square system of active cut and bound constraints.
double lp_vertex_enumeration(const Bundle<double>& w, const TrustRegion<double>& tr) {
  const int n = tr.dim(), k = w.size();
  double best = INFINITY;
  for (int mask = 1; mask < (1 << k); ++mask) {
    std::vector<int> cuts;
    for (int i = 0; i < k; ++i)
      if (mask >> i & 1) cuts.push_back(i);
    const int free_count = static_cast<int>(cuts.size()) - 1;
    if (free_count > n) continue;
    // choose which coordinates stay free, the rest sit at a bound
    std::vector<int> pick(n, 0);
    std::fill(pick.end() - free_count, pick.end(), 1);
    do {
      std::vector<int> fixed;
      for (int i = 0; i < n; ++i)
        if (!pick[i]) fixed.push_back(i);
      for (int signs = 0; signs < (1 << fixed.size()); ++signs) {
        VecD z = tr.center;
        for (std::size_t f = 0; f < fixed.size(); ++f) z[fixed[f]] += (signs >> f & 1) ? tr.radius : -tr.radius;
        // unknowns: free coordinates and theta
        MatD a(cuts.size(), free_count + 1);
        VecD b(cuts.size());
        for (std::size_t r = 0; r < cuts.size(); ++r) {
          const auto& jet = w[cuts[r]].jet;
          const VecD g = jet.gradient_at_center();
          double rhs = jet.value() - g.dot(jet.center);
          int col = 0;
          for (int i = 0; i < n; ++i) {
            if (pick[i]) a(r, col++) = g[i];
            else rhs += g[i] * z[i];
          }
          a(r, free_count) = -1;
          b[r] = -rhs;
        }
        Eigen::FullPivLU<MatD> lu(a);
        if (lu.rank() < free_count + 1) continue;
        const VecD sol = lu.solve(b);
        int col = 0;
        for (int i = 0; i < n; ++i)
          if (pick[i]) z[i] = sol[col++];
        if (!tr.contains(z, 1e-12)) continue;
        const double theta = sol[free_count];
        if (model_eval(w, z).value > theta + 1e-10) continue;
        best = std::min(best, theta);
      }
    } while (std::next_permutation(pick.begin(), pick.end()));
  }
  return best;
}

}  // namespace

TEST_SUITE("subproblem") {
  TEST_CASE("single linear cut over a Euclidean ball") {
    SplitMix64 rng(3);
    for (int n = 1; n <= 4; ++n) {
      const VecD x = random_vec(rng, n), g = random_vec(rng, n);
      const TrustRegion<double> tr(x, 0.7);
      const auto w = bundle_of(tr, {test::linear_jet(x, 2.0, g)});
      for (auto s : {SolverStrategy::Auto, SolverStrategy::Smoothed}) {
        if (n == 1 && s == SolverStrategy::Smoothed) continue;
        const auto sol = solve(w, tr, {}, s);
        CHECK((sol.z - (x - 0.7 * g / g.norm())).norm() <= 1e-8);
        CHECK(sol.theta == doctest::Approx(2.0 - 0.7 * g.norm()).epsilon(1e-10));
        CHECK(sol.boundary_active);
      }
    }
  }

  TEST_CASE("max-root linear cut hits the left endpoint") {
    const auto p = problem_maxroot(1);
    const TrustRegion<double> tr(scalar_vec(0.1), 0.5);
    Bundle<double> w(tr);
    w.add(Cut<double>(p->oracle(scalar_vec(0.1), 1)));
    const auto sol = solve(w, tr, {});
    CHECK(sol.z[0] == doctest::Approx(-0.4));
    CHECK(sol.boundary_active);
    CHECK(sol.multipliers.empty());
  }

  TEST_CASE("single SPD quadratic with interior minimizer") {
    SplitMix64 rng(8);
    for (int n = 1; n <= 4; ++n) {
      const VecD y = random_vec(rng, n), g = 0.1 * random_vec(rng, n);
      const MatD h = test::random_spd(rng, n, 1.0);
      const TrustRegion<double> tr(y, 5.0);
      const auto w = bundle_of(tr, {test::quadratic_jet(y, 0.3, g, h)});
      const auto sol = solve(w, tr, {});
      const VecD want = y - h.ldlt().solve(g);
      CHECK((sol.z - want).norm() <= 1e-8 * (1 + want.norm()));
      CHECK_FALSE(sol.boundary_active);
      REQUIRE(sol.multipliers.size() == 1);
      CHECK(sol.multipliers[0] == doctest::Approx(1));
    }
  }

  TEST_CASE("exact 1-D solver on hand bundles") {
    test::Polynomial sq{1, {{{2}, 1.0}}};
    const TrustRegion<double> tr(scalar_vec(0.1), 0.5);
    const auto w = bundle_of(tr, {sq.jet(scalar_vec(0.1), 2)});
    const auto sol = solve_exact_1d(w, tr);
    CHECK(std::abs(sol.z[0]) <= 1e-14);
    CHECK_FALSE(sol.boundary_active);

    const TrustRegion<double> unit(scalar_vec(0), 1);
    const auto v = bundle_of(unit, {test::linear_jet(scalar_vec(0.5), 0.5, scalar_vec(1)),
                                    test::linear_jet(scalar_vec(-0.5), 0.5, scalar_vec(-1))});
    const auto s2 = solve_exact_1d(v, unit);
    CHECK(std::abs(s2.z[0]) <= 1e-14);
    CHECK(std::abs(s2.theta) <= 1e-14);
    REQUIRE(s2.multipliers.size() == 2);
    CHECK(s2.multipliers[0] == doctest::Approx(0.5));
  }

  TEST_CASE("exact 1-D solver matches a dense grid on a max-root second iteration") {
    const auto p = problem_maxroot(1);
    const double sigma = 0.5;
    const TrustRegion<double> tr1(scalar_vec(0.1), 0.5);
    const auto first = build_bundle<double>(*p, tr1, 2, sigma, {}, SolverStrategy::Exact1D, {}, {});
    const double eps2 = 0.5 * std::pow(0.75, 1.5);
    const TrustRegion<double> tr2(first.solution.z, eps2);
    const auto second = build_bundle<double>(*p, tr2, 2, sigma, {}, SolverStrategy::Exact1D, {}, {});
    REQUIRE(second.bundle.size() == 2);
    const auto sol = solve_exact_1d(second.bundle, tr2);

    const int points = 1000000;
    double grid_min = INFINITY;
    for (int k = 0; k <= points; ++k) {
      const double z = tr2.center[0] - eps2 + 2 * eps2 * k / points;
      grid_min = std::min(grid_min, model_eval(second.bundle, scalar_vec(z)).value);
    }
    double lip = 0;
    for (const auto& c : second.bundle.cuts())
      for (double z : {tr2.center[0] - eps2, tr2.center[0] + eps2})
        lip = std::max(lip, std::abs(c.gradient(scalar_vec(z))[0]));
    const double root_tol = 64 * machine_epsilon<double>() * eps2;
    CHECK(sol.theta <= grid_min + 10 * root_tol);
    CHECK(grid_min - sol.theta <= lip * 2 * eps2 / points);
  }

  TEST_CASE("LP solver on hand bundles") {
    SplitMix64 rng(12);
    const VecD x = random_vec(rng, 4), g = random_vec(rng, 4);
    const TrustRegion<double> box(x, 0.3, Norm::Max);
    const auto w = bundle_of(box, {test::linear_jet(x, 1.0, g)});
    const auto sol = solve_lp_q1(w, box);
    for (int i = 0; i < 4; ++i) CHECK(sol.z[i] == doctest::Approx(x[i] - 0.3 * (g[i] > 0 ? 1 : -1)));
    CHECK(sol.theta == doctest::Approx(1.0 - 0.3 * g.lpNorm<1>()));

    const TrustRegion<double> unit(scalar_vec(0), 1, Norm::Max);
    const auto v = bundle_of(unit, {test::linear_jet(scalar_vec(0.5), 0.5, scalar_vec(1)),
                                    test::linear_jet(scalar_vec(-0.5), 0.5, scalar_vec(-1))});
    const auto s2 = solve_lp_q1(v, unit);
    CHECK(std::abs(s2.theta) <= 1e-14);
    CHECK(std::abs(s2.z[0]) <= 1e-14);
  }

  TEST_CASE("LP solver matches vertex enumeration") {
    SplitMix64 rng(19);
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 5;
      const VecD x = random_vec(rng, n);
      const TrustRegion<double> box(x, 0.5, Norm::Max);
      std::vector<TaylorJet<double>> jets;
      for (int k = 0; k < 3; ++k) jets.push_back(test::linear_jet(sample_ball(box, rng), rng.uniform(-1, 1), random_vec(rng, n)));
      const auto w = bundle_of(box, jets);
      const auto sol = solve_lp_q1(w, box);
      CHECK(sol.theta == doctest::Approx(lp_vertex_enumeration(w, box)).epsilon(1e-10));
      CHECK(box.contains(sol.z));
    }
  }

  TEST_CASE("smoothed solver in a degenerate valley") {
    const TrustRegion<double> tr(VecD::Zero(2), 1);
    VecD e1 = VecD::Zero(2);
    e1[0] = 1;
    // |z_0| from two cuts centered at +-e1/2; every point with z_0 = 0 is optimal
    const auto w = bundle_of(tr, {test::linear_jet(0.5 * e1, 0.5, e1), test::linear_jet(-0.5 * e1, 0.5, -e1)});
    const auto sol = solve_smoothed_multistart(w, tr);
    CHECK(std::abs(sol.z[0]) <= 1e-8);
    CHECK(std::abs(sol.theta) <= 1e-8);
    CHECK(tr.contains(sol.z));
  }

  TEST_CASE("single convex quadratic cuts match the eigenbasis trust-region solution") {
    SplitMix64 rng(27);
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 1 + trial % 3;
      const VecD y = random_vec(rng, n), g = random_vec(rng, n, -3, 3);
      const MatD h = test::random_spd(rng, n, 0.1);
      const double r = rng.uniform(0.1, 2);
      const TrustRegion<double> tr(y, r);
      const auto w = bundle_of(tr, {test::quadratic_jet(y, 0, g, h)});
      const VecD want = y + tr_quadratic_oracle(h, g, r);
      const auto sol = n == 1 ? solve_smoothed_multistart(w, tr) : solve(w, tr, {});
      CHECK(sol.theta == doctest::Approx(model_eval(w, want).value).epsilon(1e-8).scale(1));
    }
  }

  TEST_CASE("half-and-half first subproblem beats a random-search baseline") {
    const auto p = problem_halfhalf();
    const VecD x1 = VecD::Constant(8, 20.08);
    const TrustRegion<double> tr(x1, 30);
    Bundle<double> w(tr);
    w.add(Cut<double>(p->oracle(x1, 2)));
    const auto sol = solve(w, tr, {});
    SplitMix64 rng(101);
    double best = INFINITY;
    for (int s = 0; s < 10000; ++s) best = std::min(best, model_eval(w, sample_ball(tr, rng)).value);
    CHECK(sol.theta <= best + 1e-4);
    // the single cut is a convex quadratic: compare with the closed form too
    const auto& jet = w[0].jet;
    const VecD want = x1 + tr_quadratic_oracle(jet_hessian(jet, x1), jet.gradient_at_center(), 30);
    CHECK(sol.theta == doctest::Approx(model_eval(w, want).value).epsilon(1e-8));
  }

  TEST_CASE("feasibility, dominance and strategy agreement") {
    SplitMix64 rng(33);
    const auto fig = problem_fig1();
    for (int trial = 0; trial < 30; ++trial) {
      const VecD x = scalar_vec(rng.uniform(-1.2, 1.2));
      const double eps = rng.uniform(0.05, 0.6);
      const TrustRegion<double> ball(x, eps), box(x, eps, Norm::Max);
      Bundle<double> wb(ball), wx(box);
      for (int k = 0; k < 4; ++k) {
        const VecD y = sample_ball(ball, rng);
        wb.add(Cut<double>(fig->oracle(y, 1)));
        wx.add(Cut<double>(fig->oracle(y, 1)));
      }
      const auto exact = solve_exact_1d(wb, ball);
      const auto lp = solve_lp_q1(wx, box);
      const auto smooth = solve_smoothed_multistart(wb, ball);
      CHECK(lp.theta == doctest::Approx(exact.theta).epsilon(1e-6).scale(1));
      CHECK(smooth.theta == doctest::Approx(exact.theta).epsilon(1e-6).scale(1));
      for (const auto* s : {&exact, &lp, &smooth}) {
        CHECK(ball.contains(s->z, 1e-12));
        for (const auto& c : wb.cuts()) CHECK(s->theta <= model_eval(wb, c.center()).value);
        CHECK(s->theta <= model_eval(wb, x).value);
      }
    }
  }

  TEST_CASE("multipliers certify interior solutions") {
    SplitMix64 rng(45);
    const auto p = problem_sumabs(generate_sumabs_instance(2, 3, 3));
    int interior = 0;
    for (int trial = 0; trial < 30; ++trial) {
      const TrustRegion<double> tr(random_vec(rng, 3, -0.05, 0.05), 0.5);
      Bundle<double> w(tr);
      w.add(Cut<double>(p->oracle(tr.center, 2)));
      for (int k = 0; k < 5; ++k) w.add(Cut<double>(p->oracle(sample_ball(tr, rng), 2)));
      const auto sol = solve(w, tr, {});
      CHECK(tr.contains(sol.z, 1e-12));
      if (sol.boundary_active) continue;
      ++interior;
      REQUIRE(sol.multipliers.size() == static_cast<std::size_t>(w.size()));
      double sum = 0, scale = 0;
      VecD comb = VecD::Zero(3);
      for (int k = 0; k < w.size(); ++k) {
        CHECK(sol.multipliers[k] >= 0);
        sum += sol.multipliers[k];
        const VecD g = w[k].gradient(sol.z);
        comb += sol.multipliers[k] * g;
        scale = std::max(scale, g.norm());
      }
      CHECK(sum == doctest::Approx(1).epsilon(1e-12));
      CHECK(comb.norm() <= 1e-6 * std::max(1.0, scale));
    }
    CHECK(interior >= 5);
  }

  TEST_CASE("strategy preconditions") {
    const TrustRegion<double> ball(VecD::Zero(2), 1);
    Bundle<double> w(ball);
    w.add(Cut<double>(test::quadratic_jet(VecD::Zero(2), 0, VecD::Ones(2), MatD::Identity(2, 2)), false));
    CHECK_THROWS_AS(solve(w, ball, {}, SolverStrategy::LP), precondition_error);
    CHECK_THROWS_AS(solve(w, ball, {}, SolverStrategy::Exact1D), precondition_error);
    CHECK_THROWS_AS(solve(Bundle<double>(ball), ball, {}), precondition_error);
    CHECK(parse_solver_strategy("lp") == SolverStrategy::LP);
    CHECK_THROWS_AS(parse_solver_strategy("simplex"), config_error);
  }
}

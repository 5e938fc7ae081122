#include <cmath>

#include "doctest.h"
#include "hocp/diagnostics.hpp"
#include "hocp/drivers.hpp"
#include "hocp/runner.hpp"
#include "support.hpp"

using namespace hocp;
using hocp::test::random_vec;

namespace {

VecD vec2(double a, double b) {
  VecD v(2);
  v << a, b;
  return v;
}

// Smallest norm over a barycentric grid of the triangle spanned by three points.
double simplex_grid_min(const std::vector<VecD>& pts, int steps) {
  double best = INFINITY;
  for (int i = 0; i <= steps; ++i)
    for (int k = 0; i + k <= steps; ++k) {
      const double a = double(i) / steps, b = double(k) / steps;
      best = std::min(best, (a * pts[0] + b * pts[1] + (1 - a - b) * pts[2]).norm());
    }
  return best;
}

EpsSchedule<double> schedule(int q, int p) {
  EpsSchedule<double> s;
  s.q = q;
  s.p = p;
  return s;
}

}  // namespace

TEST_SUITE("diagnostics") {
  TEST_CASE("min-norm point of two unit vectors") {
    const auto r = min_norm_convex_hull({vec2(1, 0), vec2(0, 1)});
    CHECK(r.point[0] == doctest::Approx(0.5));
    CHECK(r.point[1] == doctest::Approx(0.5));
    CHECK(r.weights[0] == doctest::Approx(0.5));
    CHECK(r.weights[1] == doctest::Approx(0.5));
    const auto single = min_norm_convex_hull({vec2(3, -4)});
    CHECK(single.point.norm() == doctest::Approx(5));
    CHECK_THROWS_AS(min_norm_convex_hull({}), precondition_error);
  }

  TEST_CASE("min-norm point against a barycentric grid and the optimality certificate") {
    SplitMix64 rng(61);
    for (int trial = 0; trial < 40; ++trial) {
      std::vector<VecD> pts;
      for (int i = 0; i < 3; ++i) pts.push_back(random_vec(rng, 2, -2, 2));
      const auto r = min_norm_convex_hull(pts);
      const double grid = simplex_grid_min(pts, 400);
      CHECK(r.point.norm() <= grid + 1e-12);
      // grid spacing 1/400 of a triangle with diameter <= 4*sqrt(2)
      CHECK(r.point.norm() >= grid - 4 * std::sqrt(2.0) / 400);
      // v is minimal iff v^T g_i >= |v|^2 for every generator
      for (const auto& g : pts) CHECK(r.point.dot(g) >= r.point.squaredNorm() - 1e-10);
      CHECK(r.weights.minCoeff() >= 0);
      CHECK(r.weights.sum() == doctest::Approx(1).epsilon(1e-12));
      VecD comb = VecD::Zero(2);
      for (int i = 0; i < 3; ++i) comb += r.weights[i] * pts[i];
      CHECK((comb - r.point).norm() <= 1e-12);
    }
  }

  TEST_CASE("min-norm point is scale equivariant and vanishes when the hull contains 0") {
    SplitMix64 rng(62);
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 2 + trial % 5;
      std::vector<VecD> pts, scaled;
      for (int i = 0; i < 4; ++i) pts.push_back(random_vec(rng, n));
      const double c = rng.uniform(0.1, 10);
      for (const auto& g : pts) scaled.push_back(c * g);
      const VecD v = min_norm_convex_hull(pts).point;
      CHECK((min_norm_convex_hull(scaled).point - c * v).norm() <= 1e-10 * c * (1 + v.norm()));

      std::vector<VecD> around{pts[0], -pts[0], pts[1]};
      CHECK(min_norm_convex_hull(around).point.norm() <= 1e-10);
    }
  }

  TEST_CASE("criticality measure of small bundles") {
    const TrustRegion<double> tr(VecD::Zero(2), 1);
    Bundle<double> w(tr);
    w.add(Cut<double>(test::linear_jet(vec2(0.5, 0), 0, vec2(1, 0)), false));
    CHECK(criticality_measure(w) == doctest::Approx(1));
    w.add(Cut<double>(test::linear_jet(vec2(-0.5, 0), 0, vec2(-1, 0.5)), false));
    // distance from 0 to the line through (1,0) and (-1,0.5)
    CHECK(criticality_measure(w) == doctest::Approx(0.5 / std::sqrt(4.25)).epsilon(1e-9));
    w.add(Cut<double>(test::linear_jet(vec2(0, 0.5), 0, vec2(0, -1)), false));
    CHECK(criticality_measure(w) <= 1e-12);
  }

  TEST_CASE("least-squares slope of exact lines") {
    CHECK(least_squares_slope({1, 2, 3, 4}, {3, 5, 7, 9}) == doctest::Approx(2));
    CHECK(least_squares_slope({0, 1}, {1, 1}) == doctest::Approx(0).scale(1));
  }

  TEST_CASE("rate estimate recovers log Q on distances that follow the schedule") {
    for (int q = 1; q <= 4; ++q) {
      const auto s = schedule(q, 1);
      std::vector<double> d;
      for (int j = 1; j <= 5; ++j) d.push_back(0.3 * eps_at(s, j));
      const auto rep = estimate_r_order(d, s);
      REQUIRE(rep.order_slope.has_value());
      CHECK(*rep.order_slope == doctest::Approx(std::log(s.Q())).epsilon(1e-8));
      CHECK(rep.j0 == 1);
      CHECK(rep.violations.empty());
    }
    // a single late violation moves j0 past it
    const auto s = schedule(2, 1);
    std::vector<double> d;
    for (int j = 1; j <= 6; ++j) d.push_back(0.5 * eps_at(s, j));
    d[2] = 2 * eps_at(s, 3);
    const auto rep = estimate_r_order(d, s);
    CHECK(rep.violations == std::vector<int>{3});
    CHECK(rep.j0 == 4);
    CHECK_THROWS_AS(estimate_r_order(std::vector<double>{1e-3, 1e-5, 0.0, 0.0}, s), precondition_error);
  }

  TEST_CASE("linearly converging distances have order slope near zero") {
    const auto s = schedule(1, 1);
    std::vector<double> d;
    for (int j = 0; j < 8; ++j) d.push_back(0.1 * std::pow(0.5, j));
    const auto rep = estimate_r_order(d, s);
    REQUIRE(rep.order_slope.has_value());
    CHECK(std::abs(*rep.order_slope) <= 1e-9);
    for (double r : rep.step_ratios) CHECK(r > 1);
  }

  TEST_CASE("extended max-root q=5 run reaches order 5.5") {
    const RunConfig cfg = load_run_config(std::string(HOCP_SOURCE_DIR) + "/configs/ex61_q5_extended.json");
    const RunOutcome out = execute_run(cfg);
    CHECK(out.exit_code == 0);
    const auto& rr = out.summary.at("rate_report");
    REQUIRE(rr.at("tail_order_slope").is_number());
    CHECK(rr.at("tail_order_slope").get<double>() >= std::log(5.5) - 0.1);
    CHECK(rr.at("j0").get<int>() == 1);
    const auto& ratios = rr.at("step_ratios");
    CHECK(ratios.back().get<double>() == doctest::Approx(5.5).epsilon(0.02));
  }

  TEST_CASE("half-and-half run ends with a vanishing criticality measure") {
    const auto p = problem_halfhalf();
    EpsSchedule<double> s = schedule(2, 2);
    s.eps1 = 30;
    LocalOptions opt;
    opt.init.strategy = InitStrategy::MemoryReuse;
    opt.strategy = SolverStrategy::Smoothed;
    const auto r = run_local(*p, VecD(VecD::Constant(p->dim(), 20.08)), s, 1e-3, opt);
    REQUIRE(r.trace.size() >= 4);
    const double first = r.trace.front().crit;
    // the tail need not be monotone, only small
    for (std::size_t k = r.trace.size() - 3; k < r.trace.size(); ++k) CHECK(r.trace[k].crit <= 1e-6 * first);
  }
}

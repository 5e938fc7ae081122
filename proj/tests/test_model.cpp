#include <cmath>

#include "doctest.h"
#include "hocp/diagnostics.hpp"
#include "hocp/experiments.hpp"
#include "hocp/model.hpp"
#include "support.hpp"

using namespace hocp;
using hocp::test::random_vec;

namespace {

Bundle<double> bundle_at(const Problem<double>& p, const TrustRegion<double>& tr, const std::vector<VecD>& centers,
                         int q) {
  Bundle<double> w(tr);
  for (const auto& y : centers) w.add(Cut<double>(p.oracle(y, q)));
  return w;
}

VecD scalar_vec(double v) { return VecD::Constant(1, v); }

// Independent least-squares slope for the remainder regression.
double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_SUITE("cutting_plane_model") {
  TEST_CASE("single linear cut of the max-root function") {
    const auto p = problem_maxroot(1);
    const TrustRegion<double> tr(scalar_vec(0.1), 0.5);
    const auto w = bundle_at(*p, tr, {scalar_vec(0.1)}, 1);
    const auto mv = model_eval(w, scalar_vec(-0.4));
    const double by_hand = std::sqrt(0.35) - 0.5 - 0.5 / (2 * std::sqrt(0.35));
    CHECK(mv.index == 0);
    CHECK(mv.value == doctest::Approx(by_hand).epsilon(1e-14));
    CHECK(mv.value == doctest::Approx(w[0].eval(scalar_vec(-0.4))));

    const double gap = model_gap(*p, w, scalar_vec(-0.4));
    CHECK(gap == doctest::Approx((std::sqrt(0.65) - 0.5) - by_hand).epsilon(1e-14));
    CHECK(gap == doctest::Approx(0.6372).epsilon(1e-4));
    CHECK(model_gap(*p, w, scalar_vec(0.1)) == 0);
    CHECK(active_cuts(w, scalar_vec(0.3)) == std::vector<int>{0});
  }

  TEST_CASE("coinciding expansions are both active") {
    // x^2 expanded at two centers gives the same polynomial
    test::PolynomialProblem sq(test::Polynomial{1, {{{2}, 1.0}}}, 4);
    const TrustRegion<double> tr(scalar_vec(0), 1);
    const auto w = bundle_at(sq, tr, {scalar_vec(0.25), scalar_vec(-0.5)}, 2);
    CHECK(active_cuts(w, scalar_vec(0.7)) == std::vector<int>{0, 1});
  }

  TEST_CASE("demo function model switches between exactly two cuts at a kink") {
    const auto p = problem_fig1();
    const TrustRegion<double> tr(scalar_vec(0), 1.5);
    std::vector<VecD> centers;
    for (double c : {-1.2, -0.9, -0.3, 0.75, 1.25}) centers.push_back(scalar_vec(c));
    const auto w = bundle_at(*p, tr, centers, 2);
    int kinks = 0;
    double prev = -1.5;
    int prev_index = model_eval(w, scalar_vec(prev)).index;
    for (int k = 1; k <= 3000; ++k) {
      const double z = -1.5 + 3.0 * k / 3000;
      const int index = model_eval(w, scalar_vec(z)).index;
      if (index != prev_index) {
        double lo = prev, hi = z;
        for (int it = 0; it < 80; ++it) {
          const double mid = 0.5 * (lo + hi);
          (model_eval(w, scalar_vec(mid)).index == prev_index ? lo : hi) = mid;
        }
        const auto act = active_cuts(w, scalar_vec(0.5 * (lo + hi)));
        CHECK(act.size() == 2);
        ++kinks;
      }
      prev = z;
      prev_index = index;
    }
    CHECK(kinks >= 2);
  }

  TEST_CASE("interpolation and monotonicity on random bundles") {
    SplitMix64 rng(17);
    const auto p = problem_sumabs(generate_sumabs_instance(4, 3, 3));
    for (int trial = 0; trial < 10; ++trial) {
      const VecD x = random_vec(rng, 3, -0.5, 0.5);
      const TrustRegion<double> tr(x, 0.3);
      Bundle<double> w(tr);
      std::vector<VecD> zs;
      for (int s = 0; s < 20; ++s) zs.push_back(sample_ball(tr, rng));
      std::vector<double> before(zs.size(), -INFINITY);
      for (int k = 0; k < 6; ++k) {
        w.add(Cut<double>(p->oracle(sample_ball(tr, rng), 2)));
        for (std::size_t s = 0; s < zs.size(); ++s) {
          const double now = model_eval(w, zs[s]).value;
          CHECK(now >= before[s]);
          before[s] = now;
        }
        for (const auto& c : w.cuts()) {
          const double fy = p->value(c.center());
          const auto mv = model_eval(w, c.center());
          CHECK(mv.value >= fy - 1e-12 * std::max(1.0, std::abs(fy)));
          CHECK(model_gap(*p, w, c.center()) <= 1e-12 * std::max(1.0, std::abs(fy)));
        }
      }
    }
  }

  TEST_CASE("remainder vanishes when f is a polynomial of degree q") {
    SplitMix64 rng(23);
    for (int q = 1; q <= 3; ++q) {
      test::PolynomialProblem poly(test::random_polynomial(rng, 2, q), 6);
      const TrustRegion<double> tr(random_vec(rng, 2), 0.5);
      const auto w = bundle_at(poly, tr, {tr.center, sample_ball(tr, rng)}, q);
      CHECK(remainder_probe(poly, w, 200, 3) <= 1e-13);
    }
  }

  TEST_CASE("remainder scales like eps^(q+1) on grid-dense bundles") {
    const auto p = problem_fig1();
    const VecD kink = scalar_vec(fig1_kink());
    const std::vector<double> radii{0.2, 0.1, 0.05, 0.025};
    for (int q = 1; q <= 3; ++q) {
      std::vector<double> le, lp;
      for (double eps : radii) {
        const auto w = grid_bundle(*p, TrustRegion<double>(kink, eps), q, 9);
        le.push_back(std::log(eps));
        lp.push_back(std::log(remainder_probe(*p, w, 2000, 11)));
      }
      CHECK(slope(le, lp) >= (q + 1) - 0.3);
      if (q == 2) {
        const double ratio = std::exp(lp[2] - lp[1]);
        CHECK(ratio >= 0.125 / 2);
        CHECK(ratio <= 0.125 * 2);
      }
    }
    const auto sweep = remainder_sweep(*p, kink, {1, 2, 3}, radii, 9, 2000, 11);
    for (int q = 1; q <= 3; ++q) CHECK(sweep.slope.at(q) >= (q + 1) - 0.3);
  }

  TEST_CASE("single cut on a smooth branch obeys the fitted remainder constant") {
    const auto p = problem_fig1();
    const VecD y = scalar_vec(-0.6);
    for (int q = 1; q <= 3; ++q) {
      double k_hat = 0;
      for (double eps : {0.2, 0.1}) {
        const TrustRegion<double> tr(y, eps);
        const auto w = bundle_at(*p, tr, {y}, q);
        k_hat = std::max(k_hat, remainder_probe(*p, w, 500, 5) / std::pow(eps, q + 1));
      }
      for (double eps : {0.05, 0.025}) {
        const TrustRegion<double> tr(y, eps);
        const auto w = bundle_at(*p, tr, {y}, q);
        CHECK(remainder_probe(*p, w, 500, 5) <= 2 * k_hat * std::pow(eps, q + 1));
      }
    }
  }

  TEST_CASE("bundle and trust-region bookkeeping") {
    const auto p = problem_maxroot(2);
    VecD x(2);
    x << 0.5, 0.1;
    TrustRegion<double> ball(x, 0.1);
    Bundle<double> w(ball);
    w.add(Cut<double>(p->oracle(x, 1)));
    CHECK_THROWS_AS(w.add(Cut<double>(p->oracle(x, 1))), duplicate_center_error);
    VecD far = x;
    far[0] += 0.2;
    CHECK_THROWS_AS(w.add(Cut<double>(p->oracle(far, 1))), precondition_error);
    CHECK_THROWS_AS(model_eval(Bundle<double>(ball), x), precondition_error);

    const VecD proj = ball.project(far);
    CHECK(ball.distance(proj) == doctest::Approx(0.1));
    TrustRegion<double> box(x, 0.1, Norm::Max);
    VecD corner = x;
    corner[0] += 0.1;
    corner[1] -= 0.1;
    CHECK(box.contains(corner));
    CHECK_FALSE(ball.contains(corner));
    CHECK_THROWS_AS(TrustRegion<double>(x, 0.0), precondition_error);
  }
}

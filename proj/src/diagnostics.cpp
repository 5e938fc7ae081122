#include "hocp/diagnostics.hpp"

#include <algorithm>
#include <limits>

namespace hocp {

namespace {

// Point of least norm in the affine hull of the columns of p (weights sum to 1).
VecD affine_minimizer(const MatD& p) {
  const int k = static_cast<int>(p.cols());
  MatD kkt = MatD::Zero(k + 1, k + 1);
  kkt.topLeftCorner(k, k) = p.transpose() * p;
  kkt.block(0, k, k, 1).setOnes();
  kkt.block(k, 0, 1, k).setOnes();
  VecD rhs = VecD::Zero(k + 1);
  rhs[k] = 1;
  const VecD sol = kkt.completeOrthogonalDecomposition().solve(rhs);
  return sol.head(k);
}

}  // namespace

MinNormResult min_norm_convex_hull(const std::vector<VecD>& points, double tol) {
  require(!points.empty(), "min_norm_convex_hull: empty point set");
  const int n = static_cast<int>(points[0].size());
  const int m = static_cast<int>(points.size());
  for (const auto& p : points)
    if (p.size() != n) throw dimension_error("min_norm_convex_hull: inconsistent dimensions");

  double scale = 0;
  for (const auto& p : points) scale = std::max(scale, p.squaredNorm());
  const double zero_w = 1e-14;

  std::vector<int> corral;
  std::vector<double> lambda;
  {
    int best = 0;
    for (int i = 1; i < m; ++i)
      if (points[i].squaredNorm() < points[best].squaredNorm()) best = i;
    corral.push_back(best);
    lambda.push_back(1.0);
  }

  MinNormResult res;
  auto current = [&]() {
    VecD x = VecD::Zero(n);
    for (std::size_t i = 0; i < corral.size(); ++i) x += lambda[i] * points[corral[i]];
    return x;
  };

  const int max_major = 50 * (m + n) + 100;
  for (int major = 0; major < max_major; ++major) {
    ++res.iterations;
    const VecD x = current();
    int j = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      const double v = points[i].dot(x);
      if (v < best) {
        best = v;
        j = i;
      }
    }
    if (x.squaredNorm() - best <= tol * std::max(1.0, scale)) break;
    if (std::find(corral.begin(), corral.end(), j) != corral.end()) break;
    corral.push_back(j);
    lambda.push_back(0.0);

    for (int minor = 0; minor < m + 5; ++minor) {
      MatD p(n, static_cast<Eigen::Index>(corral.size()));
      for (std::size_t i = 0; i < corral.size(); ++i) p.col(static_cast<Eigen::Index>(i)) = points[corral[i]];
      const VecD alpha = affine_minimizer(p);
      bool interior = true;
      for (Eigen::Index i = 0; i < alpha.size(); ++i)
        if (alpha[i] <= zero_w) interior = false;
      if (interior) {
        for (std::size_t i = 0; i < corral.size(); ++i) lambda[i] = alpha[static_cast<Eigen::Index>(i)];
        break;
      }
      // Step from lambda toward alpha until a weight hits zero.
      double theta = 1.0;
      for (std::size_t i = 0; i < corral.size(); ++i) {
        const double a = alpha[static_cast<Eigen::Index>(i)];
        if (a <= zero_w && lambda[i] - a > 0) theta = std::min(theta, lambda[i] / (lambda[i] - a));
      }
      for (std::size_t i = 0; i < corral.size(); ++i)
        lambda[i] = (1 - theta) * lambda[i] + theta * alpha[static_cast<Eigen::Index>(i)];
      std::vector<int> nc;
      std::vector<double> nl;
      for (std::size_t i = 0; i < corral.size(); ++i) {
        if (lambda[i] > zero_w) {
          nc.push_back(corral[i]);
          nl.push_back(lambda[i]);
        }
      }
      if (nc.empty()) {
        nc.push_back(corral.back());
        nl.push_back(1.0);
      }
      double s = 0;
      for (double v : nl) s += v;
      for (double& v : nl) v /= s;
      corral = std::move(nc);
      lambda = std::move(nl);
    }
  }

  res.weights = VecD::Zero(m);
  for (std::size_t i = 0; i < corral.size(); ++i) res.weights[corral[i]] += lambda[i];
  res.point = current();
  return res;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "least_squares_slope: need two or more points");
  const double k = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= k;
  my /= k;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  require(sxx > 0, "least_squares_slope: degenerate abscissae");
  return sxy / sxx;
}

RateReport rate_report_from_logs(const std::vector<double>& log_d, const std::vector<double>& log_eps, double log_q) {
  require(log_d.size() == log_eps.size(), "rate report: size mismatch");
  RateReport rep;
  rep.schedule_log_q = log_q;
  const int count = static_cast<int>(log_d.size());
  for (int j = 0; j < count; ++j) {
    rep.log_distances.push_back(log_d[j]);
    rep.distances.push_back(std::exp(log_d[j]));
    rep.eps.push_back(std::exp(log_eps[j]));
    // Compare in log space so that values below the binary64 range still count.
    const bool ok = log_d[j] <= log_eps[j] + 1e-12 * std::max(1.0, std::abs(log_eps[j]));
    rep.envelope_ok.push_back(ok);
    if (!ok) rep.violations.push_back(j + 1);
  }
  rep.j0 = rep.violations.empty() ? 1 : rep.violations.back() + 1;

  // L_j = -log d_j, usable while d_j < 1 and finite.
  std::vector<double> js, ll;
  for (int j = 0; j < count; ++j) {
    if (std::isfinite(log_d[j]) && log_d[j] < 0) {
      js.push_back(j + 1.0);
      ll.push_back(std::log(-log_d[j]));
    }
  }
  if (js.size() >= 2) rep.loglog_slope = least_squares_slope(js, ll);

  std::vector<double> dj, dl;
  for (int j = 0; j + 1 < count; ++j) {
    if (!std::isfinite(log_d[j]) || !std::isfinite(log_d[j + 1])) continue;
    const double inc = log_d[j] - log_d[j + 1];
    if (inc > 0) {
      dj.push_back(j + 1.0);
      dl.push_back(std::log(inc));
    }
    if (log_d[j] != 0) rep.step_ratios.push_back(log_d[j + 1] / log_d[j]);
  }
  if (dj.size() >= 2) rep.order_slope = least_squares_slope(dj, dl);
  if (dj.size() >= 3) {
    const std::vector<double> tj(dj.end() - 3, dj.end()), tl(dl.end() - 3, dl.end());
    rep.tail_order_slope = least_squares_slope(tj, tl);
  }
  return rep;
}

}  // namespace hocp

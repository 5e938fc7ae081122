#include "hocp/subproblem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace hocp {

std::string to_string(SolverStrategy s) {
  switch (s) {
    case SolverStrategy::Auto: return "auto";
    case SolverStrategy::Exact1D: return "exact1d";
    case SolverStrategy::LP: return "lp";
    case SolverStrategy::Smoothed: return "smoothed";
  }
  return "auto";
}

SolverStrategy parse_solver_strategy(const std::string& s) {
  if (s == "auto") return SolverStrategy::Auto;
  if (s == "exact1d") return SolverStrategy::Exact1D;
  if (s == "lp") return SolverStrategy::LP;
  if (s == "smoothed") return SolverStrategy::Smoothed;
  throw config_error("unknown solver strategy '" + s + "' (expected auto, exact1d, lp or smoothed)");
}

// ---------------------------------------------------------------------------
// Dense bounded-variable simplex for
//
//   min theta  s.t.  a_k^T u - theta + s_k = r_k,  0 <= u <= 1,  s >= 0,
//
// with z = x + eps (u+ - u-), u = (u+, u-). Starting from u = 0 keeps
// coordinates that no cut cares about at the center. theta is free and
// enters the basis first; a free basic variable never limits the ratio
// test, so it stays basic.

namespace {

class EpigraphSimplex {
 public:
  EpigraphSimplex(const MatD& a, const VecD& r) : n_(static_cast<int>(a.cols())), m_(static_cast<int>(a.rows())) {
    cols_ = n_ + 1 + m_;
    t_ = MatD::Zero(m_, cols_);
    t_.leftCols(n_) = a;
    t_.col(n_).setConstant(-1.0);
    t_.rightCols(m_).setIdentity();
    d_ = VecD::Zero(cols_);
    d_[n_] = 1.0;
    x_ = VecD::Zero(cols_);
    basis_.resize(m_);
    is_basic_.assign(cols_, false);
    for (int k = 0; k < m_; ++k) {
      basis_[k] = n_ + 1 + k;
      is_basic_[n_ + 1 + k] = true;
      x_[n_ + 1 + k] = r[k];
    }
    scale_ = std::max(1.0, a.cwiseAbs().maxCoeff());

    // theta enters where the slack is smallest, i.e. at the largest cut.
    int kstar = 0;
    for (int k = 1; k < m_; ++k)
      if (x_[n_ + 1 + k] < x_[n_ + 1 + kstar]) kstar = k;
    pivot(kstar, n_, -x_[n_ + 1 + kstar]);
  }

  /// Runs primal simplex; returns false if the pivot cap was hit.
  bool run(int max_pivots) {
    int degenerate = 0;
    for (int it = 0; it < max_pivots; ++it) {
      const bool bland = degenerate > 30;
      int q = -1;
      int dir = 0;
      double best = 0;
      const double dtol = 1e-12 * scale_;
      for (int j = 0; j < cols_; ++j) {
        if (is_basic_[j] || j == n_) continue;
        int dj = 0;
        if (j < n_) {
          if (x_[j] <= 0.5 && d_[j] < -dtol) dj = 1;
          if (x_[j] > 0.5 && d_[j] > dtol) dj = -1;
        } else if (d_[j] < -dtol) {
          dj = 1;
        }
        if (dj == 0) continue;
        if (bland) {
          q = j;
          dir = dj;
          break;
        }
        if (std::abs(d_[j]) > best) {
          best = std::abs(d_[j]);
          q = j;
          dir = dj;
        }
      }
      if (q < 0) return true;
      ++pivots_;

      // Ratio test.
      double tmax = q < n_ ? 1.0 : std::numeric_limits<double>::infinity();
      int leave = -1;
      const double ptol = 1e-11;
      for (int i = 0; i < m_; ++i) {
        const int b = basis_[i];
        if (b == n_) continue;
        const double rate = -t_(i, q) * dir;  // change of x_b per unit step
        if (std::abs(rate) <= ptol) continue;
        double lim;
        if (rate < 0) {
          lim = std::max(0.0, x_[b]) / -rate;
        } else {
          if (b >= n_) continue;  // slack without upper bound
          lim = std::max(0.0, 1.0 - x_[b]) / rate;
        }
        const bool better = lim < tmax - 1e-15 ||
                            (leave >= 0 && lim <= tmax + 1e-15 &&
                             (bland ? basis_[i] < basis_[leave] : std::abs(t_(i, q)) > std::abs(t_(leave, q))));
        if (better) {
          tmax = lim;
          leave = i;
        }
      }
      if (!std::isfinite(tmax)) return true;  // cannot happen for a bounded epigraph
      degenerate = tmax <= 1e-13 ? degenerate + 1 : 0;
      if (leave < 0) {
        // Bound flip of a box variable.
        for (int i = 0; i < m_; ++i) x_[basis_[i]] -= t_(i, q) * dir * tmax;
        x_[q] = dir > 0 ? 1.0 : 0.0;
        continue;
      }
      pivot(leave, q, dir * tmax);
    }
    return false;
  }

  VecD w() const {
    VecD out = x_.head(n_);
    for (int i = 0; i < n_; ++i) out[i] = std::clamp(out[i], 0.0, 1.0);
    return out;
  }

  /// Nonnegative constraint weights normalized to sum one.
  VecD duals() const {
    VecD y = d_.tail(m_).cwiseMax(0.0);
    const double s = y.sum();
    if (s > 0) y /= s;
    return y;
  }

  int pivots() const { return pivots_; }

 private:
  // Entering column q moves by delta and replaces the basic variable of row r.
  void pivot(int r, int q, double delta) {
    for (int i = 0; i < m_; ++i) x_[basis_[i]] -= t_(i, q) * delta;
    x_[q] += delta;
    const int out = basis_[r];
    // Snap the leaving variable onto its bound.
    if (out < n_) x_[out] = x_[out] > 0.5 ? 1.0 : 0.0;
    else if (out > n_) x_[out] = 0.0;

    const double piv = t_(r, q);
    t_.row(r) /= piv;
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double f = t_(i, q);
      if (f != 0) t_.row(i) -= f * t_.row(r);
    }
    const double dq = d_[q];
    if (dq != 0) d_ -= dq * t_.row(r).transpose();
    is_basic_[out] = false;
    is_basic_[q] = true;
    basis_[r] = q;
  }

  int n_, m_, cols_;
  MatD t_;
  VecD d_;
  VecD x_;
  std::vector<int> basis_;
  std::vector<bool> is_basic_;
  double scale_ = 1;
  int pivots_ = 0;
};

}  // namespace

SubproblemSolution<double> solve_lp_q1(const Bundle<double>& w, const TrustRegion<double>& tr,
                                       const SolverOptions& opt) {
  if (w.degree() > 1) throw precondition_error("solve_lp_q1: cuts must be linear (q = 1)");
  if (tr.norm != Norm::Max) throw precondition_error("solve_lp_q1: needs the max-norm trust region");
  const int n = tr.dim(), m = w.size();
  const double eps = tr.radius;
  const VecD& x = tr.center;
  MatD a(m, 2 * n);
  VecD r(m);
  for (int k = 0; k < m; ++k) {
    const auto& jet = w[k].jet;
    const VecD g = jet.gradient_at_center();
    a.row(k).head(n) = eps * g.transpose();
    a.row(k).tail(n) = -eps * g.transpose();
    r[k] = -(jet.value() + g.dot(x - jet.center));
  }
  EpigraphSimplex lp(a, r);
  const bool ok = lp.run(200 * (2 * n + m + 10));

  SubproblemSolution<double> sol;
  const VecD u = lp.w();
  sol.z = tr.project(x + eps * (u.head(n) - u.tail(n)));
  sol.stats.starts = 1;
  sol.stats.inner_iterations = lp.pivots();
  sol.degraded = !ok;
  finish_solution(w, tr, opt, sol);
  const VecD y = lp.duals();
  sol.multipliers.assign(y.data(), y.data() + y.size());
  return sol;
}

// ---------------------------------------------------------------------------
// Smoothed multistart

namespace {

/// Cut stored as value, gradient and Hessian at its center when its degree
/// is at most two; general jets fall back to tensor contraction.
struct DenseCut {
  const TaylorJet<double>* jet = nullptr;
  bool quadratic = true;
  double c = 0;
  VecD y, g;
  MatD h;

  double value(const VecD& z) const {
    if (!quadratic) return jet_eval(*jet, z);
    const VecD d = z - y;
    return c + g.dot(d) + 0.5 * d.dot(h * d);
  }
  VecD gradient(const VecD& z) const {
    if (!quadratic) return jet_gradient(*jet, z);
    return g + h * (z - y);
  }
  MatD hessian(const VecD& z) const {
    if (!quadratic) return jet_hessian(*jet, z);
    return h;
  }
};

/// argmin 1/2 u^T H u + c^T u subject to ||u|| <= r.
VecD trust_region_step(const MatD& hm, const VecD& c, double r) {
  const int n = static_cast<int>(c.size());
  Eigen::SelfAdjointEigenSolver<MatD> es(hm);
  const VecD& lam = es.eigenvalues();
  const MatD& q = es.eigenvectors();
  const VecD b = q.transpose() * c;
  auto step = [&](double mu) {
    VecD u = VecD::Zero(n);
    for (int i = 0; i < n; ++i) {
      const double den = lam[i] + mu;
      if (den > 0) u -= (b[i] / den) * q.col(i);
    }
    return u;
  };
  const double lmin = lam[0];
  const double lam_scale = std::max(1e-300, lam.cwiseAbs().maxCoeff());
  if (lmin > 1e-14 * lam_scale) {
    const VecD u = step(0);
    if (u.norm() <= r) return u;
  }
  double lo = std::max(0.0, -lmin);
  double hi = lo + c.norm() / r + lam_scale + 1.0;
  // Hard case: even just above lo the step stays inside the ball.
  const double lo_eps = lo + 1e-14 * std::max(1.0, lo + lam_scale);
  if (step(lo_eps).norm() < r) {
    VecD u = step(lo_eps);
    const double rest = std::sqrt(std::max(0.0, r * r - u.squaredNorm()));
    const VecD e = q.col(0);
    // Pick the sign that lowers the quadratic.
    const VecD up = u + rest * e, um = u - rest * e;
    auto val = [&](const VecD& v) { return 0.5 * v.dot(hm * v) + c.dot(v); };
    return val(up) <= val(um) ? up : um;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (step(mid).norm() > r) lo = mid;
    else hi = mid;
  }
  VecD u = step(hi);
  const double nu = u.norm();
  if (nu > r) u *= r / nu;
  return u;
}

struct Smoothed {
  double phi = 0;
  double model = 0;
  VecD grad;
  MatD hess;
};

class SmoothedSolver {
 public:
  SmoothedSolver(const Bundle<double>& w, const TrustRegion<double>& tr, const SolverOptions& opt)
      : tr_(tr), opt_(opt) {
    for (const auto& cut : w.cuts()) {
      DenseCut d;
      d.jet = &cut.jet;
      d.y = cut.center();
      d.quadratic = cut.jet.degree() <= 2;
      if (d.quadratic) {
        const int n = tr.dim();
        d.c = cut.jet.value();
        d.g = cut.jet.degree() >= 1 ? cut.jet.gradient_at_center() : VecD::Zero(n);
        d.h = cut.jet.degree() >= 2 ? jet_hessian(cut.jet, cut.center()) : MatD::Zero(n, n);
      }
      cuts_.push_back(std::move(d));
    }
  }

  double model(const VecD& z) const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& c : cuts_) m = std::max(m, c.value(z));
    return m;
  }

  Smoothed smoothed(const VecD& z, double t, bool with_hessian) const {
    const int k = static_cast<int>(cuts_.size());
    const int n = tr_.dim();
    VecD vals(k);
    for (int i = 0; i < k; ++i) vals[i] = cuts_[i].value(z);
    Smoothed s;
    s.model = vals.maxCoeff();
    VecD wts = ((vals.array() - s.model) / t).exp();
    const double sum = wts.sum();
    wts /= sum;
    s.phi = s.model + t * std::log(sum);
    s.grad = VecD::Zero(n);
    std::vector<VecD> grads(k);
    for (int i = 0; i < k; ++i) {
      if (wts[i] < 1e-300) continue;
      grads[i] = cuts_[i].gradient(z);
      s.grad += wts[i] * grads[i];
    }
    if (with_hessian) {
      s.hess = MatD::Zero(n, n);
      MatD outer = MatD::Zero(n, n);
      for (int i = 0; i < k; ++i) {
        if (wts[i] < 1e-300) continue;
        s.hess += wts[i] * cuts_[i].hessian(z);
        outer += wts[i] * grads[i] * grads[i].transpose();
      }
      s.hess += (outer - s.grad * s.grad.transpose()) / t;
    }
    return s;
  }

  double phi(const VecD& z, double t) const {
    double m = -std::numeric_limits<double>::infinity();
    std::vector<double> vals;
    vals.reserve(cuts_.size());
    for (const auto& c : cuts_) {
      vals.push_back(c.value(z));
      m = std::max(m, vals.back());
    }
    double sum = 0;
    for (double v : vals) sum += std::exp((v - m) / t);
    return m + t * std::log(sum);
  }

  struct StartResult {
    VecD z;
    double value;
    bool reached_tmin;
    int newton;
    int stages;
  };

  StartResult run_start(VecD z) const {
    const VecD& x = tr_.center;
    const double eps = tr_.radius;
    z = tr_.project(z);
    double spread = 0;
    {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (const auto& c : cuts_) {
        const double v = c.value(x);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      spread = hi - lo;
    }
    double t = std::max(eps, spread);
    StartResult res{z, 0, false, 0, 0};
    VecD last_dir = VecD::Zero(z.size());
    for (int stage = 0;; ++stage) {
      ++res.stages;
      // Proximal Newton on phi: the step minimizes the quadratic model plus
      // sigma/2 |d|^2 over the region. sigma grows after poor steps, which
      // keeps progress going in narrow curved valleys and along the boundary.
      double sigma = 0;
      for (int it = 0; it < opt_.max_newton; ++it) {
        ++res.newton;
        const Smoothed s = smoothed(z, t, true);
        const VecD v = z - x;
        const MatD hp = s.hess + sigma * MatD::Identity(z.size(), z.size());
        const VecD d = trust_region_step(hp, s.grad - hp * v, eps) - v;
        const double pred = -(s.grad.dot(d) + 0.5 * d.dot(s.hess * d));
        const double dnorm = d.norm();
        const bool tiny_step = dnorm <= 1e-15 * (eps + z.norm());
        const bool tiny_pred = !(pred > 1e-16 * (1 + std::abs(s.phi)));
        if (tiny_step || (tiny_pred && sigma == 0)) break;
        const VecD zn = tr_.project(z + d);
        const double rho = tiny_pred ? -1 : (s.phi - phi(zn, t)) / pred;
        if (rho > 1e-4) {
          z = zn;
          last_dir = d;
          if (rho > 0.75) sigma = sigma < 1e-12 * s.hess.norm() ? 0 : 0.25 * sigma;
        } else {
          sigma = std::max(4 * sigma, 1e-8 * (1 + s.hess.norm()));
          if (sigma > 1e20 * (1 + s.hess.norm())) break;
        }
      }
      const double tmin = std::max(opt_.tol, 1e-12) * (1 + std::abs(model(z)));
      if (t <= tmin) {
        res.reached_tmin = true;
        break;
      }
      if (res.stages >= opt_.max_stages) break;
      t = std::max(t / opt_.homotopy_factor, tmin);
    }
    // Polish on the true model along the last descent direction.
    double best = model(z);
    if (last_dir.norm() > 0) {
      for (double a : {1.0, 0.5, 0.25, 0.125, 2.0, -0.5}) {
        const VecD zn = tr_.project(z + a * last_dir);
        const double v = model(zn);
        if (v < best) {
          best = v;
          z = zn;
        }
      }
    }
    res.z = z;
    res.value = best;
    return res;
  }

 private:
  const TrustRegion<double>& tr_;
  const SolverOptions& opt_;
  std::vector<DenseCut> cuts_;
};

bool lex_less(const VecD& a, const VecD& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

}  // namespace

SubproblemSolution<double> solve_smoothed_multistart(const Bundle<double>& w, const TrustRegion<double>& tr,
                                                     const SolverOptions& opt) {
  if (tr.norm != Norm::Euclidean) throw precondition_error("solve_smoothed_multistart: needs the Euclidean norm");
  if (w.empty()) throw precondition_error("solve_smoothed_multistart: empty bundle");
  const int n = tr.dim();
  SmoothedSolver solver(w, tr, opt);

  std::vector<VecD> starts;
  for (const auto& c : w.cuts()) starts.push_back(c.center());
  starts.push_back(tr.center);
  SplitMix64 rng(opt.seed);
  const int n_rand = opt.n_rand < 0 ? 2 * n : opt.n_rand;
  for (int i = 0; i < n_rand; ++i) starts.push_back(sample_ball(tr, rng));

  SubproblemSolution<double> sol;
  bool have = false;
  double best = 0;
  bool best_degraded = false;
  auto consider = [&](const VecD& z, double v, bool degraded) {
    if (!have || v < best || (v == best && lex_less(z, sol.z))) {
      have = true;
      best = v;
      sol.z = z;
      best_degraded = degraded;
    }
  };
  for (const auto& s0 : starts) {
    const VecD p = tr.project(s0);
    consider(p, solver.model(p), false);
    const auto r = solver.run_start(p);
    ++sol.stats.starts;
    sol.stats.inner_iterations += r.newton;
    sol.stats.stages = std::max(sol.stats.stages, r.stages);
    consider(r.z, r.value, !r.reached_tmin);
  }
  sol.degraded = best_degraded;
  finish_solution(w, tr, opt, sol);
  return sol;
}

}  // namespace hocp

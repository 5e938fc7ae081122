#include "hocp/problems.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "hocp/rng.hpp"

namespace hocp {

// ---------------------------------------------------------------------------
// sum-abs

SumAbsInstance generate_sumabs_instance(std::uint64_t seed, int n, int m) {
  require(n >= 1, "sumabs: n >= 1 required");
  require(m >= 1 && m <= n + 1, "sumabs: 1 <= m <= n+1 required");
  SplitMix64 rng(seed);
  SumAbsInstance inst;
  inst.seed = seed;
  inst.n = n;
  inst.m = m;

  for (int attempt = 1;; ++attempt) {
    inst.lambda.resize(m);
    for (int i = 0; i < m; ++i) inst.lambda[i] = rng.uniform(0.5, 1.5);
    inst.lambda /= inst.lambda.sum();

    inst.g.assign(m, VecD::Zero(n));
    VecD acc = VecD::Zero(n);
    for (int i = 0; i + 1 < m; ++i) {
      for (int k = 0; k < n; ++k) inst.g[i][k] = rng.normal();
      acc += inst.lambda[i] * inst.g[i];
    }
    inst.g[m - 1] = -acc / inst.lambda[m - 1];

    if (m == 1) {
      inst.attempts = attempt;
      break;
    }
    MatD diff(n, m - 1);
    double scale = 0;
    for (int i = 0; i < m; ++i) scale = std::max(scale, inst.g[i].norm());
    for (int i = 0; i + 1 < m; ++i) diff.col(i) = inst.g[i] - inst.g[m - 1];
    Eigen::ColPivHouseholderQR<MatD> qr(diff);
    qr.setThreshold(1e-10 * std::max(1.0, scale) / std::max(1.0, diff.cwiseAbs().maxCoeff()));
    if (qr.rank() == m - 1) {
      inst.attempts = attempt;
      break;
    }
    require(attempt < 1000, "sumabs: could not draw affinely independent gradients");
  }

  inst.H.assign(m, MatD::Zero(n, n));
  for (int i = 0; i < m; ++i) {
    MatD q(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) q(r, c) = rng.normal();
    const MatD h = q.transpose() * q;
    inst.H[i] = 0.5 * (h + h.transpose()) + 0.1 * MatD::Identity(n, n);
  }
  inst.c.resize(m);
  for (int i = 0; i < m; ++i) inst.c[i] = rng.uniform(0.5, 1.5);
  return inst;
}

SumAbsProblem::SumAbsProblem(SumAbsInstance inst) : inst_(std::move(inst)) {
  const int n = inst_.n, m = inst_.m;
  require(n >= 1 && m >= 1, "sumabs: empty instance");
  if (static_cast<int>(inst_.g.size()) != m || static_cast<int>(inst_.H.size()) != m || inst_.c.size() != m)
    throw dimension_error("sumabs: instance arrays do not match m");
  for (int i = 0; i < m; ++i)
    if (inst_.g[i].size() != n || inst_.H[i].rows() != n || inst_.H[i].cols() != n)
      throw dimension_error("sumabs: instance arrays do not match n");
  minimizer = VecD::Zero(n);
  optimal_value = 0.0;
  growth_order = 2;
  if (m < 63) selection_count = 1LL << m;
}

double SumAbsProblem::term(int i, const VecD& x) const {
  const double r = x.squaredNorm();
  return inst_.g[i].dot(x) + 0.5 * x.dot(inst_.H[i] * x) + inst_.c[i] * r * r / 24.0;
}

double SumAbsProblem::value(const VecD& x) const {
  if (x.size() != inst_.n) throw dimension_error("sumabs: query has wrong dimension");
  double s = 0;
  for (int i = 0; i < inst_.m; ++i) s += std::abs(term(i, x));
  return s;
}

bool SumAbsProblem::is_smooth_at(const VecD& x) const {
  for (int i = 0; i < inst_.m; ++i)
    if (term(i, x) == 0) return false;
  return true;
}

OracleResponse<double> SumAbsProblem::oracle(const VecD& x, int q) const {
  check_query(x, q);
  const int n = inst_.n;
  VecD gs = VecD::Zero(n);
  MatD hs = MatD::Zero(n, n);
  double cs = 0;
  OracleResponse<double> res;
  res.value = 0;
  for (int i = 0; i < inst_.m; ++i) {
    const double t = term(i, x);
    if (t == 0) res.flagged = true;
    const double s = t < 0 ? -1.0 : 1.0;
    res.value += std::abs(t);
    gs += s * inst_.g[i];
    hs += s * inst_.H[i];
    cs += s * inst_.c[i];
  }
  const double r = x.squaredNorm();
  res.jet.center = x;
  res.jet.tensors.push_back(SymTensor<double>::scalar(res.value, n));
  if (q >= 1) res.jet.tensors.push_back(SymTensor<double>::vector(gs + hs * x + (cs * r / 6.0) * x));
  if (q >= 2) {
    MatD h2 = hs + (cs / 3.0) * x * x.transpose();
    h2.diagonal().array() += cs * r / 6.0;
    res.jet.tensors.push_back(SymTensor<double>::matrix(h2));
  }
  if (q >= 3) {
    res.jet.tensors.emplace_back(n, 3, [&](std::span<const int> id) {
      const int i = id[0], j = id[1], k = id[2];
      double v = 0;
      if (i == j) v += x[k];
      if (i == k) v += x[j];
      if (j == k) v += x[i];
      return cs / 3.0 * v;
    });
  }
  if (q >= 4) {
    res.jet.tensors.emplace_back(n, 4, [&](std::span<const int> id) {
      const int i = id[0], j = id[1], k = id[2], l = id[3];
      double v = 0;
      if (i == j && k == l) v += 1;
      if (i == k && j == l) v += 1;
      if (i == l && j == k) v += 1;
      return cs / 3.0 * v;
    });
  }
  for (int m = 5; m <= q; ++m) res.jet.tensors.emplace_back(n, m);
  return res;
}

// ---------------------------------------------------------------------------
// max-eig

MaxEigInstance generate_maxeig_instance(std::uint64_t seed, int n, int m) {
  require(n >= 1 && m >= 1, "maxeig: n >= 1 and m >= 1 required");
  SplitMix64 rng(seed);
  MaxEigInstance inst;
  inst.seed = seed;
  inst.n = n;
  inst.m = m;
  inst.A.reserve(n + 1);
  for (int i = 0; i <= n; ++i) {
    MatD mm(m, m);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) mm(r, c) = rng.normal();
    inst.A.push_back(0.5 * (mm + mm.transpose()));
  }
  Eigen::SelfAdjointEigenSolver<MatD> es(inst.A[0], Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues()[m - 1];
  if (top < 1.0) inst.A[0].diagonal().array() += 1.0 - top;
  return inst;
}

MaxEigProblem::MaxEigProblem(MaxEigInstance inst, int growth) : inst_(std::move(inst)) {
  require(inst_.n >= 1 && inst_.m >= 1, "maxeig: empty instance");
  if (static_cast<int>(inst_.A.size()) != inst_.n + 1) throw dimension_error("maxeig: need n+1 matrices");
  for (const auto& a : inst_.A) {
    if (a.rows() != inst_.m || a.cols() != inst_.m) throw dimension_error("maxeig: matrix size mismatch");
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 0)
      throw precondition_error("maxeig: matrices must be symmetric");
  }
  growth_order = growth;
  if (inst_.reference_point) {
    if (inst_.reference_point->size() != inst_.n) throw dimension_error("maxeig: reference point dimension");
    minimizer = *inst_.reference_point;
  }
}

MatD MaxEigProblem::matrix(const VecD& x) const {
  if (x.size() != inst_.n) throw dimension_error("maxeig: query has wrong dimension");
  MatD a = inst_.A[0];
  for (int i = 0; i < inst_.n; ++i)
    if (x[i] != 0) a += x[i] * inst_.A[i + 1];
  return a;
}

double MaxEigProblem::gap_threshold(const MatD& a) const {
  return 1e-12 * std::max(1e-300, a.cwiseAbs().rowwise().sum().maxCoeff());
}

double MaxEigProblem::value(const VecD& x) const {
  // Same decomposition as oracle(), so both report bit-identical values.
  Eigen::SelfAdjointEigenSolver<MatD> es(matrix(x));
  return es.eigenvalues()[inst_.m - 1];
}

bool MaxEigProblem::is_smooth_at(const VecD& x) const {
  const MatD a = matrix(x);
  if (inst_.m == 1) return true;
  Eigen::SelfAdjointEigenSolver<MatD> es(a, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return ev[inst_.m - 1] - ev[inst_.m - 2] >= gap_threshold(a);
}

OracleResponse<double> MaxEigProblem::oracle(const VecD& x, int q) const {
  check_query(x, q);
  const int n = inst_.n, m = inst_.m;
  const MatD a = matrix(x);
  Eigen::SelfAdjointEigenSolver<MatD> es(a);
  const VecD& ev = es.eigenvalues();
  const MatD& u = es.eigenvectors();
  const VecD u1 = u.col(m - 1);
  const double thr = gap_threshold(a);

  OracleResponse<double> res;
  res.value = ev[m - 1];
  res.flagged = m > 1 && ev[m - 1] - ev[m - 2] < thr;
  res.jet.center = x;
  res.jet.tensors.push_back(SymTensor<double>::scalar(res.value, n));
  if (q == 0) return res;

  // c(k, i) = u_k^T A_i u_1
  MatD c(m, n);
  for (int i = 0; i < n; ++i) c.col(i) = u.transpose() * (inst_.A[i + 1] * u1);
  res.jet.tensors.push_back(SymTensor<double>::vector(c.row(m - 1).transpose()));
  if (q >= 2) {
    MatD h = MatD::Zero(n, n);
    for (int k = 0; k + 1 < m; ++k) {
      const double gap = ev[m - 1] - ev[k];
      if (gap < thr) continue;
      const VecD row = c.row(k).transpose();
      h += (2.0 / gap) * row * row.transpose();
    }
    res.jet.tensors.push_back(SymTensor<double>::matrix(h));
  }
  return res;
}

// ---------------------------------------------------------------------------
// half-and-half

HalfHalfProblem::HalfHalfProblem() : a_diag_(VecD::Zero(8)), b_diag_(8) {
  for (int i = 0; i < 8; ++i) {
    if (i % 2 == 0) a_diag_[i] = 1.0;
    b_diag_[i] = 1.0 / ((i + 1.0) * (i + 1.0));
  }
  minimizer = VecD::Zero(8);
  optimal_value = 0.0;
  growth_order = 2;
}

double HalfHalfProblem::value(const VecD& x) const {
  if (x.size() != 8) throw dimension_error("halfhalf: query has wrong dimension");
  const double xa = (a_diag_.array() * x.array().square()).sum();
  const double xb = (b_diag_.array() * x.array().square()).sum();
  return std::sqrt(xa) + xb;
}

bool HalfHalfProblem::is_smooth_at(const VecD& x) const {
  return (a_diag_.array() * x.array().square()).sum() > 0;
}

OracleResponse<double> HalfHalfProblem::oracle(const VecD& x, int q) const {
  check_query(x, q);
  const double xa = (a_diag_.array() * x.array().square()).sum();
  OracleResponse<double> res;
  res.value = value(x);
  res.flagged = !(xa > 0);
  res.jet.center = x;
  res.jet.tensors.push_back(SymTensor<double>::scalar(res.value, 8));
  const VecD bx = b_diag_.cwiseProduct(x);
  if (q >= 1) {
    VecD g = 2.0 * bx;
    if (xa > 0) g += a_diag_.cwiseProduct(x) / std::sqrt(xa);
    res.jet.tensors.push_back(SymTensor<double>::vector(g));
  }
  if (q >= 2) {
    MatD h = MatD(2.0 * b_diag_.asDiagonal());
    if (xa > 0) {
      const double s = std::sqrt(xa);
      const VecD ax = a_diag_.cwiseProduct(x);
      h += MatD(a_diag_.asDiagonal()) / s - ax * ax.transpose() / (s * s * s);
    }
    res.jet.tensors.push_back(SymTensor<double>::matrix(h));
  }
  return res;
}

// ---------------------------------------------------------------------------

ProblemPtr<double> problem_maxroot(int n) { return std::make_shared<MaxRootProblem<double>>(n); }
ProblemPtr<double> problem_fig1() { return std::make_shared<Fig1Problem<double>>(); }
ProblemPtr<double> problem_sumabs(SumAbsInstance inst) { return std::make_shared<SumAbsProblem>(std::move(inst)); }
ProblemPtr<double> problem_maxeig(MaxEigInstance inst) { return std::make_shared<MaxEigProblem>(std::move(inst)); }
ProblemPtr<double> problem_halfhalf() { return std::make_shared<HalfHalfProblem>(); }

FiniteDifferenceReport finite_difference_check(const Problem<double>& problem, const VecD& x, int q, double h) {
  require(h > 0, "finite_difference_check: h > 0 required");
  require(q >= 1, "finite_difference_check: q >= 1 required");
  const int n = problem.dim();
  const int top = std::min({q, 2, problem.max_order()});
  const auto resp = problem.oracle(x, top);
  FiniteDifferenceReport rep;
  rep.flagged = resp.flagged;
  const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());

  const double h1 = h * scale;
  VecD fd(n);
  for (int i = 0; i < n; ++i) {
    VecD xp = x, xm = x;
    xp[i] += h1;
    xm[i] -= h1;
    fd[i] = (problem.value(xp) - problem.value(xm)) / (2 * h1);
  }
  const VecD g = resp.jet.gradient_at_center();
  rep.max_error.push_back((g - fd).cwiseAbs().maxCoeff() / std::max(1.0, fd.cwiseAbs().maxCoeff()));

  if (top >= 2) {
    // Second differences need a larger step to keep roundoff at bay.
    const double h2 = std::max(h, 1e-4) * scale;
    MatD hf(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        auto at = [&](double si, double sj) {
          VecD y = x;
          y[i] += si * h2;
          y[j] += sj * h2;
          return problem.value(y);
        };
        hf(i, j) = hf(j, i) = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4 * h2 * h2);
      }
    }
    double err = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) err = std::max(err, std::abs(resp.jet.tensors[2].at({i, j}) - hf(i, j)));
    rep.max_error.push_back(err / std::max(1.0, hf.cwiseAbs().maxCoeff()));
  }
  return rep;
}

}  // namespace hocp

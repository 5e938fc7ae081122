#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hocp/errors.hpp"
#include "hocp/scalar.hpp"
#include "hocp/taylor.hpp"

namespace hocp {

/// Objective value plus the jet of an active selection function at the
/// query point. `flagged` marks queries where f is not smooth, so the jet
/// is only one of several admissible ones.
template <class Scalar>
struct OracleResponse {
  Scalar value;
  TaylorJet<Scalar> jet;
  bool flagged = false;
};

/// Objective with a practical higher-order oracle.
template <class Scalar>
class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::string name() const = 0;
  virtual int dim() const = 0;
  /// Highest jet degree the oracle can provide.
  virtual int max_order() const = 0;

  virtual Scalar value(const Vec<Scalar>& x) const = 0;
  virtual OracleResponse<Scalar> oracle(const Vec<Scalar>& x, int q) const = 0;

  /// True where f is smooth, i.e. the practical oracle is well defined.
  virtual bool is_smooth_at(const Vec<Scalar>& x) const = 0;

  std::optional<Vec<Scalar>> minimizer;
  std::optional<Scalar> optimal_value;
  int growth_order = 1;
  /// Number of selection functions; nullopt means infinitely many.
  std::optional<long long> selection_count;

 protected:
  void check_query(const Vec<Scalar>& x, int q) const {
    if (x.size() != dim()) throw dimension_error(name() + ": query has wrong dimension");
    if (q < 0 || q > max_order())
      throw precondition_error(name() + ": oracle degree " + std::to_string(q) + " not supported (max " +
                               std::to_string(max_order()) + ")");
  }
};

template <class Scalar>
using ProblemPtr = std::shared_ptr<const Problem<Scalar>>;

// ---------------------------------------------------------------------------
// f(x) = max_i sqrt(|x_i| + 1/4) - 1/2

template <class Scalar>
class MaxRootProblem final : public Problem<Scalar> {
 public:
  explicit MaxRootProblem(int n) : n_(n) {
    require(n >= 1, "maxroot: n >= 1 required");
    this->minimizer = Vec<Scalar>::Zero(n);
    this->optimal_value = Scalar(0);
    this->growth_order = 1;
    this->selection_count = 2LL * n;
  }

  std::string name() const override { return "maxroot"; }
  int dim() const override { return n_; }
  int max_order() const override { return 6; }

  /// Active coordinate: largest |x_i|, smallest index on ties.
  int active_index(const Vec<Scalar>& x) const {
    int best = 0;
    using std::abs;
    for (int i = 1; i < n_; ++i)
      if (abs(x[i]) > abs(x[best])) best = i;
    return best;
  }

  static Scalar branch_value(const Scalar& a) {
    // sqrt(a + 1/4) - 1/2 without cancellation for small a
    using std::sqrt;
    return a / (sqrt(a + Scalar(1) / 4) + Scalar(1) / 2);
  }

  Scalar value(const Vec<Scalar>& x) const override {
    if (x.size() != n_) throw dimension_error("maxroot: query has wrong dimension");
    using std::abs;
    return branch_value(abs(x[active_index(x)]));
  }

  OracleResponse<Scalar> oracle(const Vec<Scalar>& x, int q) const override {
    this->check_query(x, q);
    const int i = active_index(x);
    const Scalar s = x[i] < 0 ? Scalar(-1) : Scalar(1);
    const Scalar base = s * x[i] + Scalar(1) / 4;
    OracleResponse<Scalar> r;
    r.value = branch_value(s * x[i]);
    r.flagged = !is_smooth_at(x);
    r.jet.center = x;
    r.jet.tensors.push_back(SymTensor<Scalar>::scalar(r.value, n_));
    using std::sqrt;
    // d^k/dt^k sqrt(s t + 1/4) = s^k c_k (s t + 1/4)^(1/2 - k),
    // c_k = prod_{j<k} (1/2 - j)
    Scalar ck = 1;
    Scalar pw = sqrt(base);  // base^(1/2 - k), updated per k
    Scalar sk = 1;
    for (int k = 1; k <= q; ++k) {
      ck *= Scalar(1) / 2 - Scalar(k - 1);
      pw /= base;
      sk *= s;
      const Scalar d = sk * ck * pw;
      r.jet.tensors.emplace_back(n_, k, [&](std::span<const int> idx) {
        for (int v : idx)
          if (v != i) return Scalar(0);
        return d;
      });
    }
    return r;
  }

  bool is_smooth_at(const Vec<Scalar>& x) const override {
    const int i = active_index(x);
    if (x[i] == 0) return false;
    using std::abs;
    for (int j = 0; j < n_; ++j)
      if (j != i && abs(x[j]) == abs(x[i])) return false;
    return true;
  }

 private:
  int n_;
};

// ---------------------------------------------------------------------------
// One-dimensional demo function with three branches:
//   b1 = -(x + 0.5)^2 + 0.25 |x|^{3/2} + 0.5
//   b2 = x^2 + 0.5 |x|^{3/2} - 0.25
//   b3 = -1 / (|x| + 0.25) + 2

template <class Scalar>
class Fig1Problem final : public Problem<Scalar> {
 public:
  Fig1Problem() {
    this->growth_order = 1;
    this->selection_count = 6;
  }

  std::string name() const override { return "fig1"; }
  int dim() const override { return 1; }
  int max_order() const override { return 6; }

  static Scalar branch(int b, const Scalar& x) {
    using std::abs;
    using std::sqrt;
    const Scalar a = abs(x);
    const Scalar a32 = a * sqrt(a);
    switch (b) {
      case 0: return -(x + Scalar(1) / 2) * (x + Scalar(1) / 2) + a32 / 4 + Scalar(1) / 2;
      case 1: return x * x + a32 / 2 - Scalar(1) / 4;
      default: return -Scalar(1) / (a + Scalar(1) / 4) + 2;
    }
  }

  /// Attaining branch, listed order on ties.
  static int active_branch(const Scalar& x) {
    int best = 0;
    Scalar bv = branch(0, x);
    for (int b = 1; b < 3; ++b) {
      const Scalar v = branch(b, x);
      if (v > bv) {
        bv = v;
        best = b;
      }
    }
    return best;
  }

  Scalar value(const Vec<Scalar>& x) const override {
    if (x.size() != 1) throw dimension_error("fig1: query has wrong dimension");
    return branch(active_branch(x[0]), x[0]);
  }

  /// k-th derivative of the branch b on the sign side s of the |x| kink.
  static Scalar branch_derivative(int b, const Scalar& x, int k) {
    if (k == 0) return branch(b, x);
    using std::sqrt;
    const Scalar s = x < 0 ? Scalar(-1) : Scalar(1);
    const Scalar a = s * x;
    Scalar sk = 1;
    for (int j = 0; j < k; ++j) sk *= s;
    // d^k/dx^k (s x)^{3/2} = s^k prod_{j<k}(3/2 - j) (s x)^{3/2 - k}
    auto pow32 = [&]() {
      Scalar c = 1;
      for (int j = 0; j < k; ++j) c *= Scalar(3) / 2 - Scalar(j);
      if (c == 0) return Scalar(0);
      Scalar p = a * sqrt(a);
      for (int j = 0; j < k; ++j) p /= a;
      return sk * c * p;
    };
    switch (b) {
      case 0: {
        Scalar poly = 0;
        if (k == 1) poly = -2 * (x + Scalar(1) / 2);
        if (k == 2) poly = -2;
        return poly + pow32() / 4;
      }
      case 1: {
        Scalar poly = 0;
        if (k == 1) poly = 2 * x;
        if (k == 2) poly = 2;
        return poly + pow32() / 2;
      }
      default: {
        // d^k/dx^k -(s x + 1/4)^{-1} = -(-1)^k k! s^k (s x + 1/4)^{-k-1}
        Scalar v = -factorial<Scalar>(k) * sk;
        if (k % 2 == 1) v = -v;
        const Scalar base = a + Scalar(1) / 4;
        for (int j = 0; j <= k; ++j) v /= base;
        return v;
      }
    }
  }

  OracleResponse<Scalar> oracle(const Vec<Scalar>& x, int q) const override {
    this->check_query(x, q);
    const int b = active_branch(x[0]);
    OracleResponse<Scalar> r;
    r.value = branch(b, x[0]);
    r.flagged = !is_smooth_at(x);
    r.jet.center = x;
    for (int k = 0; k <= q; ++k) {
      SymTensor<Scalar> t(1, k);
      t.coeffs()[0] = (k > 0 && x[0] == 0 && b != 2) ? Scalar(0) : branch_derivative(b, x[0], k);
      r.jet.tensors.push_back(std::move(t));
    }
    return r;
  }

  bool is_smooth_at(const Vec<Scalar>& x) const override {
    if (x[0] == 0) return false;
    const int b = active_branch(x[0]);
    for (int o = 0; o < 3; ++o)
      if (o != b && branch(o, x[0]) == branch(b, x[0])) return false;
    return true;
  }
};

// ---------------------------------------------------------------------------
// Sum of absolute values of quartic terms.

struct SumAbsInstance {
  std::uint64_t seed = 0;
  int n = 0;
  int m = 0;
  VecD lambda;
  std::vector<VecD> g;
  std::vector<MatD> H;
  VecD c;
  /// Generation attempts needed before the rank test passed.
  int attempts = 1;
};

/// Draw order from SplitMix64(seed): lambda_1..m ~ U(0.5,1.5) then
/// normalized; g_1..g_{m-1} componentwise N(0,1); g_m closes the convex
/// combination; rank test (retry from the same stream on failure); then
/// Q_1..Q_m row-major N(0,1) with H_i = Q_i^T Q_i + 0.1 I (symmetrized); then
/// c_1..c_m ~ U(0.5,1.5).
SumAbsInstance generate_sumabs_instance(std::uint64_t seed, int n, int m);

class SumAbsProblem final : public Problem<double> {
 public:
  explicit SumAbsProblem(SumAbsInstance inst);

  std::string name() const override { return "sumabs"; }
  int dim() const override { return inst_.n; }
  int max_order() const override { return 6; }

  double value(const VecD& x) const override;
  OracleResponse<double> oracle(const VecD& x, int q) const override;
  bool is_smooth_at(const VecD& x) const override;

  /// Inner term t_i(x) = g_i^T x + x^T H_i x / 2 + c_i ||x||^4 / 24.
  double term(int i, const VecD& x) const;
  const SumAbsInstance& instance() const { return inst_; }

 private:
  SumAbsInstance inst_;
};

// ---------------------------------------------------------------------------
// Largest eigenvalue of an affine matrix family.

struct MaxEigInstance {
  std::uint64_t seed = 0;
  int n = 0;
  int m = 0;
  /// A[0] is the offset, A[1..n] the coefficients of x_1..x_n.
  std::vector<MatD> A;
  std::optional<VecD> reference_point;
};

/// Draw order from SplitMix64(seed): M_0..M_n row-major N(0,1) with
/// A_i = (M_i + M_i^T)/2; afterwards A_0 += (1 - lambda_max(A_0)) I when
/// lambda_max(A_0) < 1, so that f(0) >= 1.
MaxEigInstance generate_maxeig_instance(std::uint64_t seed, int n, int m);

class MaxEigProblem final : public Problem<double> {
 public:
  explicit MaxEigProblem(MaxEigInstance inst, int growth_order = 2);

  std::string name() const override { return "maxeig"; }
  int dim() const override { return inst_.n; }
  int max_order() const override { return 2; }

  double value(const VecD& x) const override;
  OracleResponse<double> oracle(const VecD& x, int q) const override;
  bool is_smooth_at(const VecD& x) const override;

  MatD matrix(const VecD& x) const;
  const MaxEigInstance& instance() const { return inst_; }

 private:
  double gap_threshold(const MatD& a) const;
  MaxEigInstance inst_;
};

// ---------------------------------------------------------------------------
// f(x) = sqrt(x^T A x) + x^T B x on R^8

class HalfHalfProblem final : public Problem<double> {
 public:
  HalfHalfProblem();

  std::string name() const override { return "halfhalf"; }
  int dim() const override { return 8; }
  int max_order() const override { return 2; }

  double value(const VecD& x) const override;
  OracleResponse<double> oracle(const VecD& x, int q) const override;
  bool is_smooth_at(const VecD& x) const override;

 private:
  VecD a_diag_;
  VecD b_diag_;
};

ProblemPtr<double> problem_maxroot(int n);
ProblemPtr<double> problem_fig1();
ProblemPtr<double> problem_sumabs(SumAbsInstance inst);
ProblemPtr<double> problem_maxeig(MaxEigInstance inst);
ProblemPtr<double> problem_halfhalf();

// ---------------------------------------------------------------------------

struct FiniteDifferenceReport {
  /// max_err[k-1] is the relative error of the order-k tensor.
  std::vector<double> max_error;
  bool flagged = false;
};

/// Compares oracle tensors of orders 1..min(q,2) against central
/// differences of value(). Errors are |oracle - fd|_inf / max(1, |fd|_inf).
FiniteDifferenceReport finite_difference_check(const Problem<double>& problem, const VecD& x, int q, double h);

}  // namespace hocp

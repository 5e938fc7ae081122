#pragma once

#include <algorithm>
#include <vector>

#include "hocp/errors.hpp"
#include "hocp/scalar.hpp"
#include "hocp/taylor.hpp"

namespace hocp {

/// Univariate polynomial, coefficients in ascending powers. Trailing zeros
/// are stripped, so the zero polynomial has no coefficients.
template <class Scalar>
class Poly1D {
 public:
  Poly1D() = default;
  explicit Poly1D(std::vector<Scalar> c) : c_(std::move(c)) { trim(); }

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  const std::vector<Scalar>& coeffs() const { return c_; }
  Scalar coeff(int k) const { return k < static_cast<int>(c_.size()) ? c_[k] : Scalar(0); }

  Scalar operator()(const Scalar& t) const {
    Scalar r = 0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * t + *it;
    return r;
  }

  Poly1D derivative() const {
    std::vector<Scalar> d;
    for (std::size_t k = 1; k < c_.size(); ++k) d.push_back(c_[k] * Scalar(static_cast<int>(k)));
    return Poly1D(std::move(d));
  }

  Scalar max_abs_coeff() const {
    Scalar m = 0;
    for (const auto& v : c_) {
      using std::abs;
      m = std::max<Scalar>(m, abs(v));
    }
    return m;
  }

  friend Poly1D operator-(const Poly1D& a, const Poly1D& b) {
    std::vector<Scalar> c(std::max(a.c_.size(), b.c_.size()), Scalar(0));
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = a.coeff(static_cast<int>(k)) - b.coeff(static_cast<int>(k));
    return Poly1D(std::move(c));
  }

  Poly1D operator-() const {
    std::vector<Scalar> c = c_;
    for (auto& v : c) v = -v;
    return Poly1D(std::move(c));
  }

  /// Remainder of division by d; coefficients below `drop` are zeroed.
  Poly1D remainder(const Poly1D& d, const Scalar& drop) const {
    if (d.is_zero()) throw zero_polynomial_error("Poly1D::remainder: division by zero polynomial");
    std::vector<Scalar> r = c_;
    const int dd = d.degree();
    const Scalar lead = d.c_.back();
    for (int k = static_cast<int>(r.size()) - 1; k >= dd; --k) {
      const Scalar f = r[k] / lead;
      for (int i = 0; i <= dd; ++i) r[k - dd + i] -= f * d.c_[i];
      r[k] = 0;
    }
    using std::abs;
    for (auto& v : r)
      if (abs(v) <= drop) v = 0;
    return Poly1D(std::move(r));
  }

 private:
  void trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
  }
  std::vector<Scalar> c_;
};

/// Monomial coefficients of t -> jet_eval(jet, origin + t) for a 1-D jet.
template <class Scalar>
Poly1D<Scalar> jet_restrict_1d(const TaylorJet<Scalar>& jet, const Scalar& origin = Scalar(0)) {
  if (jet.dim() != 1) throw dimension_error("jet_restrict_1d: jet must be one-dimensional");
  const int q = jet.degree();
  // (t - d)^m with d = y - origin.
  const Scalar d = jet.center[0] - origin;
  std::vector<Scalar> c(q + 1, Scalar(0));
  Scalar inv_fact = 1;
  for (int m = 0; m <= q; ++m) {
    if (m > 0) inv_fact /= m;
    const Scalar a = jet.tensors[m].coeffs()[0] * inv_fact;
    if (a == 0) continue;
    Scalar binom = 1;
    for (int k = 0; k <= m; ++k) {
      // coefficient of t^k in (t - d)^m is C(m,k) (-d)^(m-k)
      Scalar term = binom;
      for (int e = 0; e < m - k; ++e) term *= -d;
      c[k] += a * term;
      binom = binom * Scalar(m - k) / Scalar(k + 1);
    }
  }
  return Poly1D<Scalar>(std::move(c));
}

namespace detail {

template <class Scalar>
class SturmChain {
 public:
  explicit SturmChain(const Poly1D<Scalar>& p) {
    chain_.push_back(p);
    if (p.degree() < 1) return;
    chain_.push_back(p.derivative());
    const Scalar rel = Scalar(1024) * machine_epsilon<Scalar>();
    while (chain_.back().degree() > 0) {
      const auto& a = chain_[chain_.size() - 2];
      const auto& b = chain_.back();
      Poly1D<Scalar> r = -a.remainder(b, rel * a.max_abs_coeff());
      if (r.is_zero()) break;
      chain_.push_back(std::move(r));
    }
  }

  int variations(const Scalar& x) const {
    int count = 0;
    int last = 0;
    for (const auto& q : chain_) {
      const Scalar v = q(x);
      const int s = v > 0 ? 1 : (v < 0 ? -1 : 0);
      if (s == 0) continue;
      if (last != 0 && s != last) ++count;
      last = s;
    }
    return count;
  }

 private:
  std::vector<Poly1D<Scalar>> chain_;
};

}  // namespace detail

/// All distinct real roots of p in [a, b], each located to within tol.
/// Roots closer than tol are merged into their midpoint.
template <class Scalar>
std::vector<Scalar> poly_roots_in_interval(const Poly1D<Scalar>& p, const Scalar& a, const Scalar& b,
                                           const Scalar& tol) {
  if (!(a < b)) throw precondition_error("poly_roots_in_interval: need a < b");
  if (!(tol > 0)) throw precondition_error("poly_roots_in_interval: need tol > 0");
  if (p.is_zero()) throw zero_polynomial_error("poly_roots_in_interval: zero polynomial");
  std::vector<Scalar> roots;
  if (p.degree() == 0) return roots;

  using std::abs;
  const detail::SturmChain<Scalar> sturm(p);
  const Scalar residual_target = tol * p.max_abs_coeff();
  const Scalar eps = machine_epsilon<Scalar>();

  if (p(a) == 0) roots.push_back(a);

  // Narrows a single sign-changing root by bisection on p.
  auto bisect_sign = [&](Scalar lo, Scalar hi) {
    Scalar plo = p(lo);
    for (;;) {
      const Scalar mid = (lo + hi) / 2;
      const Scalar pm = p(mid);
      const bool narrow = hi - lo <= tol;
      const bool floor = hi - lo <= Scalar(4) * eps * (abs(lo) + abs(hi));
      if (pm == 0 || floor || (narrow && abs(pm) <= residual_target)) return mid;
      if ((pm > 0) == (plo > 0)) {
        lo = mid;
        plo = pm;
      } else {
        hi = mid;
      }
    }
  };

  // Roots in (lo, hi] via Sturm counts.
  std::function<void(const Scalar&, const Scalar&, int, int)> isolate =
      [&](const Scalar& lo, const Scalar& hi, int vlo, int vhi) {
        const int n = vlo - vhi;
        if (n <= 0) return;
        const Scalar plo = p(lo), phi = p(hi);
        if (n == 1 && ((plo < 0 && phi > 0) || (plo > 0 && phi < 0))) {
          roots.push_back(bisect_sign(lo, hi));
          return;
        }
        if (n == 1 && phi == 0) {
          roots.push_back(hi);
          return;
        }
        const Scalar mid = (lo + hi) / 2;
        if (hi - lo <= tol || mid <= lo || mid >= hi) {
          roots.push_back(mid);
          return;
        }
        const int vmid = sturm.variations(mid);
        isolate(lo, mid, vlo, vmid);
        isolate(mid, hi, vmid, vhi);
      };
  isolate(a, b, sturm.variations(a), sturm.variations(b));

  std::sort(roots.begin(), roots.end());
  std::vector<Scalar> merged;
  std::size_t i = 0;
  while (i < roots.size()) {
    std::size_t j = i;
    while (j + 1 < roots.size() && roots[j + 1] - roots[i] <= tol) ++j;
    merged.push_back(j == i ? roots[i] : (roots[i] + roots[j]) / 2);
    i = j + 1;
  }
  return merged;
}

}  // namespace hocp

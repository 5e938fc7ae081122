#pragma once

// Shared helpers for the unit tests: random data and tiny reference
// implementations that do not go through the library code under test.

#include <cmath>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "hocp/model.hpp"
#include "hocp/rng.hpp"
#include "hocp/taylor.hpp"

namespace hocp::test {

inline VecD random_vec(SplitMix64& rng, int n, double lo = -1, double hi = 1) {
  VecD v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
  return v;
}

inline MatD random_spd(SplitMix64& rng, int n, double shift) {
  MatD m(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) m(i, k) = rng.normal();
  return m.transpose() * m + shift * MatD::Identity(n, n);
}

/// Quadratic jet value c, gradient g, Hessian h at center y.
inline TaylorJet<double> quadratic_jet(const VecD& y, double c, const VecD& g, const MatD& h) {
  TaylorJet<double> jet;
  jet.center = y;
  const int n = static_cast<int>(y.size());
  jet.tensors.push_back(SymTensor<double>::scalar(c, n));
  jet.tensors.push_back(SymTensor<double>::vector(g));
  jet.tensors.push_back(SymTensor<double>::matrix(h));
  return jet;
}

inline TaylorJet<double> linear_jet(const VecD& y, double c, const VecD& g) {
  TaylorJet<double> jet;
  jet.center = y;
  jet.tensors.push_back(SymTensor<double>::scalar(c, static_cast<int>(y.size())));
  jet.tensors.push_back(SymTensor<double>::vector(g));
  return jet;
}

/// Sparse multivariate polynomial: exponent tuple -> coefficient.
struct Polynomial {
  int n = 0;
  std::map<std::vector<int>, double> terms;

  double operator()(const VecD& x) const {
    double s = 0;
    for (const auto& [e, c] : terms) {
      double m = c;
      for (int i = 0; i < n; ++i) m *= std::pow(x[i], e[i]);
      s += m;
    }
    return s;
  }

  /// Partial derivative along the variables listed in idx (repeats allowed).
  Polynomial differentiate(const std::vector<int>& idx) const {
    Polynomial p = *this;
    for (int v : idx) {
      Polynomial d{n, {}};
      for (const auto& [e, c] : p.terms) {
        if (e[v] == 0) continue;
        auto e2 = e;
        --e2[v];
        d.terms[e2] += c * e[v];
      }
      p = d;
    }
    return p;
  }

  /// Degree-q jet at y, built from exact partial derivatives.
  TaylorJet<double> jet(const VecD& y, int q) const {
    TaylorJet<double> jet;
    jet.center = y;
    for (int m = 0; m <= q; ++m)
      jet.tensors.emplace_back(n, m, [&](std::span<const int> idx) {
        return differentiate(std::vector<int>(idx.begin(), idx.end()))(y);
      });
    return jet;
  }
};

/// Random polynomial of total degree <= deg in n variables.
inline Polynomial random_polynomial(SplitMix64& rng, int n, int deg) {
  Polynomial p{n, {}};
  std::vector<int> e(n, 0);
  // enumerate all exponent tuples with sum <= deg
  std::function<void(int, int)> rec = [&](int i, int left) {
    if (i == n) {
      p.terms[e] = rng.uniform(-1, 1);
      return;
    }
    for (int k = 0; k <= left; ++k) {
      e[i] = k;
      rec(i + 1, left - k);
    }
    e[i] = 0;
  };
  rec(0, deg);
  return p;
}

}  // namespace hocp::test

namespace hocp::test {

/// Smooth problem given by one polynomial, for exactness checks.
class PolynomialProblem final : public Problem<double> {
 public:
  PolynomialProblem(Polynomial p, int max_order) : p_(std::move(p)), max_order_(max_order) {}
  std::string name() const override { return "polynomial"; }
  int dim() const override { return p_.n; }
  int max_order() const override { return max_order_; }
  double value(const VecD& x) const override { return p_(x); }
  OracleResponse<double> oracle(const VecD& x, int q) const override {
    check_query(x, q);
    return {p_(x), p_.jet(x, q), false};
  }
  bool is_smooth_at(const VecD&) const override { return true; }

 private:
  Polynomial p_;
  int max_order_;
};

}  // namespace hocp::test

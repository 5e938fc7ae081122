#pragma once

#include <cmath>

#include "hocp/errors.hpp"
#include "hocp/scalar.hpp"

namespace hocp {

/// eps_j = eps1 * kappa^(Q^(j-1) - 1) with Q = (q + sigma) / p.
template <class Scalar>
struct EpsSchedule {
  Scalar eps1 = 0.5;
  Scalar kappa = 0.75;
  Scalar sigma = 0.5;
  int q = 1;
  int p = 1;

  Scalar Q() const { return (Scalar(q) + sigma) / Scalar(p); }

  /// Throws unless eps1 > 0, kappa and sigma lie in (0,1), p >= 1 and Q > 1.
  /// q < p is accepted here; drivers only warn about it.
  void validate() const {
    require(eps1 > 0, "schedule: eps1 must be positive");
    require(kappa > 0 && kappa < 1, "schedule: kappa must lie in (0,1)");
    require(sigma > 0 && sigma < 1, "schedule: sigma must lie in (0,1)");
    require(q >= 1 && p >= 1, "schedule: q >= 1 and p >= 1 required");
    require(Q() > 1, "schedule: (q + sigma) / p must exceed 1");
  }

  template <class Other>
  EpsSchedule<Other> cast() const {
    EpsSchedule<Other> s;
    s.eps1 = Other(to_double(eps1));
    s.kappa = Other(to_double(kappa));
    s.sigma = Other(to_double(sigma));
    s.q = q;
    s.p = p;
    return s;
  }
};

template <class Scalar>
Scalar eps_at(const EpsSchedule<Scalar>& s, int j) {
  require(j >= 1, "eps_at: j >= 1 required");
  using std::pow;
  const Scalar expo = pow(s.Q(), Scalar(j - 1)) - 1;
  return s.eps1 * pow(s.kappa, expo);
}

/// sum_{l >= 0} kappa^(Q^l - 1), truncated once a term drops below 1e-30.
template <class Scalar>
Scalar cauchy_constant(const EpsSchedule<Scalar>& s) {
  s.validate();
  using std::pow;
  Scalar sum = 0;
  const Scalar cut = Scalar(1e-30);
  for (int l = 0; l < 10000; ++l) {
    const Scalar term = pow(s.kappa, pow(s.Q(), Scalar(l)) - 1);
    sum += term;
    if (term < cut) break;
  }
  return sum;
}

}  // namespace hocp

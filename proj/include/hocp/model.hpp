#pragma once

#include <cstdint>
#include <vector>

#include "hocp/errors.hpp"
#include "hocp/problems.hpp"
#include "hocp/rng.hpp"
#include "hocp/scalar.hpp"
#include "hocp/taylor.hpp"

namespace hocp {

enum class Norm { Euclidean, Max };

template <class Scalar>
struct TrustRegion {
  Vec<Scalar> center;
  Scalar radius;
  Norm norm = Norm::Euclidean;

  TrustRegion() = default;
  TrustRegion(Vec<Scalar> c, Scalar r, Norm nm = Norm::Euclidean) : center(std::move(c)), radius(std::move(r)), norm(nm) {
    require(radius > 0, "TrustRegion: radius must be positive");
  }

  int dim() const { return static_cast<int>(center.size()); }

  /// Length of d in the region's norm.
  Scalar length(const Vec<Scalar>& d) const {
    if (norm == Norm::Max) return d.cwiseAbs().maxCoeff();
    using std::sqrt;
    return sqrt(d.squaredNorm());
  }

  Scalar distance(const Vec<Scalar>& z) const {
    if (z.size() != center.size()) throw dimension_error("TrustRegion: dimension mismatch");
    return length(z - center);
  }

  bool contains(const Vec<Scalar>& z, double rel_slack = 1e-12) const {
    return distance(z) <= radius * (1 + Scalar(rel_slack));
  }

  /// Nearest point of the closed ball.
  Vec<Scalar> project(const Vec<Scalar>& z) const {
    Vec<Scalar> d = z - center;
    if (norm == Norm::Max) {
      for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = std::clamp<Scalar>(d[i], -radius, radius);
    } else {
      using std::sqrt;
      const Scalar r = sqrt(d.squaredNorm());
      if (r > radius) d *= radius / r;
    }
    return center + d;
  }
};

/// One term of the model: the jet of an active selection function at its
/// center.
template <class Scalar>
struct Cut {
  TaylorJet<Scalar> jet;
  bool flagged = false;

  Cut() = default;
  explicit Cut(OracleResponse<Scalar> r) : jet(std::move(r.jet)), flagged(r.flagged) {}
  Cut(TaylorJet<Scalar> j, bool f) : jet(std::move(j)), flagged(f) {}

  const Vec<Scalar>& center() const { return jet.center; }
  Scalar eval(const Vec<Scalar>& z) const { return jet_eval(jet, z); }
  Vec<Scalar> gradient(const Vec<Scalar>& z) const { return jet_gradient(jet, z); }
};

/// Cuts gathered in one trust region. Append-only.
template <class Scalar>
class Bundle {
 public:
  Bundle() = default;
  explicit Bundle(TrustRegion<Scalar> region) : region_(std::move(region)) {}

  /// Appends a cut. Rejects centers outside the region (beyond 1e-12
  /// relative slack) and centers within 1e-14 * radius of an existing one.
  void add(Cut<Scalar> cut) {
    if (cut.center().size() != region_.center.size()) throw dimension_error("Bundle::add: dimension mismatch");
    cut.jet.validate();
    if (!region_.contains(cut.center())) throw precondition_error("Bundle::add: cut center outside trust region");
    const Scalar dup = region_.radius * Scalar(1e-14);
    for (const auto& c : cuts_)
      if (region_.length(c.center() - cut.center()) < dup)
        throw duplicate_center_error("Bundle::add: duplicate cut center");
    cuts_.push_back(std::move(cut));
  }

  int size() const { return static_cast<int>(cuts_.size()); }
  bool empty() const { return cuts_.empty(); }
  int dim() const { return region_.dim(); }
  const std::vector<Cut<Scalar>>& cuts() const { return cuts_; }
  const Cut<Scalar>& operator[](int i) const { return cuts_[i]; }
  const TrustRegion<Scalar>& region() const { return region_; }

  /// Highest jet degree among the cuts.
  int degree() const {
    int q = 0;
    for (const auto& c : cuts_) q = std::max(q, c.jet.degree());
    return q;
  }

 private:
  TrustRegion<Scalar> region_;
  std::vector<Cut<Scalar>> cuts_;
};

template <class Scalar>
struct ModelValue {
  Scalar value;
  int index = -1;
};

/// max over cuts of their Taylor expansions at z; index is the first cut
/// attaining it.
template <class Scalar>
ModelValue<Scalar> model_eval(const Bundle<Scalar>& w, const Vec<Scalar>& z) {
  if (w.empty()) throw precondition_error("model_eval: empty bundle");
  if (z.size() != w.dim()) throw dimension_error("model_eval: dimension mismatch");
  ModelValue<Scalar> best{w[0].eval(z), 0};
  for (int i = 1; i < w.size(); ++i) {
    const Scalar v = w[i].eval(z);
    if (v > best.value) best = {v, i};
  }
  return best;
}

/// f(z) minus the model at z. Costs one objective evaluation.
template <class Scalar>
Scalar model_gap(const Problem<Scalar>& problem, const Bundle<Scalar>& w, const Vec<Scalar>& z) {
  return problem.value(z) - model_eval(w, z).value;
}

/// Cuts within tol_act * (1 + |max|) of the model value at z.
template <class Scalar>
std::vector<int> active_cuts(const Bundle<Scalar>& w, const Vec<Scalar>& z, double tol_act = 1e-8) {
  require(tol_act >= 0, "active_cuts: tol_act >= 0 required");
  if (w.empty()) return {};
  std::vector<Scalar> vals;
  vals.reserve(w.size());
  Scalar top = w[0].eval(z);
  for (int i = 0; i < w.size(); ++i) {
    vals.push_back(i == 0 ? top : w[i].eval(z));
    if (vals.back() > top) top = vals.back();
  }
  using std::abs;
  const Scalar band = Scalar(tol_act) * (1 + abs(top));
  std::vector<int> out;
  for (int i = 0; i < w.size(); ++i)
    if (top - vals[i] <= band) out.push_back(i);
  return out;
}

/// Uniform sample of the trust-region ball.
template <class Scalar>
Vec<Scalar> sample_ball(const TrustRegion<Scalar>& tr, SplitMix64& rng) {
  const int n = tr.dim();
  Vec<Scalar> d(n);
  if (tr.norm == Norm::Max) {
    for (int i = 0; i < n; ++i) d[i] = Scalar(rng.uniform(-1.0, 1.0));
  } else {
    double nrm = 0;
    VecD g(n);
    do {
      for (int i = 0; i < n; ++i) g[i] = rng.normal();
      nrm = g.norm();
    } while (nrm == 0);
    const double r = std::pow(rng.uniform(), 1.0 / n);
    for (int i = 0; i < n; ++i) d[i] = Scalar(g[i] / nrm * r);
  }
  return tr.center + tr.radius * d;
}

/// max |f(z) - model(z)| over sample_count uniform points of the region.
template <class Scalar>
Scalar remainder_probe(const Problem<Scalar>& problem, const Bundle<Scalar>& w, int sample_count, std::uint64_t seed) {
  require(sample_count >= 1, "remainder_probe: sample_count >= 1 required");
  SplitMix64 rng(seed);
  Scalar worst = 0;
  using std::abs;
  for (int s = 0; s < sample_count; ++s) {
    const Vec<Scalar> z = sample_ball(w.region(), rng);
    const Scalar r = abs(problem.value(z) - model_eval(w, z).value);
    if (r > worst) worst = r;
  }
  return worst;
}

}  // namespace hocp

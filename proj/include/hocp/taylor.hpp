#pragma once

#include <algorithm>
#include <functional>
#include <span>
#include <vector>

#include "hocp/errors.hpp"
#include "hocp/scalar.hpp"

namespace hocp {

/// Number of non-decreasing multi-indices of length m over n symbols,
/// i.e. C(n+m-1, m).
std::size_t multi_index_count(int n, int m);

/// Advances a non-decreasing multi-index in lexicographic order. Returns
/// false after the last one.
bool next_multi_index(std::vector<int>& idx, int n);

/// m! / prod(a_k!) where a_k counts repetitions of k in the sorted index.
long long multi_index_multiplicity(std::span<const int> idx);

/// Symmetric m-linear form D^m f(y) stored once per sorted multi-index.
///
/// coeffs()[r] is the partial derivative d_{i1}...d_{im} f(y) for the r-th
/// non-decreasing multi-index (i1 <= ... <= im) in lexicographic order.
template <class Scalar>
class SymTensor {
 public:
  using IndexFn = std::function<Scalar(std::span<const int>)>;

  SymTensor() = default;

  SymTensor(int dim, int order) : dim_(dim), order_(order) {
    require(dim >= 1 && order >= 0, "SymTensor: dim >= 1 and order >= 0 required");
    coeffs_.assign(multi_index_count(dim, order), Scalar(0));
  }

  /// Fills every coefficient from `entry`, which is called with each sorted
  /// multi-index and must be symmetric in its arguments.
  SymTensor(int dim, int order, const IndexFn& entry) : SymTensor(dim, order) {
    std::vector<int> idx(order, 0);
    std::size_t r = 0;
    do {
      coeffs_[r++] = entry(idx);
    } while (next_multi_index(idx, dim));
  }

  static SymTensor scalar(const Scalar& v, int dim) {
    SymTensor t(dim, 0);
    t.coeffs_[0] = v;
    return t;
  }

  static SymTensor vector(const Vec<Scalar>& g) {
    SymTensor t(static_cast<int>(g.size()), 1);
    for (Eigen::Index i = 0; i < g.size(); ++i) t.coeffs_[i] = g[i];
    return t;
  }

  static SymTensor matrix(const Mat<Scalar>& h) {
    return SymTensor(static_cast<int>(h.rows()), 2,
                     [&](std::span<const int> i) { return h(i[0], i[1]); });
  }

  int dim() const { return dim_; }
  int order() const { return order_; }
  const std::vector<Scalar>& coeffs() const { return coeffs_; }
  std::vector<Scalar>& coeffs() { return coeffs_; }

  /// Entry for an arbitrary (unsorted) multi-index.
  Scalar at(std::vector<int> idx) const;

  /// D^m f(y)(v)^m, the full contraction with v in every slot.
  Scalar apply(const Vec<Scalar>& v) const;

  /// Gradient of v -> apply(v), i.e. m * D^m f(y)(v)^{m-1}[.].
  Vec<Scalar> apply_gradient(const Vec<Scalar>& v) const;

  /// Hessian of v -> apply(v), i.e. m (m-1) D^m f(y)(v)^{m-2}[., .].
  Mat<Scalar> apply_hessian(const Vec<Scalar>& v) const;

 private:
  int dim_ = 0;
  int order_ = 0;
  std::vector<Scalar> coeffs_;
};

template <class Scalar>
Scalar tensor_apply(const SymTensor<Scalar>& t, const Vec<Scalar>& v) {
  return t.apply(v);
}

/// Center y plus derivative tensors D^0..D^q of one selection function.
template <class Scalar>
struct TaylorJet {
  Vec<Scalar> center;
  std::vector<SymTensor<Scalar>> tensors;

  int dim() const { return static_cast<int>(center.size()); }
  int degree() const { return static_cast<int>(tensors.size()) - 1; }
  const Scalar& value() const { return tensors.front().coeffs().front(); }
  Vec<Scalar> gradient_at_center() const;

  /// Throws unless tensors[m] has order m and the jet's dimension.
  void validate() const;
};

/// T^q f(z, y) = sum_m D^m f(y)(z - y)^m / m!.
template <class Scalar>
Scalar jet_eval(const TaylorJet<Scalar>& jet, const Vec<Scalar>& z);

template <class Scalar>
Vec<Scalar> jet_gradient(const TaylorJet<Scalar>& jet, const Vec<Scalar>& z);

/// Hessian of z -> jet_eval(jet, z).
template <class Scalar>
Mat<Scalar> jet_hessian(const TaylorJet<Scalar>& jet, const Vec<Scalar>& z);

/// Jet truncated to a lower degree.
template <class Scalar>
TaylorJet<Scalar> truncate(const TaylorJet<Scalar>& jet, int degree);

// ---------------------------------------------------------------------------
// implementation

template <class Scalar>
Scalar SymTensor<Scalar>::at(std::vector<int> idx) const {
  if (static_cast<int>(idx.size()) != order_) throw dimension_error("SymTensor::at: wrong index length");
  std::sort(idx.begin(), idx.end());
  std::vector<int> cur(order_, 0);
  std::size_t r = 0;
  do {
    if (cur == idx) return coeffs_[r];
    ++r;
  } while (next_multi_index(cur, dim_));
  throw dimension_error("SymTensor::at: index out of range");
}

template <class Scalar>
Scalar SymTensor<Scalar>::apply(const Vec<Scalar>& v) const {
  if (v.size() != dim_) throw dimension_error("tensor_apply: dimension mismatch");
  if (order_ == 0) return coeffs_[0];
  if (order_ == 1) {
    Scalar s = 0;
    for (int i = 0; i < dim_; ++i) s += coeffs_[i] * v[i];
    return s;
  }
  Scalar sum = 0;
  std::vector<int> idx(order_, 0);
  std::size_t r = 0;
  do {
    const Scalar& c = coeffs_[r++];
    if (c != 0) {
      Scalar prod = c * Scalar(multi_index_multiplicity(idx));
      for (int p = 0; p < order_; ++p) prod *= v[idx[p]];
      sum += prod;
    }
  } while (next_multi_index(idx, dim_));
  return sum;
}

template <class Scalar>
Vec<Scalar> SymTensor<Scalar>::apply_gradient(const Vec<Scalar>& v) const {
  if (v.size() != dim_) throw dimension_error("tensor gradient: dimension mismatch");
  Vec<Scalar> g = Vec<Scalar>::Zero(dim_);
  if (order_ == 0) return g;
  if (order_ == 1) {
    for (int i = 0; i < dim_; ++i) g[i] = coeffs_[i];
    return g;
  }
  std::vector<int> idx(order_, 0);
  std::size_t r = 0;
  do {
    const Scalar& c = coeffs_[r++];
    if (c != 0) {
      const Scalar cm = c * Scalar(multi_index_multiplicity(idx));
      // d/dv_k prod_p v_{i_p} = sum over positions p with i_p = k of the
      // product of the remaining factors.
      for (int p = 0; p < order_; ++p) {
        if (p > 0 && idx[p] == idx[p - 1]) continue;
        int reps = 0;
        Scalar rest = cm;
        bool skipped = false;
        for (int q = 0; q < order_; ++q) {
          if (idx[q] == idx[p]) ++reps;
          if (idx[q] == idx[p] && !skipped) {
            skipped = true;
            continue;
          }
          rest *= v[idx[q]];
        }
        g[idx[p]] += Scalar(reps) * rest;
      }
    }
  } while (next_multi_index(idx, dim_));
  return g;
}

template <class Scalar>
Mat<Scalar> SymTensor<Scalar>::apply_hessian(const Vec<Scalar>& v) const {
  if (v.size() != dim_) throw dimension_error("tensor hessian: dimension mismatch");
  Mat<Scalar> h = Mat<Scalar>::Zero(dim_, dim_);
  if (order_ < 2) return h;
  std::vector<int> idx(order_, 0);
  std::size_t r = 0;
  do {
    const Scalar& c = coeffs_[r++];
    if (c == 0) continue;
    const Scalar cm = c * Scalar(multi_index_multiplicity(idx));
    // Every ordered pair of slots (a, b) contributes the product of the
    // remaining factors.
    for (int a = 0; a < order_; ++a) {
      for (int b = 0; b < order_; ++b) {
        if (a == b) continue;
        Scalar rest = cm;
        for (int k = 0; k < order_; ++k)
          if (k != a && k != b) rest *= v[idx[k]];
        h(idx[a], idx[b]) += rest;
      }
    }
  } while (next_multi_index(idx, dim_));
  return h;
}

template <class Scalar>
Vec<Scalar> TaylorJet<Scalar>::gradient_at_center() const {
  if (degree() < 1) return Vec<Scalar>::Zero(dim());
  const auto& c = tensors[1].coeffs();
  Vec<Scalar> g(dim());
  for (int i = 0; i < dim(); ++i) g[i] = c[i];
  return g;
}

template <class Scalar>
void TaylorJet<Scalar>::validate() const {
  if (tensors.empty()) throw precondition_error("TaylorJet: no tensors");
  for (std::size_t m = 0; m < tensors.size(); ++m) {
    if (tensors[m].order() != static_cast<int>(m) || tensors[m].dim() != dim())
      throw dimension_error("TaylorJet: tensor order/dimension mismatch");
  }
}

template <class Scalar>
Scalar jet_eval(const TaylorJet<Scalar>& jet, const Vec<Scalar>& z) {
  if (z.size() != jet.center.size()) throw dimension_error("jet_eval: dimension mismatch");
  const Vec<Scalar> v = z - jet.center;
  Scalar sum = jet.value();
  Scalar inv_fact = 1;
  for (int m = 1; m <= jet.degree(); ++m) {
    inv_fact /= m;
    sum += inv_fact * jet.tensors[m].apply(v);
  }
  return sum;
}

template <class Scalar>
Vec<Scalar> jet_gradient(const TaylorJet<Scalar>& jet, const Vec<Scalar>& z) {
  if (z.size() != jet.center.size()) throw dimension_error("jet_gradient: dimension mismatch");
  const Vec<Scalar> v = z - jet.center;
  Vec<Scalar> g = Vec<Scalar>::Zero(jet.dim());
  Scalar inv_fact = 1;
  for (int m = 1; m <= jet.degree(); ++m) {
    inv_fact /= m;
    g += inv_fact * jet.tensors[m].apply_gradient(v);
  }
  return g;
}

/// Hessian of z -> jet_eval(jet, z).
template <class Scalar>
Mat<Scalar> jet_hessian(const TaylorJet<Scalar>& jet, const Vec<Scalar>& z) {
  if (z.size() != jet.center.size()) throw dimension_error("jet_hessian: dimension mismatch");
  const Vec<Scalar> v = z - jet.center;
  Mat<Scalar> h = Mat<Scalar>::Zero(jet.dim(), jet.dim());
  Scalar inv_fact = 1;
  for (int m = 1; m <= jet.degree(); ++m) {
    inv_fact /= m;
    if (m >= 2) h += inv_fact * jet.tensors[m].apply_hessian(v);
  }
  return h;
}

template <class Scalar>
TaylorJet<Scalar> truncate(const TaylorJet<Scalar>& jet, int degree) {
  require(degree >= 0 && degree <= jet.degree(), "truncate: degree out of range");
  TaylorJet<Scalar> out;
  out.center = jet.center;
  out.tensors.assign(jet.tensors.begin(), jet.tensors.begin() + degree + 1);
  return out;
}

}  // namespace hocp

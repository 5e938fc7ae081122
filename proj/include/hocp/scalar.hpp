#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <type_traits>

#include <Eigen/Dense>
#include <boost/multiprecision/eigen.hpp>
#include <boost/multiprecision/mpfr.hpp>

namespace hocp {

/// Arbitrary-precision binary float. Precision is a process-wide runtime
/// setting, see set_bigfloat_bits().
using bigfloat = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                               boost::multiprecision::et_off>;

template <class Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using VecD = Vec<double>;
using MatD = Mat<double>;

/// Sets the working precision of every bigfloat created afterwards. The
/// mantissa gets at least `bits` bits.
inline void set_bigfloat_bits(unsigned bits) {
  const auto digits10 =
      static_cast<unsigned>(std::ceil(static_cast<double>(bits) * 0.30102999566398120));
  bigfloat::default_precision(digits10);
}

inline unsigned bigfloat_bits() {
  return static_cast<unsigned>(
      boost::multiprecision::detail::digits10_2_2(bigfloat::default_precision()));
}

template <class Scalar>
struct scalar_traits;

template <>
struct scalar_traits<double> {
  static constexpr const char* name = "binary64";
  static double epsilon() { return std::numeric_limits<double>::epsilon(); }
  static double to_double(double v) { return v; }
  static std::string format(double v);
};

template <>
struct scalar_traits<bigfloat> {
  static constexpr const char* name = "bigfloat";
  static bigfloat epsilon() {
    return boost::multiprecision::ldexp(bigfloat(1), 1 - static_cast<int>(bigfloat_bits()));
  }
  static double to_double(const bigfloat& v) { return v.convert_to<double>(); }
  static std::string format(const bigfloat& v) { return v.str(40, std::ios_base::scientific); }
};

template <class Scalar>
double to_double(const Scalar& v) {
  return scalar_traits<Scalar>::to_double(v);
}

template <class Scalar>
Scalar machine_epsilon() {
  return scalar_traits<Scalar>::epsilon();
}

/// Shortest round-trip text for binary64, 40 significant digits for bigfloat.
template <class Scalar>
std::string format_scalar(const Scalar& v) {
  return scalar_traits<Scalar>::format(v);
}

template <class Scalar>
Vec<Scalar> cast_vec(const VecD& v) {
  return v.cast<Scalar>();
}

template <class Scalar>
VecD to_double_vec(const Vec<Scalar>& v) {
  VecD out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = to_double(v[i]);
  return out;
}

template <class Scalar>
Scalar factorial(int m) {
  Scalar r = 1;
  for (int k = 2; k <= m; ++k) r *= k;
  return r;
}

}  // namespace hocp

#pragma once

#include <Eigen/Core>
#include <boost/multiprecision/mpfr.hpp>

#include <array>
#include <limits>
#include <type_traits>

// Eigen traits for Boost.Multiprecision numbers. Boost's own adaptor predates
// Eigen 3.4 and lacks infinity()/quiet_NaN().
namespace Eigen {
template <class Backend, boost::multiprecision::expression_template_option ET>
struct NumTraits<boost::multiprecision::number<Backend, ET>>
    : GenericNumTraits<boost::multiprecision::number<Backend, ET>> {
  using Self = boost::multiprecision::number<Backend, ET>;
  using Real = Self;
  using NonInteger = Self;
  using Nested = Self;
  using Literal = Self;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    ReadCost = 1,
    AddCost = 4,
    MulCost = 8,
    IsSigned = 1,
    RequireInitialization = 1
  };
  static Self epsilon() { return std::numeric_limits<Self>::epsilon(); }
  static Self dummy_precision() { return 1000 * epsilon(); }
  static Self highest() { return (std::numeric_limits<Self>::max)(); }
  static Self lowest() { return (std::numeric_limits<Self>::lowest)(); }
  static int digits10() { return std::numeric_limits<Self>::digits10; }
  static Self infinity() { return std::numeric_limits<Self>::infinity(); }
  static Self quiet_NaN() { return std::numeric_limits<Self>::quiet_NaN(); }
};

} // namespace Eigen

namespace heatctl {

// Fixed-precision types carry their precision in the type, so no global
// default precision is shared between threads.
template <unsigned Digits>
using MpReal = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<Digits, boost::multiprecision::allocate_stack>,
                                             boost::multiprecision::et_on>;

inline constexpr std::array<unsigned, 4> kPrecisionTiers{48, 80, 128, 256};

// The control-set mass matrix of a half-torus loses about 0.75 decimal digits
// per retained mode; 24 extra digits keep Gramian solves accurate.
constexpr unsigned suggested_digits(int modes) {
  return static_cast<unsigned>(0.75 * (modes - 1)) + 24;
}

template <class T>
struct ScalarTag {
  using type = T;
};

// Calls f(ScalarTag<MpReal<D>>{}) for the smallest tier D >= digits.
template <class F>
decltype(auto) with_precision(unsigned digits, F&& f) {
  if (digits <= 48)
    return f(ScalarTag<MpReal<48>>{});
  if (digits <= 80)
    return f(ScalarTag<MpReal<80>>{});
  if (digits <= 128)
    return f(ScalarTag<MpReal<128>>{});
  return f(ScalarTag<MpReal<256>>{});
}

template <class Scalar>
constexpr unsigned scalar_digits() {
  return std::numeric_limits<Scalar>::digits10;
}

} // namespace heatctl

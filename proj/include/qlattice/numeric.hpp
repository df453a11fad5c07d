// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The qlattice Authors

#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <type_traits>

namespace qlattice {

/// Maps a real type to the complex type used alongside it.  Specialized for
/// multiprecision reals in qlattice/multiprecision.hpp.
template <class Real>
struct complex_of {
  using type = std::complex<Real>;
};

template <class Real>
using complex_t = typename complex_of<Real>::type;

template <class Real>
inline Real pi_v() {
  if constexpr (std::is_floating_point_v<Real>) {
    return std::numbers::pi_v<Real>;
  } else {
    using std::acos;
    return acos(Real(-1));
  }
}

template <class Real>
inline Real ln2_v() {
  if constexpr (std::is_floating_point_v<Real>) {
    return std::numbers::ln2_v<Real>;
  } else {
    using std::log;
    return log(Real(2));
  }
}

template <class Real>
inline Real epsilon_v() {
  return std::numeric_limits<Real>::epsilon();
}

/// Real number converted to Real from double without touching the library
/// types of either side.
template <class Real>
inline Real from_double(double v) {
  return Real(v);
}

template <class Real>
inline double to_double(const Real& v) {
  if constexpr (std::is_floating_point_v<Real>) {
    return static_cast<double>(v);
  } else {
    return v.template convert_to<double>();
  }
}

template <class Real>
inline std::complex<double> to_complex_double(const complex_t<Real>& z) {
  return {to_double<Real>(real(z)), to_double<Real>(imag(z))};
}

template <class Real>
inline complex_t<Real> from_complex_double(std::complex<double> z) {
  return complex_t<Real>(Real(z.real()), Real(z.imag()));
}

/// Floor division for signed integers.
inline long long floor_div(long long a, long long b) {
  long long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace qlattice

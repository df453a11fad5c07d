// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The qlattice Authors

#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <type_traits>

#include "qlattice/errors.hpp"
#include "qlattice/numeric.hpp"

namespace qlattice {

/// Complex number with an extended exponent.
///
/// The value is mantissa * B^exponent with B = 2^128.  A non-zero mantissa
/// satisfies 1 <= |mantissa| < B; zero is stored as (0, 0).  Because B is a
/// power of two, moving magnitude between mantissa and exponent is exact.
///
/// Lattice coefficients grow like exp(tau^2 m^2) and the reconstruction
/// weights decay like exp(-pi tau m^2); both leave the double range for
/// moderate m, while their products stay O(1).
template <class Real>
class basic_scaled {
 public:
  using real_type = Real;
  using complex_type = complex_t<Real>;

  static constexpr int kBaseBits = 128;

  basic_scaled() : mantissa_(Real(0), Real(0)), exponent_(0) {}

  basic_scaled(const complex_type& v) : mantissa_(v), exponent_(0) {  // NOLINT
    normalize();
  }

  explicit basic_scaled(const Real& v) : basic_scaled(complex_type(v, Real(0))) {}

  static basic_scaled from_parts(const complex_type& mantissa, long long exponent) {
    basic_scaled s;
    s.mantissa_ = mantissa;
    s.exponent_ = exponent;
    s.normalize();
    return s;
  }

  /// exp(log_magnitude) * e^{i phase}, without forming exp(log_magnitude).
  static basic_scaled from_log(const Real& log_magnitude, const Real& phase = Real(0)) {
    using std::cos;
    using std::exp;
    using std::floor;
    using std::sin;
    const Real unit = Real(kBaseBits) * ln2_v<Real>();
    const Real e = floor(log_magnitude / unit);
    const Real rest = log_magnitude - e * unit;
    const Real mag = exp(rest);
    return from_parts(complex_type(mag * cos(phase), mag * sin(phase)),
                      static_cast<long long>(to_double<Real>(e)));
  }

  /// exp(w) for complex w.
  static basic_scaled exp_of(const complex_type& w) { return from_log(real(w), imag(w)); }

  const complex_type& mantissa() const noexcept { return mantissa_; }
  long long exponent() const noexcept { return exponent_; }

  bool is_zero() const { return mantissa_ == complex_type(Real(0), Real(0)); }

  /// Natural log of |value|; -infinity for zero.
  Real log_abs() const {
    using std::abs;
    using std::log;
    if (is_zero()) return -std::numeric_limits<Real>::infinity();
    return log(abs(mantissa_)) + Real(exponent_) * Real(kBaseBits) * ln2_v<Real>();
  }

  /// Plain complex value.  Throws Saturation when the magnitude exceeds the
  /// range of Real; tiny values underflow gracefully towards zero.
  complex_type to_complex() const {
    using std::isfinite;
    if (is_zero()) return mantissa_;
    if constexpr (std::is_floating_point_v<Real>) {
      constexpr long long max_exp = std::numeric_limits<Real>::max_exponent / kBaseBits + 1;
      constexpr long long min_exp = std::numeric_limits<Real>::min_exponent / kBaseBits - 2;
      if (exponent_ > max_exp) throw Saturation("scaled value exceeds floating-point range");
      if (exponent_ < min_exp) return complex_type(Real(0), Real(0));
    }
    const int shift = static_cast<int>(exponent_ * kBaseBits);
    complex_type v = shifted(mantissa_, shift);
    if (!isfinite(real(v)) || !isfinite(imag(v))) {
      throw Saturation("scaled value exceeds floating-point range");
    }
    return v;
  }

  bool representable() const {
    try {
      (void)to_complex();
      return true;
    } catch (const Saturation&) {
      return false;
    }
  }

  basic_scaled conj() const {
    basic_scaled s = *this;
    s.mantissa_ = complex_type(real(mantissa_), -imag(mantissa_));
    return s;
  }

  basic_scaled operator-() const {
    basic_scaled s = *this;
    s.mantissa_ = -s.mantissa_;
    return s;
  }

  basic_scaled& operator*=(const basic_scaled& o) {
    mantissa_ *= o.mantissa_;
    exponent_ += o.exponent_;
    normalize();
    return *this;
  }

  basic_scaled& operator/=(const basic_scaled& o) {
    if (o.is_zero()) throw DomainError("division by a zero scaled value");
    mantissa_ /= o.mantissa_;
    exponent_ -= o.exponent_;
    normalize();
    return *this;
  }

  basic_scaled& operator+=(const basic_scaled& o) {
    if (o.is_zero()) return *this;
    if (is_zero()) return *this = o;
    const long long d = exponent_ - o.exponent_;
    if (d >= 0) {
      if (d <= kMaxAlign) mantissa_ += shifted(o.mantissa_, -static_cast<int>(d * kBaseBits));
    } else {
      if (-d <= kMaxAlign) {
        mantissa_ = o.mantissa_ + shifted(mantissa_, static_cast<int>(d * kBaseBits));
      } else {
        mantissa_ = o.mantissa_;
      }
      exponent_ = o.exponent_;
    }
    normalize();
    return *this;
  }

  basic_scaled& operator-=(const basic_scaled& o) { return *this += -o; }

  friend basic_scaled operator*(basic_scaled a, const basic_scaled& b) { return a *= b; }
  friend basic_scaled operator/(basic_scaled a, const basic_scaled& b) { return a /= b; }
  friend basic_scaled operator+(basic_scaled a, const basic_scaled& b) { return a += b; }
  friend basic_scaled operator-(basic_scaled a, const basic_scaled& b) { return a -= b; }

  friend bool operator==(const basic_scaled& a, const basic_scaled& b) {
    return a.exponent_ == b.exponent_ && a.mantissa_ == b.mantissa_;
  }

  /// |a| < |b| without leaving scaled form.
  friend bool abs_less(const basic_scaled& a, const basic_scaled& b) {
    if (b.is_zero()) return false;
    if (a.is_zero()) return true;
    if (a.exponent_ != b.exponent_) return a.exponent_ < b.exponent_;
    return norm2(a.mantissa_) < norm2(b.mantissa_);
  }

 private:
  // Alignment beyond this many base digits leaves the smaller operand below
  // the precision of any supported Real.
  static constexpr long long kMaxAlign = 8;

  static complex_type shifted(const complex_type& v, int bits) {
    using std::ldexp;
    return complex_type(ldexp(real(v), bits), ldexp(imag(v), bits));
  }

  void normalize() {
    using std::abs;
    using std::frexp;
    using std::isfinite;
    if (is_zero()) {
      mantissa_ = complex_type(Real(0), Real(0));
      exponent_ = 0;
      return;
    }
    // The max-norm a satisfies a <= |mantissa| <= sqrt(2) a, so scaling a
    // into [1, B) settles the lower bound; the modulus is only needed when a
    // lies in the top half of the range.
    const Real ar = abs(real(mantissa_));
    const Real ai = abs(imag(mantissa_));
    const Real a = ar < ai ? ai : ar;
    if (!isfinite(a)) throw Saturation("non-finite mantissa in scaled arithmetic");
    int e = 0;
    (void)frexp(a, &e);
    const long long shift = floor_div(static_cast<long long>(e) - 1, kBaseBits);
    if (shift != 0) {
      mantissa_ = shifted(mantissa_, -static_cast<int>(shift * kBaseBits));
      exponent_ += shift;
    }
    const Real base = ldexp_one(kBaseBits);
    if (e - 1 - shift * kBaseBits >= kBaseBits - 1) {
      while (abs(mantissa_) >= base) {
        mantissa_ = shifted(mantissa_, -kBaseBits);
        ++exponent_;
      }
    }
  }

  static Real norm2(const complex_type& v) { return real(v) * real(v) + imag(v) * imag(v); }

  static Real ldexp_one(int bits) {
    using std::ldexp;
    return ldexp(Real(1), bits);
  }

  complex_type mantissa_;
  long long exponent_;
};

using ScaledValue = basic_scaled<double>;

template <class Real>
inline basic_scaled<Real> conj(const basic_scaled<Real>& v) {
  return v.conj();
}

}  // namespace qlattice

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The qlattice Authors

#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "qlattice/errors.hpp"
#include "qlattice/multiprecision.hpp"
#include "qlattice/scaled.hpp"
#include "test_support.hpp"

namespace qlattice {
namespace {

using testing::Gen;

TEST(ScaledValue, OrdinaryValuesRoundTrip) {
  for (std::complex<double> v : {std::complex<double>(1.5, 0.0), std::complex<double>(-3e100, 2e99),
                                 std::complex<double>(1e-300, -1e-301), std::complex<double>(0.0, -7.25)}) {
    EXPECT_EQ(ScaledValue(v).to_complex(), v);
  }
}

TEST(ScaledValue, ZeroIsCanonical) {
  const ScaledValue z;
  EXPECT_TRUE(z.is_zero());
  EXPECT_EQ(z.exponent(), 0);
  EXPECT_EQ(z.log_abs(), -INFINITY);
  EXPECT_EQ((z + ScaledValue(2.0)).to_complex(), std::complex<double>(2.0, 0.0));
}

TEST(ScaledValue, FarOutsideDoubleRange) {
  const ScaledValue big = ScaledValue::from_log(1e5);
  const ScaledValue small = ScaledValue::from_log(-1e5);
  EXPECT_NEAR(big.log_abs(), 1e5, 1e-9);
  EXPECT_FALSE(big.representable());
  EXPECT_THROW((void)big.to_complex(), Saturation);
  EXPECT_EQ(small.to_complex(), std::complex<double>(0.0, 0.0));
  const auto one = (big * small).to_complex();
  EXPECT_NEAR(one.real(), 1.0, 1e-10);
  EXPECT_NEAR((big / big).to_complex().real(), 1.0, 1e-15);
}

TEST(ScaledValue, SumAcrossExponentsKeepsLargerOperand) {
  const ScaledValue big = ScaledValue::from_log(3000.0);
  const ScaledValue tiny = ScaledValue::from_log(-3000.0);
  EXPECT_EQ(big + tiny, big);
  EXPECT_EQ(tiny + big, big);
}

TEST(ScaledValue, PhaseFromLog) {
  const auto v = ScaledValue::from_log(std::log(2.0), std::numbers::pi / 2).to_complex();
  EXPECT_NEAR(v.real(), 0.0, 1e-15);
  EXPECT_NEAR(v.imag(), 2.0, 1e-15);
  const auto w = ScaledValue::exp_of({0.0, std::numbers::pi}).to_complex();
  EXPECT_NEAR(w.real(), -1.0, 1e-15);
}

TEST(ScaledValue, ConjugateAndNegate) {
  const ScaledValue v(std::complex<double>(1.0, 2.0));
  EXPECT_EQ(v.conj().to_complex(), std::complex<double>(1.0, -2.0));
  EXPECT_EQ((-v).to_complex(), std::complex<double>(-1.0, -2.0));
  EXPECT_TRUE((v - v).is_zero());
}

TEST(ScaledValue, DivisionByZeroIsDomainError) {
  EXPECT_THROW((void)(ScaledValue(1.0) / ScaledValue()), DomainError);
}

TEST(ScaledValue, AbsLessOrdersMagnitudes) {
  EXPECT_TRUE(abs_less(ScaledValue(1.0), ScaledValue(-2.0)));
  EXPECT_FALSE(abs_less(ScaledValue(-2.0), ScaledValue(1.0)));
  EXPECT_TRUE(abs_less(ScaledValue(), ScaledValue(1e-300)));
  EXPECT_FALSE(abs_less(ScaledValue(1.0), ScaledValue()));
  EXPECT_TRUE(abs_less(ScaledValue::from_log(-500.0), ScaledValue::from_log(500.0)));
  EXPECT_TRUE(abs_less(ScaledValue(std::complex<double>(0.6, 0.0)), ScaledValue(std::complex<double>(0.5, 0.5))));
}

TEST(ScaledValue, FromPartsNormalizes) {
  const ScaledValue a = ScaledValue::from_parts({1.0, 0.0}, 3);
  EXPECT_NEAR(a.log_abs(), 3.0 * 128.0 * std::log(2.0), 1e-9);
  const ScaledValue b = ScaledValue::from_parts(a.mantissa(), a.exponent());
  EXPECT_EQ(a, b);
}

TEST(ScaledValueProperty, ArithmeticMatchesLogSpace) {
  Gen g(0x5ca1ed);
  for (int i = 0; i < 500; ++i) {
    const double la = g.uniform(-2000.0, 2000.0);
    const double lb = g.uniform(-2000.0, 2000.0);
    const double pa = g.uniform(-3.0, 3.0);
    const double pb = g.uniform(-3.0, 3.0);
    const ScaledValue a = ScaledValue::from_log(la, pa);
    const ScaledValue b = ScaledValue::from_log(lb, pb);
    EXPECT_NEAR((a * b).log_abs(), la + lb, 1e-11 * (1.0 + std::abs(la + lb)));
    EXPECT_NEAR((a / b).log_abs(), la - lb, 1e-11 * (1.0 + std::abs(la - lb)));
    const double expected_sum = std::max(la, lb) + std::log(std::abs(std::polar(1.0, pa) * std::exp(la - std::max(la, lb)) +
                                                                    std::polar(1.0, pb) * std::exp(lb - std::max(la, lb))));
    EXPECT_NEAR((a + b).log_abs(), expected_sum, 1e-9 * (1.0 + std::abs(expected_sum)));
  }
}

TEST(ScaledValueProperty, MatchesDoubleWhereRepresentable) {
  Gen g(77);
  for (int i = 0; i < 500; ++i) {
    const std::complex<double> x = g.polar(1e-3, 1e3);
    const std::complex<double> y = g.polar(1e-3, 1e3);
    const ScaledValue sx(x), sy(y);
    EXPECT_LE(std::abs((sx * sy).to_complex() - x * y), 1e-15 * std::abs(x * y));
    EXPECT_LE(std::abs((sx / sy).to_complex() - x / y), 1e-15 * std::abs(x / y));
    EXPECT_LE(std::abs((sx + sy).to_complex() - (x + y)), 1e-15 * (std::abs(x) + std::abs(y)));
  }
}

TEST(ScaledValue, ExtendedPrecisionInstance) {
  using S = basic_scaled<HighPrecision>;
  const S a = S::from_log(HighPrecision(1000));
  const S b = S::from_log(HighPrecision(-1000));
  const HighPrecision one = real((a * b).to_complex());
  EXPECT_LT(to_double<HighPrecision>(abs(one - 1)), 1e-40);
}

}  // namespace
}  // namespace qlattice

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The qlattice Authors

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "qlattice/errors.hpp"
#include "qlattice/signal.hpp"
#include "test_support.hpp"

namespace qlattice {
namespace {

using C = std::complex<double>;
using testing::rel_err;

const double kSqrt2Pi = 2.5066282746310005024;

SignalModel sech_signal() {
  return SignalModel::callback([](double x) { return C(1.0 / std::cosh(x), 0.0); }, DecayBound{1.0, 0.0});
}

TEST(Signal, GaussianFamilyEvaluation) {
  const SignalModel s = SignalModel::gaussian_family({{C(2.0, 0.0), 1.0, 0.5}, {C(0.0, 1.0), -1.0, 0.0}});
  const double x = 0.3;
  const C expected = 2.0 * std::exp(-0.49 / 4.0) * std::polar(1.0, 0.5 * x) + C(0.0, 1.0) * std::exp(-1.69 / 4.0);
  EXPECT_LE(std::abs(eval_signal(s, x) - expected), 1e-15);
  EXPECT_THROW(eval_signal(s, NAN), InvalidParameter);
}

TEST(Signal, FamilyNeedsComponents) { EXPECT_THROW(SignalModel::gaussian_family({}), InvalidParameter); }

TEST(Signal, CallbackDecayMetadataIsValidated) {
  auto f = [](double) { return C(1.0, 0.0); };
  EXPECT_THROW(SignalModel::callback(f, DecayBound{0.0, 0.0}), InvalidParameter);
  EXPECT_THROW(SignalModel::callback(f, DecayBound{1.0, -1.0}), InvalidParameter);
  EXPECT_THROW(SignalModel::callback(nullptr, DecayBound{1.0, 0.0}), InvalidParameter);
}

TEST(Gamma, ClosedFormReferenceValues) {
  const SignalModel g = SignalModel::gaussian();
  EXPECT_LE(rel_err(gamma_closed_form(0, 0, g, 1.0), ScaledValue(kSqrt2Pi)), 1e-15);
  EXPECT_LE(rel_err(gamma_closed_form(1, 0, g, 1.0), ScaledValue(4.1327313541224929385)), 1e-15);
  EXPECT_LE(rel_err(gamma_closed_form(-1, 0, g, 1.0), ScaledValue(4.1327313541224929385)), 1e-15);
  EXPECT_LE(rel_err(gamma_closed_form(0, 1, g, 1.0), ScaledValue(1.5203469010662808056)), 1e-15);
}

TEST(Gamma, QuadratureMatchesClosedForm) {
  const SignalModel g = SignalModel::gaussian(C(0.5, -0.3), -0.4, -1.5);
  const QuadratureControl quad;
  for (int m = -3; m <= 3; ++m) {
    for (int k = -3; k <= 3; ++k) {
      EXPECT_LE(rel_err(gamma_quadrature(m, k, g, 0.8, quad), gamma_closed_form(m, k, g, 0.8)), 10 * quad.tol)
          << m << "," << k;
    }
  }
}

TEST(Gamma, CallbackWithoutDecayMetadataIsRefused) {
  const SignalModel s = SignalModel::callback([](double x) { return C(std::exp(-x * x), 0.0); }, std::nullopt);
  EXPECT_THROW(gamma_quadrature(0, 0, s, 1.0), InvalidParameter);
  EXPECT_THROW(forward_table(s, 1.0, 1, 1), InvalidParameter);
}

TEST(Gamma, CallbackViolatingItsBoundIsRefused) {
  const SignalModel s = SignalModel::callback([](double x) { return C(std::exp(std::abs(x)), 0.0); },
                                              DecayBound{1.0, 0.0});
  EXPECT_THROW(gamma_quadrature(0, 0, s, 1.0), InvalidParameter);
}

TEST(Gamma, QuadratureRefinementCap) {
  QuadratureControl quad;
  quad.tol = 1e-15;
  quad.max_refinements = 1;
  const SignalModel s = SignalModel::callback([](double x) { return C(1.0 / (1.0 + x * x), 0.0); },
                                              DecayBound{1.0, 0.0});
  EXPECT_THROW(gamma_quadrature(0, 7, s, 1.0, quad), NonConvergence);
}

TEST(Gamma, RealSignalHasConjugateSymmetricRows) {
  for (const SignalModel& s : {SignalModel::gaussian(), sech_signal()}) {
    const GammaTable t = forward_table(s, 1.0, 2, 4);
    for (int m = -2; m <= 2; ++m) {
      for (int k = 1; k <= 4; ++k) {
        EXPECT_LE(rel_err(t.at(m, -k), t.at(m, k).conj()), 1e-12) << m << "," << k;
      }
    }
  }
}

TEST(ForwardTable, ShapeAndIndexing) {
  const GammaTable t = forward_table(SignalModel::gaussian(), 1.0, 0, 0);
  EXPECT_EQ(t.values().size(), 1u);
  EXPECT_LE(rel_err(t.at(0, 0), ScaledValue(kSqrt2Pi)), 1e-15);
  EXPECT_THROW((void)t.at(1, 0), InvalidParameter);
  EXPECT_THROW(GammaTable(-1, 0, 1.0), InvalidParameter);
  EXPECT_THROW(forward_table(SignalModel::gaussian(), 0.0, 1, 1), InvalidParameter);
}

TEST(ForwardTable, ZeroAmplitudeGivesZeroTable) {
  const GammaTable t = forward_table(SignalModel::gaussian(C(0.0, 0.0)), 1.0, 2, 3);
  for (const auto& v : t.values()) EXPECT_TRUE(v.is_zero());
}

TEST(ForwardTable, IndependentOfThreadCount) {
  const GammaTable a = forward_table(sech_signal(), 0.9, 3, 6, {{}, 1});
  const GammaTable b = forward_table(sech_signal(), 0.9, 3, 6, {{}, 4});
  EXPECT_TRUE(a == b);
}

TEST(Quadrature, HalfWidthCoversTail) {
  for (double alpha : {0.0, 0.5, 2.0}) {
    const double R = quadrature_half_width(1e-10, alpha);
    EXPECT_LT(std::exp(alpha * R - R * R / 4.0), 1e-10) << alpha;
  }
}

}  // namespace
}  // namespace qlattice

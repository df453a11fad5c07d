// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The qlattice Authors

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "qlattice/errors.hpp"
#include "qlattice/multiprecision.hpp"
#include "qlattice/oracle.hpp"
#include "qlattice/recon.hpp"
#include "test_support.hpp"

namespace qlattice {
namespace {

using C = std::complex<double>;
using testing::rel_err;

TEST(WindowedSeries, SpatialAReferenceValue) {
  const LatticeParams p = nome_from_tau(1.0);
  const C a0 = spatial_A<double>(0, 0.0, SignalModel::gaussian(), p).to_complex();
  EXPECT_LE(std::abs(a0 - C(0.15915494394346595172, 0.0)), 2e-15);
}

TEST(WindowedSeries, OversampledAgrees) {
  const SignalModel s = SignalModel::gaussian_family({{C(1.0, 0.0), 0.7, 2.0}, {C(1.0, 0.0), -1.0, 0.0}});
  for (double r : {0.01, 1.0, 50.0}) {
    const ScaledValue z = ScaledValue::from_log(std::log(r), 0.3);
    EXPECT_LE(rel_err(G_series<double>(z, 0.4, s), G_series_oversampled<double>(z, 0.4, s)), 1e-14) << r;
  }
}

TEST(WindowedSeries, ZeroSignalAndRefusals) {
  const WindowedSeries<double> w(0.0, SignalModel::gaussian(C(0.0, 0.0)), 3.0);
  EXPECT_TRUE(w(ScaledValue(1.0)).is_zero());
  const SignalModel no_decay = SignalModel::callback([](double) { return C(1.0, 0.0); }, std::nullopt);
  EXPECT_THROW(WindowedSeries<double>(0.0, no_decay, 1.0), InvalidParameter);
  EXPECT_THROW(G_series<double>(ScaledValue(), 0.0, SignalModel::gaussian()), DomainError);
  EXPECT_THROW(spatial_A<double>(kMaxLatticeIndex + 1, 0.0, SignalModel::gaussian(), nome_from_tau(1.0)),
               InvalidParameter);
}

TEST(Contour, MatchesClosedFormCoefficients) {
  for (double tau : {0.5, 1.0, 2.0}) {
    const LatticeParams p = nome_from_tau(tau);
    for (int m = -8; m <= 8; ++m) {
      const ScaledValue c = laurent_c0_scaled<double>(m, p, default_contour(m, p));
      EXPECT_LE(rel_err(coeff_E(m, p).value, c), 1e-9) << "tau=" << tau << " m=" << m;
    }
  }
}

TEST(Contour, RadiusAndNodeIndependence) {
  const LatticeParams p = nome_from_tau(1.0);
  for (int m = -3; m <= 3; ++m) {
    const ScaledValue base = laurent_c0_scaled<double>(m, p, default_contour(m, p));
    const ScaledValue other = laurent_c0_scaled<double>(m, p, {std::exp((m >= 0 ? -1.0 : 1.0) * p.log_q), 512});
    const ScaledValue doubled = laurent_c0_scaled<double>(m, p, default_contour(m, p, 1024));
    EXPECT_LE(rel_err(other, base), 1e-12) << m;
    EXPECT_LE(rel_err(doubled, base), 1e-14) << m;
  }
}

TEST(Contour, SpecValidation) {
  const LatticeParams p = nome_from_tau(1.0);
  EXPECT_THROW((ContourSpec{1.0, 100}.validate(0, p)), InvalidParameter);
  EXPECT_THROW((ContourSpec{1.0, 32}.validate(0, p)), InvalidParameter);
  EXPECT_THROW((ContourSpec{1.0, 512}.validate(0, p)), InvalidParameter);  // q^0 = 1 lies on the circle
  EXPECT_THROW((ContourSpec{-1.0, 512}.validate(1, p)), InvalidParameter);
  EXPECT_NO_THROW((ContourSpec{1.0, 512}.validate(1, p)));
}

TEST(Interpolant, ReproducesSamplesAndGuardsNodes) {
  const double q = 0.3;
  const SignalModel s = SignalModel::gaussian();
  const WindowedSeries<double> G(0.2, s, 8.0 * std::abs(std::log(q)));
  const auto samples = lattice_samples<double>(G, 5, q);
  const LagrangeInterpolant<double> interp(samples, q);
  for (const auto& smp : samples) {
    const ScaledValue z = ScaledValue::from_log(smp.n * std::log(q));
    EXPECT_LE(rel_err(interp(z), smp.value), 1e-10) << smp.n;
  }
  const ScaledValue near = ScaledValue(q * (1.0 + 1e-6));
  EXPECT_THROW((void)interp(near), DomainError);
  EXPECT_THROW((void)interp(ScaledValue()), DomainError);
  InterpolantOptions bad;
  bad.node_guard = 0.0;
  EXPECT_THROW(LagrangeInterpolant<double>(samples, q, bad), InvalidParameter);
}

TEST(Interpolant, ResidualIsSmallInExtendedPrecision) {
  const LatticeParams p = nome_from_tau(1.0);
  TraceOptions opts;
  opts.angles = 16;
  const auto trace = mk_trace<HighPrecision>(TraceKind::residual_alpha, -1, 1, 0.3, SignalModel::gaussian(), p, opts);
  ASSERT_EQ(trace.size(), 3u);
  for (const auto& t : trace) EXPECT_LE(t.maximum, 1e-8 * t.scale) << t.k;
}

TEST(Trace, RefusesOutsideSubcriticalRegime) {
  EXPECT_THROW(mk_trace<double>(TraceKind::G_over_theta, 0, 1, 0.0, SignalModel::gaussian(), nome_from_tau(4.0)),
               RegimeError);
  EXPECT_TRUE(mk_trace<double>(TraceKind::G_over_theta, 1, 0, 0.0, SignalModel::gaussian(), nome_from_tau(1.0))
                  .empty());
}

TEST(Trace, DefaultSampleRange) {
  EXPECT_GE(default_sample_range(nome_from_tau(1.0), -4, 4), 7);
  EXPECT_LE(default_sample_range(nome_from_tau(3.14), -4, 4), kMaxLatticeIndex);
}

}  // namespace
}  // namespace qlattice

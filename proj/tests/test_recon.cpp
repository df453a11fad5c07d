// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The qlattice Authors

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "qlattice/errors.hpp"
#include "qlattice/recon.hpp"
#include "qlattice/sweep.hpp"
#include "test_support.hpp"

namespace qlattice {
namespace {

using C = std::complex<double>;
constexpr double kPi = std::numbers::pi;

SignalModel two_component() {
  return SignalModel::gaussian_family({{C(1.0, 0.0), 0.7, 2.0}, {C(1.0, 0.0), -1.0, 0.0}});
}

ReconReport round_trip(const SignalModel& s, double tau, ReconConfig cfg = {}) {
  const LatticeParams p = nome_from_tau(tau);
  const GammaTable table = forward_table(s, tau, 12, 40);
  return reconstruct_grid(cfg, table, p, s);
}

TEST(Recon, NormalizationConstant) {
  EXPECT_DOUBLE_EQ(kNormalization, 1.0 / (2.0 * kPi));
  EXPECT_NEAR(calibrate_normalization(nome_from_tau(1.0)) / kNormalization, 1.0, 1e-8);
  EXPECT_NEAR(calibrate_normalization(nome_from_tau(0.6)) / kNormalization, 1.0, 1e-8);
}

TEST(Recon, UnitGaussianAutoTruncation) {
  const ReconReport r = round_trip(SignalModel::gaussian(), 1.0);
  ASSERT_TRUE(r.sup_error);
  EXPECT_LE(*r.sup_error, 1e-6);
  EXPECT_GE(r.M_used, 4);
  EXPECT_LE(r.M_used, 7);
  EXPECT_EQ(r.xs.size(), 121u);
  EXPECT_EQ(r.tail_anomalies, 0u);
  EXPECT_LE(r.tail_estimate, 1e-8);
}

TEST(Recon, TwoComponentL2) {
  const ReconReport r = round_trip(two_component(), 0.8);
  ASSERT_TRUE(r.l2_error);
  EXPECT_LE(*r.l2_error, 1e-5);
}

TEST(Recon, InnerSumFormsAgree) {
  const GammaTable t = forward_table(two_component(), 1.0, 0, 9);
  for (double x : {-2.0, 0.0, 0.37, 3.0}) {
    const C a = inner_fourier_sum(t.row(0), x, 9).to_complex();
    const C b = inner_fourier_sum_horner(t.row(0), x, 9).to_complex();
    EXPECT_LE(std::abs(a - b), 1e-13 * std::abs(a)) << x;
  }
  EXPECT_THROW(inner_fourier_sum(t.row(0), 0.0, 8), InvalidParameter);
}

TEST(Recon, FourierGridAgreesWithDirect) {
  const SignalModel s = two_component();
  const double tau = 0.9;
  const GammaTable table = forward_table(s, tau, 8, 24);
  ReconConfig cfg;
  cfg.truncation = std::make_pair(6, 20);
  std::vector<double> pts;
  for (int i = -8; i <= 8; ++i) pts.push_back(i * kPi / 4.0);  // residues repeat mod 2 pi
  cfg.grid.points = pts;
  const ReconReport direct = reconstruct_grid(cfg, table, nome_from_tau(tau), s);
  cfg.mode = ReconMode::fourier_grid;
  const ReconReport grid = reconstruct_grid(cfg, table, nome_from_tau(tau), s);
  EXPECT_EQ(grid.mode, ReconMode::fourier_grid);
  EXPECT_EQ(grid.residue_buckets, 8u);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_LE(std::abs(direct.reconstructed[i] - grid.reconstructed[i]), 1e-10) << pts[i];
  }
}

TEST(Recon, FourierGridFallsBackWithoutRepeats) {
  ReconConfig cfg;
  cfg.mode = ReconMode::fourier_grid;
  cfg.grid.x_min = -1;
  cfg.grid.x_max = 1;
  cfg.grid.step = 0.5;
  const ReconReport r = round_trip(SignalModel::gaussian(), 1.0, cfg);
  EXPECT_EQ(r.mode, ReconMode::direct);
}

TEST(Recon, RegimeGate) {
  const SignalModel g = SignalModel::gaussian();
  for (double tau : {kPi, 4.0}) {
    const GammaTable t = forward_table(g, tau, 2, 4);
    ReconConfig cfg;
    cfg.truncation = std::make_pair(2, 4);
    EXPECT_THROW(reconstruct_grid(cfg, t, nome_from_tau(tau), g), RegimeError) << tau;
  }
  const GammaTable t = forward_table(g, kPi, 2, 4);
  ReconConfig cfg;
  cfg.truncation = std::make_pair(2, 4);
  cfg.allow_critical = true;
  EXPECT_NO_THROW(reconstruct_grid(cfg, t, nome_from_tau(kPi), g));
}

TEST(Recon, TauMismatchIsRejected) {
  const GammaTable t = forward_table(SignalModel::gaussian(), 1.0, 2, 4);
  ReconConfig cfg;
  cfg.truncation = std::make_pair(2, 4);
  EXPECT_THROW(reconstruct_grid(cfg, t, nome_from_tau(1.1)), InvalidParameter);
}

TEST(Recon, TruncationBeyondTableIsRejected) {
  const GammaTable t = forward_table(SignalModel::gaussian(), 1.0, 2, 4);
  ReconConfig cfg;
  cfg.truncation = std::make_pair(3, 4);
  EXPECT_THROW(reconstruct_grid(cfg, t, nome_from_tau(1.0)), InvalidParameter);
}

TEST(Recon, AutoTruncationNeedsTailRows) {
  const GammaTable t = forward_table(SignalModel::gaussian(), 1.0, 4, 6);
  EXPECT_THROW(reconstruct_grid({}, t, nome_from_tau(1.0)), NonConvergence);
}

TEST(Recon, EmptyGrid) {
  ReconConfig cfg;
  cfg.grid.points = std::vector<double>{};
  const ReconReport r = round_trip(SignalModel::gaussian(), 1.0, cfg);
  EXPECT_TRUE(r.xs.empty());
  EXPECT_FALSE(r.sup_error);
}

TEST(Recon, NoReferenceMeansNoErrors) {
  const LatticeParams p = nome_from_tau(1.0);
  const GammaTable t = forward_table(SignalModel::gaussian(), 1.0, 12, 40);
  const ReconReport r = reconstruct_grid({}, t, p);
  EXPECT_FALSE(r.reference);
  EXPECT_FALSE(r.sup_error);
  EXPECT_EQ(r.reconstructed.size(), 121u);
}

TEST(Grid, Expansion) {
  GridSpec g;
  EXPECT_EQ(g.expand().size(), 121u);
  EXPECT_DOUBLE_EQ(g.expand().back(), 3.0);
  g.step = 1e-7;
  g.x_min = -1;
  g.x_max = 1;
  EXPECT_THROW(g.expand(), InvalidParameter);
  g.step = 0.0;
  EXPECT_THROW(g.expand(), InvalidParameter);
}

TEST(Config, Validation) {
  ReconConfig cfg;
  cfg.tol = 0.0;
  EXPECT_THROW(cfg.validate(), InvalidParameter);
  cfg.tol = 1e-8;
  cfg.truncation = std::make_pair(-1, 2);
  EXPECT_THROW(cfg.validate(), InvalidParameter);
}

TEST(AutoTruncation, EscalatesNearCriticalDensity) {
  const double tau = 0.99 * kPi;
  const SignalModel g = SignalModel::gaussian();
  const TruncationChoice t = auto_truncation(nome_from_tau(tau), 1e-8, 3.0, signal_source(g, tau));
  EXPECT_GE(t.M_base, 15);
  EXPECT_GE(t.M, t.M_base);
  EXPECT_THROW(auto_truncation(nome_from_tau(4.0), 1e-8, 3.0, signal_source(g, 4.0)), RegimeError);
}

TEST(Sweep, DegradesAndRefuses) {
  const SignalModel s = SignalModel::callback([](double x) { return C(std::exp(-0.01 * x * x), 0.0); },
                                              DecayBound{1.0, 0.0});
  SweepConfig cfg;
  cfg.taus = {0.5 * kPi, 0.8 * kPi, 0.95 * kPi, 1.05 * kPi};
  cfg.grid.step = 0.1;
  const auto rows = run_sweep(s, cfg);
  ASSERT_EQ(rows.size(), 4u);
  for (int i = 0; i < 3; ++i) ASSERT_EQ(rows[i].status, SweepStatus::ok);
  EXPECT_LE(*rows[0].sup_error, *rows[1].sup_error);
  EXPECT_LE(*rows[1].sup_error, *rows[2].sup_error);
  EXPECT_EQ(rows[3].status, SweepStatus::refused);
  EXPECT_FALSE(rows[3].sup_error);
  EXPECT_FALSE(rows[3].note.empty());
}

}  // namespace
}  // namespace qlattice

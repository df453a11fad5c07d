// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The qlattice Authors

#include <gtest/gtest.h>

#include <algorithm>
#include <complex>
#include <numbers>
#include <string>

#include "qlattice/verify.hpp"

namespace qlattice {
namespace {

const CheckResult* find_check(const VerifyReport& r, const std::string& name) {
  for (const auto& c : r.checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::string failures(const VerifyReport& r) {
  std::string out;
  for (const auto& c : r.checks) {
    if (!c.passed) out += c.name + " residual " + std::to_string(c.residual) + "; ";
  }
  return out;
}

TEST(Verify, SuiteNames) {
  EXPECT_EQ(parse_suite("theta"), Suite::theta);
  EXPECT_EQ(parse_suite("all"), Suite::all);
  EXPECT_FALSE(parse_suite("everything"));
}

TEST(Verify, ThetaSuiteAtTauOne) {
  const VerifyReport r = run_verify(1.0, Suite::theta);
  EXPECT_TRUE(r.all_passed()) << failures(r);
  for (const auto& c : r.checks) {
    if (c.note.rfind("skipped", 0) == 0) continue;
    if (c.name.find("refuted") != std::string::npos) {
      EXPECT_GE(c.residual, c.threshold) << c.name;
    } else {
      EXPECT_LE(c.residual, c.threshold) << c.name;
    }
  }
  const CheckResult* printed = find_check(r, "derivative_printed_closed_form_refuted");
  ASSERT_NE(printed, nullptr);
  EXPECT_NE(printed->note.find("7.0499"), std::string::npos) << printed->note;
}

TEST(Verify, CoefficientSuiteRecordsPassingVariant) {
  const VerifyReport r = run_verify(1.0, Suite::coeffs);
  EXPECT_TRUE(r.all_passed()) << failures(r);
  const CheckResult* c = find_check(r, "coeff_E_vs_contour");
  ASSERT_NE(c, nullptr);
  EXPECT_NE(c->note.find("m(m+1)/2"), std::string::npos) << c->note;
}

TEST(Verify, NearCriticalRecordsEscalation) {
  const VerifyReport r = run_verify(0.99 * std::numbers::pi, Suite::coeffs);
  EXPECT_TRUE(r.all_passed()) << failures(r);
  ASSERT_NE(find_check(r, "coeff_roundtrip"), nullptr);
  const bool escalated = std::any_of(r.notes.begin(), r.notes.end(), [](const std::string& n) {
    return n.find("truncation escalation") != std::string::npos;
  });
  EXPECT_TRUE(escalated);
}

TEST(Verify, PoissonOnZeroSignalIsVacuous) {
  VerifyOptions opts;
  opts.signals = {SignalModel::gaussian(std::complex<double>(0.0, 0.0))};
  const VerifyReport r = run_verify(1.0, Suite::poisson, opts);
  EXPECT_TRUE(r.all_passed()) << failures(r);
  const bool noted = std::any_of(r.checks.begin(), r.checks.end(),
                                 [](const CheckResult& c) { return c.note.find("degenerate input") != std::string::npos; });
  EXPECT_TRUE(noted);
}

TEST(Verify, SupercriticalSkipsReconstructionChecks) {
  const VerifyReport r = run_verify(4.0, Suite::all);
  EXPECT_EQ(r.regime, Regime::supercritical);
  EXPECT_TRUE(r.all_passed()) << failures(r);
  EXPECT_FALSE(r.notes.empty());
}

TEST(Verify, InterpolationSuiteAtTauOne) {
  const VerifyReport r = run_verify(1.0, Suite::interpolation);
  EXPECT_TRUE(r.all_passed()) << failures(r);
  EXPECT_NE(find_check(r, "lemma_residual_alpha"), nullptr);
}

}  // namespace
}  // namespace qlattice

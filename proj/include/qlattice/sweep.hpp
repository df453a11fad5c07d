// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The qlattice Authors

#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qlattice/errors.hpp"
#include "qlattice/qtheta.hpp"
#include "qlattice/recon.hpp"
#include "qlattice/signal.hpp"

namespace qlattice {

enum class SweepStatus { ok, refused, diverged };

inline const char* to_string(SweepStatus s) {
  switch (s) {
    case SweepStatus::ok:
      return "ok";
    case SweepStatus::refused:
      return "refused";
    case SweepStatus::diverged:
      return "diverged";
  }
  return "unknown";
}

struct SweepRow {
  double tau = 0.0;
  Regime regime = Regime::subcritical;
  SweepStatus status = SweepStatus::ok;
  std::optional<double> sup_error;
  std::optional<double> l2_error;
  int M = 0;
  int K = 0;
  /// log of the largest weighted outer row over the weighted centre row,
  /// max_{|m|=M} |E_m| e^{|m| tau X} sum_k |gamma_{m,k}| against m = 0.
  /// Negative when the exterior sum is decaying.
  double log_tail_growth = 0.0;
  std::string note;
};

struct SweepConfig {
  std::vector<double> taus;
  int M = 2;
  int K = 30;
  GridSpec grid;
  QuadratureControl quad;
  int threads = 0;
};

namespace detail {

inline double log_row_weight(const GammaTable& table, const LatticeParams& params, int m, double X) {
  double lmax = -std::numeric_limits<double>::infinity();
  for (int k = -table.K(); k <= table.K(); ++k) lmax = std::max(lmax, table.at(m, k).log_abs());
  if (!std::isfinite(lmax)) return lmax;
  double s = 0.0;
  for (int k = -table.K(); k <= table.K(); ++k) s += std::exp(table.at(m, k).log_abs() - lmax);
  return coeff_E_closed_form(m, params).log_abs() + std::abs(m) * params.tau * X + lmax + std::log(s);
}

}  // namespace detail

/// Fixed-truncation round trips across tau.  Rows at or beyond the critical
/// density are refused, with the growth of the weighted outer rows recorded
/// as the divergence symptom.
inline std::vector<SweepRow> run_sweep(const SignalModel& s, const SweepConfig& cfg) {
  if (cfg.M < 0 || cfg.K < 0) throw InvalidParameter("sweep needs M, K >= 0");
  const auto xs = cfg.grid.expand();
  double X = 0.0;
  for (double x : xs) X = std::max(X, std::abs(x));
  std::vector<SweepRow> rows;
  for (double tau : cfg.taus) {
    const LatticeParams params = nome_from_tau(tau);
    SweepRow row;
    row.tau = tau;
    row.regime = params.regime;
    row.M = cfg.M;
    row.K = cfg.K;
    const GammaTable table = forward_table(s, tau, cfg.M, cfg.K, {cfg.quad, cfg.threads});
    const double centre = detail::log_row_weight(table, params, 0, X);
    double outer = -std::numeric_limits<double>::infinity();
    if (cfg.M > 0) {
      for (int m : {cfg.M, -cfg.M}) outer = std::max(outer, detail::log_row_weight(table, params, m, X));
    }
    row.log_tail_growth = std::isfinite(centre) && std::isfinite(outer) ? outer - centre : 0.0;
    if (params.regime != Regime::subcritical) {
      row.status = SweepStatus::refused;
      row.note = std::string("tau is ") + to_string(params.regime) +
                 ": lattice coefficients do not determine the signal (log outer/centre row weight " +
                 std::to_string(row.log_tail_growth) + ")";
      rows.push_back(std::move(row));
      continue;
    }
    ReconConfig rc;
    rc.grid = cfg.grid;
    rc.truncation = std::make_pair(cfg.M, cfg.K);
    rc.threads = cfg.threads;
    try {
      const ReconReport r = reconstruct_grid(rc, table, params, s);
      row.sup_error = r.sup_error;
      row.l2_error = r.l2_error;
      if (r.tail_anomalies > 0) row.note = std::to_string(r.tail_anomalies) + " points with a non-decreasing tail";
    } catch (const Saturation& e) {
      row.status = SweepStatus::diverged;
      row.note = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace qlattice

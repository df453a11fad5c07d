// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The qlattice Authors

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qlattice/errors.hpp"
#include "qlattice/parallel.hpp"
#include "qlattice/qtheta.hpp"
#include "qlattice/scaled.hpp"
#include "qlattice/signal.hpp"

namespace qlattice {

/// Global constant in front of the reconstruction sum.  Confirmed by
/// calibrate_normalization() against the unit Gaussian.
inline constexpr double kNormalization = 1.0 / (2.0 * std::numbers::pi);

/// Largest grid accepted by reconstruct_grid.
inline constexpr std::size_t kMaxGridPoints = 10'000'000;

inline constexpr int kMaxAutoM = 64;
inline constexpr int kMaxAutoK = 4096;

/// E_m for m in [-M, M].
class CoefficientTable {
 public:
  CoefficientTable() = default;

  CoefficientTable(const LatticeParams& params, int M, const SeriesControl& ctrl = {})
      : M_(M), tau_(params.tau) {
    if (M < 0) throw InvalidParameter("coefficient table needs M >= 0");
    values_.reserve(2 * M + 1);
    for (int m = -M; m <= M; ++m) values_.push_back(coeff_E_closed_form(m, params, CoefficientVariant::corrected, ctrl));
  }

  int M() const noexcept { return M_; }
  double tau() const noexcept { return tau_; }

  const ScaledValue& at(int m) const {
    if (std::abs(m) > M_) throw InvalidParameter("coefficient index outside the table");
    return values_[static_cast<std::size_t>(m + M_)];
  }

 private:
  int M_ = 0;
  double tau_ = 0.0;
  std::vector<ScaledValue> values_;
};

/// sum_{k=-K}^{K} gamma_{m,k} e^{i k x}, accumulated k = 0, +-1, +-2, ...
inline ScaledValue inner_fourier_sum(std::span<const ScaledValue> row, double x, int K) {
  if (K < 0 || row.size() != static_cast<std::size_t>(2 * K + 1)) {
    throw InvalidParameter("inner_fourier_sum: row must hold 2K+1 entries");
  }
  ScaledValue acc = row[K];
  for (int k = 1; k <= K; ++k) {
    acc += row[K + k] * ScaledValue(std::polar(1.0, k * x));
    acc += row[K - k] * ScaledValue(std::polar(1.0, -k * x));
  }
  return acc;
}

/// Same sum by Horner's rule in w = e^{i x}: one complex exponential per
/// evaluation instead of 2K.
inline ScaledValue inner_fourier_sum_horner(std::span<const ScaledValue> row, double x, int K) {
  if (K < 0 || row.size() != static_cast<std::size_t>(2 * K + 1)) {
    throw InvalidParameter("inner_fourier_sum: row must hold 2K+1 entries");
  }
  const ScaledValue w(std::polar(1.0, x));
  ScaledValue acc = row[2 * K];
  for (int j = 2 * K - 1; j >= 0; --j) acc = acc * w + row[j];
  return acc * ScaledValue(std::polar(1.0, -K * x));
}

namespace detail {

inline void check_regime_for_recon(const LatticeParams& params, bool allow_critical) {
  if (params.regime == Regime::supercritical) {
    throw RegimeError("tau > pi: the lattice is too sparse, lattice coefficients do not determine the signal");
  }
  if (params.regime == Regime::critical && !allow_critical) {
    throw RegimeError("tau = pi is critical; reconstruction refused (allow_critical overrides)");
  }
}

/// The row of the table restricted to |k| <= K.
inline std::span<const ScaledValue> row_window(const GammaTable& table, int m, int K) {
  return table.row(m).subspan(static_cast<std::size_t>(table.K() - K), static_cast<std::size_t>(2 * K + 1));
}

struct PointSum {
  std::complex<double> value;
  bool tail_anomaly = false;
};

/// Exterior sum over m = 0, +-1, +-2, ... given the inner sums per row.
template <class Inner>
PointSum exterior_sum(double x, const LatticeParams& params, const CoefficientTable& coeffs, int M,
                      Inner&& inner) {
  ScaledValue acc;
  double prev_shell = 0.0;
  double last_shell = 0.0;
  for (int d = 0; d <= M; ++d) {
    ScaledValue shell;
    for (int m : {d, -d}) {
      shell += coeffs.at(m) * ScaledValue::from_log(m * params.tau * x) * inner(m);
      if (d == 0) break;
    }
    acc += shell;
    prev_shell = last_shell;
    last_shell = shell.log_abs();
  }
  PointSum out;
  out.value = (ScaledValue::from_log(x * x / 4.0) * acc * ScaledValue(kNormalization)).to_complex();
  out.tail_anomaly = M >= 2 && std::isfinite(last_shell) && last_shell >= prev_shell;
  return out;
}

inline void check_ranges(const GammaTable& table, const CoefficientTable& coeffs, int M, int K) {
  if (M < 0 || K < 0) throw InvalidParameter("truncation orders must be non-negative");
  if (M > table.M() || K > table.K()) throw InvalidParameter("truncation exceeds the gamma table");
  if (M > coeffs.M()) throw InvalidParameter("truncation exceeds the coefficient table");
}

}  // namespace detail

struct ReconOptions {
  bool allow_critical = false;
};

/// (1/2pi) e^{x^2/4} sum_m E_m e^{m tau x} sum_k gamma_{m,k} e^{i k x}.
inline std::complex<double> reconstruct_point(double x, const GammaTable& table, const LatticeParams& params,
                                              const CoefficientTable& coeffs, int M, int K,
                                              const ReconOptions& opts = {}) {
  detail::check_regime_for_recon(params, opts.allow_critical);
  detail::check_ranges(table, coeffs, M, K);
  return detail::exterior_sum(x, params, coeffs, M, [&](int m) {
           return inner_fourier_sum(detail::row_window(table, m, K), x, K);
         }).value;
}

// ---------------------------------------------------------------------------
// Truncation
// ---------------------------------------------------------------------------

/// Supplies gamma_{m,k}; returns nullopt outside the available range.
using GammaSource = std::function<std::optional<ScaledValue>(int m, int k)>;

inline GammaSource table_source(const GammaTable& table) {
  return [&table](int m, int k) -> std::optional<ScaledValue> {
    if (!table.contains(m, k)) return std::nullopt;
    return table.at(m, k);
  };
}

inline GammaSource signal_source(const SignalModel& s, double tau, const QuadratureControl& quad = {}) {
  return [s, tau, quad](int m, int k) -> std::optional<ScaledValue> { return gamma_entry(m, k, s, tau, quad); };
}

struct TruncationChoice {
  int M = 0;
  int K = 0;
  int M_base = 0;          ///< from the decay rate alone
  double tail_estimate = 0.0;  ///< omitted rows and columns relative to the signal scale
};

/// Picks (M, K) for relative accuracy tol on |x| <= x_extent.
///
/// M starts at the smallest value with exp(-eps M^2) < tol/10, where
/// eps = tau (pi - tau) is the decay rate of the weighted rows, and grows
/// while the next two omitted rows still exceed tol.  K grows until the
/// two columns beyond K, weighted the same way, fall below tol.
inline TruncationChoice auto_truncation(const LatticeParams& params, double tol, double x_extent,
                                        const GammaSource& source, int max_M = kMaxAutoM,
                                        int max_K = kMaxAutoK) {
  if (params.regime != Regime::subcritical) {
    throw RegimeError(std::string("auto_truncation refused: tau is ") + to_string(params.regime));
  }
  if (!(tol > 0.0) || tol >= 1.0) throw InvalidParameter("tol must lie in (0, 1)");
  const double X = std::abs(x_extent);
  const double tau = params.tau;
  const double eps = tau * (std::numbers::pi - tau);

  TruncationChoice out;
  out.M_base = std::max(1, static_cast<int>(std::ceil(std::sqrt(std::log(10.0 / tol) / eps))));
  if (out.M_base > max_M) {
    throw NonConvergence("auto_truncation: base estimate M = " + std::to_string(out.M_base) +
                         " exceeds the cap " + std::to_string(max_M));
  }

  std::map<std::pair<int, int>, ScaledValue> gamma_cache;
  auto gamma = [&](int m, int k) -> const ScaledValue& {
    auto key = std::make_pair(m, k);
    auto it = gamma_cache.find(key);
    if (it != gamma_cache.end()) return it->second;
    auto v = source(m, k);
    if (!v) {
      throw NonConvergence("auto_truncation: coefficients for (m, k) = (" + std::to_string(m) + ", " +
                           std::to_string(k) + ") unavailable; the table is too small");
    }
    return gamma_cache.emplace(key, *v).first->second;
  };
  std::map<int, ScaledValue> coeff_cache;
  auto coeff = [&](int m) -> const ScaledValue& {
    auto it = coeff_cache.find(m);
    if (it != coeff_cache.end()) return it->second;
    return coeff_cache.emplace(m, coeff_E_closed_form(m, params)).first->second;
  };
  // log of max_{|x|<=X} (1/2pi) e^{x^2/4} |E_m| e^{m tau x}, the weight of row m.
  auto log_weight = [&](int m) {
    return X * X / 4.0 + std::abs(m) * tau * X + coeff(m).log_abs() + std::log(kNormalization);
  };
  auto row_norm = [&](int m, int K) {
    double s = 0.0;
    double lmax = -std::numeric_limits<double>::infinity();
    for (int k = -K; k <= K; ++k) lmax = std::max(lmax, gamma(m, k).log_abs());
    if (!std::isfinite(lmax)) return lmax;
    for (int k = -K; k <= K; ++k) s += std::exp(gamma(m, k).log_abs() - lmax);
    return lmax + std::log(s);
  };
  // max over a coarse grid of |partial reconstruction|.
  auto signal_scale = [&](int M, int K) {
    double best = 0.0;
    const int samples = 33;
    for (int i = 0; i < samples; ++i) {
      const double x = samples == 1 ? 0.0 : -X + 2.0 * X * i / (samples - 1);
      ScaledValue acc;
      for (int m = -M; m <= M; ++m) {
        ScaledValue inner;
        for (int k = -K; k <= K; ++k) inner += gamma(m, k) * ScaledValue(std::polar(1.0, k * x));
        acc += coeff(m) * ScaledValue::from_log(m * tau * x) * inner;
      }
      acc *= ScaledValue::from_log(x * x / 4.0) * ScaledValue(kNormalization);
      best = std::max(best, std::exp(acc.log_abs()));
    }
    return best;
  };
  auto rows_tail = [&](int M, int K) {
    double t = 0.0;
    for (int m : {M + 1, -(M + 1), M + 2, -(M + 2)}) t += std::exp(log_weight(m) + row_norm(m, K));
    return t;
  };
  auto cols_tail = [&](int M, int K) {
    double worst = 0.0;
    for (int m = -M; m <= M; ++m) {
      double t = 0.0;
      for (int k : {K + 1, -(K + 1), K + 2, -(K + 2)}) t += std::exp(log_weight(m) + gamma(m, k).log_abs());
      worst = std::max(worst, t);
    }
    return worst;
  };

  int M = out.M_base;
  int K = std::min(4, max_K);
  double scale = 0.0;
  for (int iter = 0; iter < 16; ++iter) {
    scale = signal_scale(M, K);
    if (scale == 0.0) break;  // zero signal: nothing to resolve
    int newM = M;
    while (rows_tail(newM, K) > tol * scale) {
      if (++newM > max_M) throw NonConvergence("auto_truncation: M exceeded its cap before the tail fell below tol");
    }
    int newK = K;
    while (cols_tail(newM, newK) > tol * scale) {
      if (++newK > max_K) throw NonConvergence("auto_truncation: K exceeded its cap before the tail fell below tol");
    }
    const bool stable = newM == M && newK == K;
    M = newM;
    K = newK;
    if (stable) break;
  }
  out.M = M;
  out.K = K;
  out.tail_estimate = scale > 0.0 ? (rows_tail(M, K) + cols_tail(M, K)) / scale : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Grid reconstruction
// ---------------------------------------------------------------------------

enum class ReconMode { direct, fourier_grid };

inline const char* to_string(ReconMode m) { return m == ReconMode::direct ? "direct" : "fourier_grid"; }

/// Evaluation points: a uniform range or an explicit list.
struct GridSpec {
  double x_min = -3.0;
  double x_max = 3.0;
  double step = 0.05;
  std::optional<std::vector<double>> points;

  std::vector<double> expand() const {
    if (points) {
      if (points->size() > kMaxGridPoints) throw InvalidParameter("grid exceeds the 1e7-point limit");
      for (double x : *points) {
        if (!std::isfinite(x)) throw InvalidParameter("grid points must be finite");
      }
      return *points;
    }
    if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_min < x_max)) {
      throw InvalidParameter("grid needs finite x_min < x_max");
    }
    if (!(step > 0.0) || !std::isfinite(step)) throw InvalidParameter("grid step must be positive");
    const double span = (x_max - x_min) / step;
    if (span + 1.0 > static_cast<double>(kMaxGridPoints)) throw InvalidParameter("grid exceeds the 1e7-point limit");
    const std::size_t n = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i) xs[i] = x_min + static_cast<double>(i) * step;
    return xs;
  }
};

struct ReconConfig {
  double tol = 1e-8;
  GridSpec grid;
  ReconMode mode = ReconMode::direct;
  std::optional<std::pair<int, int>> truncation;  ///< explicit (M, K); nullopt means automatic
  int threads = 0;
  bool allow_critical = false;

  void validate() const {
    if (!(tol > 0.0) || !(tol < 1.0)) throw InvalidParameter("tol must lie in (0, 1)");
    if (truncation && (truncation->first < 0 || truncation->second < 0)) {
      throw InvalidParameter("explicit truncation needs M, K >= 0");
    }
    (void)grid.expand();
  }
};

struct ReconReport {
  std::vector<double> xs;
  std::vector<std::complex<double>> reconstructed;
  std::optional<std::vector<std::complex<double>>> reference;
  std::optional<double> sup_error;  ///< max|rec - ref| / max|ref|
  std::optional<double> l2_error;   ///< ||rec - ref||_2 / ||ref||_2
  int M_used = 0;
  int K_used = 0;
  double tail_estimate = 0.0;
  std::size_t tail_anomalies = 0;  ///< points whose last shell did not shrink
  std::size_t residue_buckets = 0;  ///< distinct residues mod 2 pi (fourier_grid)
  ReconMode mode = ReconMode::direct;
  double elapsed_seconds = 0.0;
};

/// Relative sup and L2 errors of `rec` against `ref`; absolute when ref is 0.
inline std::pair<double, double> relative_errors(std::span<const std::complex<double>> rec,
                                                 std::span<const std::complex<double>> ref) {
  double max_err = 0.0, max_ref = 0.0, sq_err = 0.0, sq_ref = 0.0;
  for (std::size_t i = 0; i < rec.size(); ++i) {
    const double e = std::abs(rec[i] - ref[i]);
    const double r = std::abs(ref[i]);
    max_err = std::max(max_err, e);
    max_ref = std::max(max_ref, r);
    sq_err += e * e;
    sq_ref += r * r;
  }
  const double sup = max_ref > 0.0 ? max_err / max_ref : max_err;
  const double l2 = sq_ref > 0.0 ? std::sqrt(sq_err / sq_ref) : std::sqrt(sq_err);
  return {sup, l2};
}

inline ReconReport reconstruct_grid(const ReconConfig& config, const GammaTable& table, const LatticeParams& params,
                                    const std::optional<SignalModel>& reference = std::nullopt) {
  const auto start = std::chrono::steady_clock::now();
  config.validate();
  detail::check_regime_for_recon(params, config.allow_critical);
  if (std::abs(table.tau() - params.tau) > 1e-15 * params.tau) {
    throw InvalidParameter("gamma table was built for a different tau");
  }

  ReconReport report;
  report.mode = config.mode;
  report.xs = config.grid.expand();
  const auto& xs = report.xs;

  if (config.truncation) {
    report.M_used = config.truncation->first;
    report.K_used = config.truncation->second;
  } else {
    double extent = 0.0;
    for (double x : xs) extent = std::max(extent, std::abs(x));
    const auto choice = auto_truncation(params, config.tol, extent, table_source(table));
    report.M_used = choice.M;
    report.K_used = choice.K;
    report.tail_estimate = choice.tail_estimate;
  }
  const int M = report.M_used;
  const int K = report.K_used;
  const CoefficientTable coeffs(params, M);
  detail::check_ranges(table, coeffs, M, K);

  const unsigned threads = resolve_threads(config.threads);
  report.reconstructed.assign(xs.size(), {});
  std::vector<char> anomalies(xs.size(), 0);

  // fourier_grid only pays off when residues mod 2 pi repeat; otherwise it
  // falls back to the direct path.
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<double> bucket_residue;
  std::vector<std::size_t> bucket_of;
  if (config.mode == ReconMode::fourier_grid) {
    std::vector<std::pair<double, std::size_t>> residues(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double r = std::fmod(xs[i], two_pi);
      if (r < 0.0) r += two_pi;
      residues[i] = {r, i};
    }
    std::sort(residues.begin(), residues.end());
    bucket_of.resize(xs.size());
    for (const auto& [r, i] : residues) {
      if (bucket_residue.empty() || r - bucket_residue.back() > 1e-13) bucket_residue.push_back(r);
      bucket_of[i] = bucket_residue.size() - 1;
    }
    report.residue_buckets = bucket_residue.size();
    if (bucket_residue.size() == xs.size()) report.mode = ReconMode::direct;
  }

  if (report.mode == ReconMode::direct) {
    parallel_for(xs.size(), threads, [&](std::size_t i) {
      const double x = xs[i];
      const auto r = detail::exterior_sum(x, params, coeffs, M, [&](int m) {
        return inner_fourier_sum(detail::row_window(table, m, K), x, K);
      });
      report.reconstructed[i] = r.value;
      anomalies[i] = r.tail_anomaly;
    });
  } else {
    // Inner sums are 2 pi periodic: evaluate them once per distinct residue.
    const std::size_t rows = static_cast<std::size_t>(2 * M + 1);
    std::vector<ScaledValue> inner(bucket_residue.size() * rows);
    parallel_for(bucket_residue.size(), threads, [&](std::size_t b) {
      for (int m = -M; m <= M; ++m) {
        inner[b * rows + static_cast<std::size_t>(m + M)] =
            inner_fourier_sum_horner(detail::row_window(table, m, K), bucket_residue[b], K);
      }
    });
    parallel_for(xs.size(), threads, [&](std::size_t i) {
      const std::size_t b = bucket_of[i];
      const auto r = detail::exterior_sum(xs[i], params, coeffs, M, [&](int m) {
        return inner[b * rows + static_cast<std::size_t>(m + M)];
      });
      report.reconstructed[i] = r.value;
      anomalies[i] = r.tail_anomaly;
    });
  }
  report.tail_anomalies = static_cast<std::size_t>(std::count(anomalies.begin(), anomalies.end(), 1));

  if (reference) {
    std::vector<std::complex<double>> ref(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) ref[i] = eval_signal(*reference, xs[i]);
    if (!xs.empty()) {  // no points, no error to report
      const auto [sup, l2] = relative_errors(report.reconstructed, ref);
      report.sup_error = sup;
      report.l2_error = l2;
    }
    report.reference = std::move(ref);
  }
  report.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

/// Fits the constant C0 in f(x) = C0 e^{x^2/4} sum_m ... from the unit
/// Gaussian at x = 0, where f(0) = 1.
inline double calibrate_normalization(const LatticeParams& params, int M = 12, int K = 40) {
  detail::check_regime_for_recon(params, false);
  const SignalModel unit = SignalModel::gaussian();
  ScaledValue acc;
  for (int d = 0; d <= M; ++d) {
    for (int m : {d, -d}) {
      ScaledValue inner;
      for (int k = -K; k <= K; ++k) inner += gamma_closed_form(m, k, unit, params.tau);
      acc += coeff_E_closed_form(m, params) * inner;
      if (d == 0) break;
    }
  }
  return 1.0 / acc.to_complex().real();
}

}  // namespace qlattice

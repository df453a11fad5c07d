// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The qlattice Authors

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "qlattice/errors.hpp"
#include "qlattice/numeric.hpp"
#include "qlattice/parallel.hpp"
#include "qlattice/qtheta.hpp"
#include "qlattice/scaled.hpp"
#include "qlattice/signal.hpp"

namespace qlattice {

// ---------------------------------------------------------------------------
// Windowed Poisson series G_x(z) = sum_j g(x + 2 pi j) z^j,
// g = (1/2pi) f e^{-x^2/4}
// ---------------------------------------------------------------------------

/// The coefficients g(x + 2 pi j), j in [j_min, j_max], frozen once so that
/// every evaluation sums the same Laurent polynomial.
///
/// The range is chosen from the signal envelope: on |ln|z|| <= max_log_radius
/// the omitted terms stay below ctrl.abs_tol times the largest term bound.
template <class Real>
class WindowedSeries {
 public:
  using S = basic_scaled<Real>;

  WindowedSeries(double x, const SignalModel& s, double max_log_radius,
                 const SeriesControl& ctrl = series_control_for<Real>(), int oversample = 1)
      : x_(x) {
    ctrl.validate();
    if (!std::isfinite(x)) throw InvalidParameter("windowed series: x must be finite");
    if (!std::isfinite(max_log_radius)) throw InvalidParameter("windowed series: radius out of range");
    if (oversample < 1) throw InvalidParameter("windowed series: oversample must be >= 1");
    if (s.is_zero_family()) return;
    const auto env = s.envelope();
    if (!env) throw InvalidParameter("callback signal has no decay metadata; the window sum is unbounded");
    const double L = std::abs(max_log_radius);
    const double two_pi = 2.0 * std::numbers::pi;
    auto bound = [&](int j) {
      const double y = x + two_pi * j;
      return std::log(env->C) + env->alpha * std::abs(y) - y * y / 4.0 - std::log(two_pi) + std::abs(j) * L;
    };
    const double log_tol = std::log(ctrl.abs_tol);
    // The bound is concave in j.  A first walk finds each side's peak; the
    // second extends both sides until they drop below tol times the larger.
    auto walk = [&](int dir, double floor_log) {
      double prev = bound(0);
      double peak = prev;
      for (int n = 1;; ++n) {
        if (n > ctrl.max_terms) throw NonConvergence("windowed series: window sum did not terminate");
        const double b = bound(dir * n);
        peak = std::max(peak, b);
        if (n >= ctrl.min_terms && b < prev && b < std::max(floor_log, log_tol + peak)) {
          return std::make_pair(dir * n, peak);
        }
        prev = b;
      }
    };
    const double inf = std::numeric_limits<double>::infinity();
    const double floor_log = log_tol + std::max(walk(+1, -inf).second, walk(-1, -inf).second);
    const int hi = walk(+1, floor_log).first;
    const int lo = walk(-1, floor_log).first;
    j_min_ = lo * oversample;
    j_max_ = hi * oversample;

    const Real two_pi_r = Real(2) * pi_v<Real>();
    const Real log_two_pi = [&] {
      using std::log;
      return log(two_pi_r);
    }();
    g_.reserve(static_cast<std::size_t>(j_max_ - j_min_ + 1));
    for (int j = j_min_; j <= j_max_; ++j) {
      const Real y = Real(x) + two_pi_r * Real(j);
      const S window = S::from_log(-y * y / Real(4) - log_two_pi);
      g_.push_back(window * S(eval_signal_as<Real>(s, y)));
    }
  }

  int j_min() const noexcept { return j_min_; }
  int j_max() const noexcept { return j_max_; }
  double x() const noexcept { return x_; }

  /// g(x + 2 pi j).
  const S& coefficient(int j) const { return g_.at(static_cast<std::size_t>(j - j_min_)); }

  /// sum_j g_j z^j, accumulated j = 0, 1, -1, 2, -2, ...
  S operator()(const S& z) const {
    if (z.is_zero()) throw DomainError("windowed series is undefined at z = 0");
    if (g_.empty()) return S();
    const S one(Real(1));
    const S zinv = one / z;
    S acc = (j_min_ <= 0 && 0 <= j_max_) ? coefficient(0) : S();
    S zp = one;
    S zn = one;
    for (int n = 1; n <= std::max(j_max_, -j_min_); ++n) {
      zp *= z;
      zn *= zinv;
      if (n <= j_max_ && n >= j_min_) acc += coefficient(n) * zp;
      if (-n >= j_min_ && -n <= j_max_) acc += coefficient(-n) * zn;
    }
    return acc;
  }

 private:
  double x_ = 0.0;
  int j_min_ = 0;
  int j_max_ = -1;
  std::vector<S> g_;
};

/// G_x(z) with its own termination for this z.
template <class Real = double>
basic_scaled<Real> G_series(const basic_scaled<Real>& z, double x, const SignalModel& s,
                            const SeriesControl& ctrl = series_control_for<Real>()) {
  if (z.is_zero()) throw DomainError("G_series is undefined at z = 0");
  const double log_r = to_double<Real>(z.log_abs());
  return WindowedSeries<Real>(x, s, log_r, ctrl)(z);
}

/// The same sum over twice the index range, as a truncation cross-check.
template <class Real = double>
basic_scaled<Real> G_series_oversampled(const basic_scaled<Real>& z, double x, const SignalModel& s,
                                        const SeriesControl& ctrl = series_control_for<Real>()) {
  if (z.is_zero()) throw DomainError("G_series is undefined at z = 0");
  const double log_r = to_double<Real>(z.log_abs());
  return WindowedSeries<Real>(x, s, log_r, ctrl, 2)(z);
}

/// A_m(x) = G_x(q^m) = sum_j g(x + 2 pi j) q^{m j}.
template <class Real = double>
basic_scaled<Real> spatial_A(int m, double x, const SignalModel& s, const LatticeParams& params,
                             const SeriesControl& ctrl = series_control_for<Real>()) {
  if (m < -kMaxLatticeIndex || m > kMaxLatticeIndex) {
    throw InvalidParameter("spatial_A: |m| exceeds the supported lattice index bound");
  }
  const Real log_q = -Real(2) * pi_v<Real>() * Real(params.tau);
  return G_series<Real>(basic_scaled<Real>::from_log(Real(m) * log_q), x, s, ctrl);
}

// ---------------------------------------------------------------------------
// Lagrange interpolation on the nodes q^n
// ---------------------------------------------------------------------------

template <class Real>
struct LatticeSample {
  int n = 0;
  basic_scaled<Real> value;
};

/// Node-derivative factor in the cardinal functions.
enum class InterpolantPrefactor {
  verified,  ///< Theta'(q^n) from the differentiated series
  printed,   ///< the closed form without the chain-rule factor; diagnostics only
};

struct InterpolantOptions {
  InterpolantPrefactor prefactor = InterpolantPrefactor::verified;
  /// z closer than this (relative) to a node, but not on it, is refused.
  double node_guard = 1e-4;
};

/// sum_n A_n Theta(z) / ((z - q^n) Theta'(q^n)) over the given samples.
/// Nodes and their derivatives are computed once at construction.
template <class Real>
class LagrangeInterpolant {
 public:
  using S = basic_scaled<Real>;

  LagrangeInterpolant(std::vector<LatticeSample<Real>> samples, const Real& q, const InterpolantOptions& opts = {},
                      const SeriesControl& ctrl = series_control_for<Real>())
      : samples_(std::move(samples)), q_(q), opts_(opts), ctrl_(ctrl) {
    using std::log;
    detail::check_nome(q);
    if (!(opts.node_guard > 0.0) || !(opts.node_guard < 1.0)) {
      throw InvalidParameter("interpolant node guard must lie in (0, 1)");
    }
    const Real log_q = log(q);
    for (const auto& smp : samples_) {
      nodes_.push_back(S::from_log(Real(smp.n) * log_q));
      derivs_.push_back(opts.prefactor == InterpolantPrefactor::verified
                            ? theta_prime_lattice<Real>(smp.n, q, ctrl)
                            : theta_prime_candidate<Real>(smp.n, q, DerivativeCandidate::printed, ctrl));
    }
  }

  const std::vector<LatticeSample<Real>>& samples() const noexcept { return samples_; }

  /// At a node the cardinal limit A_n is returned; nearer than node_guard
  /// (relative) but off the node is refused.
  S operator()(const S& z) const {
    if (z.is_zero()) throw DomainError("lagrange_interpolant is undefined at z = 0");
    const S exact(Real(1e-15));
    const S guard{Real(opts_.node_guard)};
    std::vector<S> diffs(samples_.size());
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      diffs[i] = z - nodes_[i];
      if (abs_less(diffs[i], nodes_[i] * exact) || diffs[i].is_zero()) return samples_[i].value;
      if (abs_less(diffs[i], nodes_[i] * guard)) {
        throw DomainError("lagrange_interpolant: z is within the guard distance of node q^" +
                          std::to_string(samples_[i].n));
      }
    }
    S acc;
    for (std::size_t i = 0; i < samples_.size(); ++i) acc += samples_[i].value / (diffs[i] * derivs_[i]);
    return acc * theta_series_scaled<Real>(z, q_, ctrl_);
  }

 private:
  std::vector<LatticeSample<Real>> samples_;
  Real q_;
  InterpolantOptions opts_;
  SeriesControl ctrl_;
  std::vector<S> nodes_;
  std::vector<S> derivs_;
};

/// One-shot evaluation of the interpolant.
template <class Real>
basic_scaled<Real> lagrange_interpolant(const basic_scaled<Real>& z, std::vector<LatticeSample<Real>> samples,
                                        const Real& q, const InterpolantOptions& opts = {},
                                        const SeriesControl& ctrl = series_control_for<Real>()) {
  return LagrangeInterpolant<Real>(std::move(samples), q, opts, ctrl)(z);
}

/// A_n = G(q^n) for n in [-N, N].
template <class Real>
std::vector<LatticeSample<Real>> lattice_samples(const WindowedSeries<Real>& G, int N, const Real& q) {
  using std::log;
  if (N < 0 || N > kMaxLatticeIndex) throw InvalidParameter("lattice_samples: N out of range");
  const Real log_q = log(q);
  std::vector<LatticeSample<Real>> out;
  out.reserve(static_cast<std::size_t>(2 * N + 1));
  for (int n = -N; n <= N; ++n) out.push_back({n, G(basic_scaled<Real>::from_log(Real(n) * log_q))});
  return out;
}

// ---------------------------------------------------------------------------
// Contour oracle for Laurent coefficients
// ---------------------------------------------------------------------------

/// Circle |z| = radius sampled at `nodes` uniform angles.
struct ContourSpec {
  double radius = 1.0;
  int nodes = 512;

  /// Checks the node count and that the circle keeps 0.1 * radius away from
  /// the pole candidate q^m.  Only q^m matters: the other theta zeros are
  /// not singular points of the quotient being averaged.
  void validate(int m, const LatticeParams& params) const {
    if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidParameter("contour radius must be positive");
    if (nodes < 64 || (nodes & (nodes - 1)) != 0) {
      throw InvalidParameter("contour nodes must be a power of two >= 64");
    }
    const double qm = std::exp(m * params.log_q);
    if (std::abs(radius - qm) < 0.1 * radius) {
      throw InvalidParameter("contour radius is too close to q^" + std::to_string(m));
    }
  }
};

/// Radius q^{-1/2} for m >= 0 and q^{1/2} for m < 0.  The quotient is
/// holomorphic on C \ {0}, so every radius gives the same coefficient; these
/// two keep the averaged terms within a few orders of the result.
inline ContourSpec default_contour(int m, const LatticeParams& params, int nodes = 512) {
  return ContourSpec{std::exp((m >= 0 ? -0.5 : 0.5) * params.log_q), nodes};
}

/// z^0 Laurent coefficient of Theta(z) / ((z - q^m) Theta'(q^m)) by the
/// trapezoid rule on the contour.
template <class Real = double>
basic_scaled<Real> laurent_c0_scaled(int m, const LatticeParams& params, const ContourSpec& contour,
                                     const SeriesControl& ctrl = series_control_for<Real>()) {
  using S = basic_scaled<Real>;
  using std::log;
  contour.validate(m, params);
  const Real q = nome<Real>(params);
  const Real log_q = -Real(2) * pi_v<Real>() * Real(params.tau);
  const S qm = S::from_log(Real(m) * log_q);
  const S d = theta_prime_lattice<Real>(m, q, ctrl);
  const Real log_r = log(Real(contour.radius));
  const Real two_pi = Real(2) * pi_v<Real>();
  S acc;
  for (int j = 0; j < contour.nodes; ++j) {
    const S z = S::from_log(log_r, two_pi * Real(j) / Real(contour.nodes));
    acc += theta_series_scaled<Real>(z, q, ctrl) / ((z - qm) * d);
  }
  return acc / S(Real(contour.nodes));
}

template <class Real = double>
complex_t<Real> laurent_c0(int m, const LatticeParams& params, const ContourSpec& contour,
                           const SeriesControl& ctrl = series_control_for<Real>()) {
  return laurent_c0_scaled<Real>(m, params, contour, ctrl).to_complex();
}

template <class Real = double>
complex_t<Real> laurent_c0(int m, const LatticeParams& params) {
  return laurent_c0<Real>(m, params, default_contour(m, params));
}

// ---------------------------------------------------------------------------
// Circle-maxima traces
// ---------------------------------------------------------------------------

enum class TraceKind { G_over_theta, Gtilde_over_theta, residual_alpha };

inline const char* to_string(TraceKind k) {
  switch (k) {
    case TraceKind::G_over_theta:
      return "G_over_theta";
    case TraceKind::Gtilde_over_theta:
      return "Gtilde_over_theta";
    case TraceKind::residual_alpha:
      return "residual_alpha";
  }
  return "unknown";
}

struct TracePoint {
  int k = 0;
  double maximum = 0.0;  ///< max over the sampled angles of |Phi|
  double scale = 0.0;    ///< max of |G / Theta| on the same circle
};

struct TraceOptions {
  int angles = 64;
  int samples_N = 0;  ///< interpolation nodes |n| <= N; 0 picks a default
  int threads = 1;
  InterpolantOptions interp;
};

/// Default node range: the automatic truncation base order for tol 1e-10,
/// plus two guard nodes, and at least max|k| + 3.
inline int default_sample_range(const LatticeParams& params, int k_lo, int k_hi) {
  const double eps = params.tau * (std::numbers::pi - params.tau);
  const int base = eps > 0.0 ? static_cast<int>(std::ceil(std::sqrt(std::log(1e11) / eps))) : kMaxLatticeIndex;
  const int n = std::max(base + 2, std::max(std::abs(k_lo), std::abs(k_hi)) + 3);
  return std::min(n, kMaxLatticeIndex);
}

/// For each k in [k_lo, k_hi], the max of |Phi(z)| over `angles` points of
/// |z| = q^{k+1/2}.  G is frozen as one Laurent polynomial, and the
/// interpolant uses its exact node values, so residual_alpha measures only
/// the interpolation identity and the arithmetic.
template <class Real = double>
std::vector<TracePoint> mk_trace(TraceKind kind, int k_lo, int k_hi, double x, const SignalModel& s,
                                 const LatticeParams& params, const TraceOptions& opts = {},
                                 const SeriesControl& ctrl = series_control_for<Real>()) {
  using S = basic_scaled<Real>;
  if (params.regime != Regime::subcritical) throw RegimeError("mk_trace needs a subcritical tau");
  if (k_lo > k_hi) return {};
  if (opts.angles < 1) throw InvalidParameter("mk_trace needs at least one angle");
  const int N = opts.samples_N > 0 ? opts.samples_N : default_sample_range(params, k_lo, k_hi);
  const double reach = (std::max({std::abs(k_lo + 0.5), std::abs(k_hi + 0.5), double(N)})) * std::abs(params.log_q);
  const WindowedSeries<Real> G(x, s, reach, ctrl);
  const Real q = nome<Real>(params);
  const Real log_q = -Real(2) * pi_v<Real>() * Real(params.tau);
  const LagrangeInterpolant<Real> interp(lattice_samples<Real>(G, N, q), q, opts.interp, ctrl);
  const Real two_pi = Real(2) * pi_v<Real>();

  const int count = k_hi - k_lo + 1;
  std::vector<TracePoint> out(static_cast<std::size_t>(count));
  parallel_for(static_cast<std::size_t>(count), resolve_threads(opts.threads), [&](std::size_t idx) {
    const int k = k_lo + static_cast<int>(idx);
    const Real log_r = (Real(k) + Real(0.5)) * log_q;
    double best = 0.0;
    double scale = 0.0;
    for (int a = 0; a < opts.angles; ++a) {
      const S z = S::from_log(log_r, two_pi * Real(a) / Real(opts.angles));
      const S theta = theta_series_scaled<Real>(z, q, ctrl);
      const S g = G(z);
      scale = std::max(scale, std::exp(to_double<Real>(g.log_abs() - theta.log_abs())));
      S phi;
      if (kind == TraceKind::G_over_theta) {
        phi = g;
      } else {
        const S gt = interp(z);
        phi = kind == TraceKind::Gtilde_over_theta ? gt : g - gt;
      }
      best = std::max(best, std::exp(to_double<Real>(phi.log_abs() - theta.log_abs())));
    }
    out[idx] = {k, best, scale};
  });
  return out;
}

}  // namespace qlattice

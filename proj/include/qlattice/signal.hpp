// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The qlattice Authors

#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qlattice/errors.hpp"
#include "qlattice/numeric.hpp"
#include "qlattice/parallel.hpp"
#include "qlattice/scaled.hpp"

namespace qlattice {

/// amplitude * exp(-(x - center)^2 / 4 + i * modulation * x)
struct GaussianComponent {
  std::complex<double> amplitude{1.0, 0.0};
  double center = 0.0;
  double modulation = 0.0;
};

/// |f(x)| <= C exp(alpha |x|)
struct DecayBound {
  double C = 1.0;
  double alpha = 0.0;
};

enum class SignalKind { gaussian_family, callback };

/// A signal in L^2(R) that can be sampled and transformed.
class SignalModel {
 public:
  using Sampler = std::function<std::complex<double>(double)>;

  static SignalModel gaussian_family(std::vector<GaussianComponent> components) {
    if (components.empty()) throw InvalidParameter("gaussian_family needs at least one component");
    for (const auto& c : components) {
      if (!std::isfinite(c.amplitude.real()) || !std::isfinite(c.amplitude.imag()) ||
          !std::isfinite(c.center) || !std::isfinite(c.modulation)) {
        throw InvalidParameter("gaussian_family component has a non-finite parameter");
      }
    }
    SignalModel s;
    s.kind_ = SignalKind::gaussian_family;
    s.components_ = std::move(components);
    return s;
  }

  /// The unit Gaussian exp(-x^2/4) and its shifted/modulated relatives.
  static SignalModel gaussian(std::complex<double> amplitude = 1.0, double center = 0.0,
                              double modulation = 0.0) {
    return gaussian_family({{amplitude, center, modulation}});
  }

  /// Black-box sampler.  Decay metadata is mandatory for quadrature; a
  /// callback built without it can be evaluated but not transformed.
  static SignalModel callback(Sampler sampler, std::optional<DecayBound> decay,
                              std::string label = {}) {
    if (!sampler) throw InvalidParameter("callback signal needs a sampler");
    if (decay && (!(decay->C > 0.0) || !(decay->alpha >= 0.0) || !std::isfinite(decay->C) ||
                  !std::isfinite(decay->alpha))) {
      throw InvalidParameter("decay metadata needs C > 0 and finite alpha >= 0");
    }
    SignalModel s;
    s.kind_ = SignalKind::callback;
    s.sampler_ = std::move(sampler);
    s.decay_ = decay;
    s.label_ = std::move(label);
    return s;
  }

  SignalKind kind() const noexcept { return kind_; }
  const std::vector<GaussianComponent>& components() const noexcept { return components_; }
  const std::optional<DecayBound>& decay() const noexcept { return decay_; }
  const std::string& label() const noexcept { return label_; }
  void set_label(std::string label) { label_ = std::move(label); }

  /// Growth bound usable by integrators: explicit metadata for callbacks,
  /// sum of |amplitude| with alpha = 0 for Gaussian families.
  std::optional<DecayBound> envelope() const {
    if (kind_ == SignalKind::callback) return decay_;
    double c = 0.0;
    for (const auto& comp : components_) c += std::abs(comp.amplitude);
    return DecayBound{c > 0.0 ? c : std::numeric_limits<double>::min(), 0.0};
  }

  bool is_zero_family() const {
    if (kind_ != SignalKind::gaussian_family) return false;
    for (const auto& c : components_) {
      if (c.amplitude != std::complex<double>(0.0, 0.0)) return false;
    }
    return true;
  }

  std::complex<double> operator()(double x) const {
    if (kind_ == SignalKind::callback) return sampler_(x);
    std::complex<double> acc(0.0, 0.0);
    for (const auto& c : components_) {
      const double d = x - c.center;
      acc += c.amplitude * std::polar(std::exp(-d * d / 4.0), c.modulation * x);
    }
    return acc;
  }

  /// f(x - a).
  SignalModel shifted(double a) const {
    if (kind_ == SignalKind::gaussian_family) {
      auto comps = components_;
      for (auto& c : comps) {
        c.amplitude *= std::polar(1.0, -c.modulation * a);
        c.center += a;
      }
      return gaussian_family(std::move(comps));
    }
    auto base = sampler_;
    std::optional<DecayBound> d = decay_;
    if (d) d->C *= std::exp(d->alpha * std::abs(a));
    return callback([base, a](double x) { return base(x - a); }, d);
  }

  /// Linear combination alpha*f + beta*g of two Gaussian families.
  friend SignalModel combine(std::complex<double> alpha, const SignalModel& f,
                             std::complex<double> beta, const SignalModel& g) {
    if (f.kind_ != SignalKind::gaussian_family || g.kind_ != SignalKind::gaussian_family) {
      throw InvalidParameter("combine is defined for gaussian_family signals");
    }
    std::vector<GaussianComponent> comps;
    for (auto c : f.components_) {
      c.amplitude *= alpha;
      comps.push_back(c);
    }
    for (auto c : g.components_) {
      c.amplitude *= beta;
      comps.push_back(c);
    }
    return gaussian_family(std::move(comps));
  }

 private:
  SignalModel() = default;

  SignalKind kind_ = SignalKind::gaussian_family;
  std::vector<GaussianComponent> components_;
  Sampler sampler_;
  std::optional<DecayBound> decay_;
  std::string label_;
};

inline std::complex<double> eval_signal(const SignalModel& s, double x) {
  if (!std::isfinite(x)) throw InvalidParameter("eval_signal: x must be finite");
  return s(x);
}

/// f(x) in a wider precision.  Gaussian families are evaluated natively in
/// Real; callbacks are sampled in double.
template <class Real>
complex_t<Real> eval_signal_as(const SignalModel& s, const Real& x) {
  using C = complex_t<Real>;
  using std::cos;
  using std::exp;
  using std::sin;
  if (s.kind() == SignalKind::callback) return from_complex_double<Real>(s(to_double<Real>(x)));
  C acc(Real(0), Real(0));
  for (const auto& c : s.components()) {
    const Real d = x - Real(c.center);
    const Real mag = exp(-d * d / Real(4));
    const Real ph = Real(c.modulation) * x;
    acc += from_complex_double<Real>(c.amplitude) * C(mag * cos(ph), mag * sin(ph));
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Forward lattice coefficients
// ---------------------------------------------------------------------------

/// gamma_{m,k} = int exp(-i k x - tau m x) f(x) exp(-x^2/4) dx for a Gaussian
/// family, by completing the square:
///   A e^{-a^2/4} sqrt(2 pi) exp(s^2/2),  s = a/2 - tau m + i(b - k).
inline ScaledValue gamma_closed_form(int m, int k, const SignalModel& s, double tau) {
  if (s.kind() != SignalKind::gaussian_family) {
    throw InvalidParameter("gamma_closed_form needs a gaussian_family signal");
  }
  const double log_sqrt_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  ScaledValue acc;
  for (const auto& c : s.components()) {
    if (c.amplitude == std::complex<double>(0.0, 0.0)) continue;
    const double sr = c.center / 2.0 - tau * m;
    const double si = c.modulation - k;
    const double log_mag =
        std::log(std::abs(c.amplitude)) - c.center * c.center / 4.0 + log_sqrt_2pi + (sr * sr - si * si) / 2.0;
    const double phase = std::arg(c.amplitude) + sr * si;
    acc += ScaledValue::from_log(log_mag, phase);
  }
  return acc;
}

struct QuadratureControl {
  double tol = 1e-10;
  int max_refinements = 14;
};

/// Truncation half-width around the envelope peak: the tail of
/// exp(alpha |u| - u^2/4) beyond R stays below tol.
inline double quadrature_half_width(double tol, double alpha) {
  const double l = std::max(1.0, std::log(1.0 / tol));
  return 2.0 * alpha + 2.0 * std::sqrt(alpha * alpha + l) + 1.0;
}

/// gamma_{m,k} by composite trapezoid rule on the line, centred at the peak
/// x0 = -2 tau m of the window exp(-x^2/4 - tau m x).  The factor
/// exp(tau^2 m^2) is carried in the scaled exponent.
///
/// Grids are nested (fixed end points, halved spacing), so successive sums
/// differ only by discretisation error.  After convergence the rigorous tail
/// bound from the decay metadata must sit below tol * |value|; otherwise the
/// interval is widened and the sum redone.
inline ScaledValue gamma_quadrature(int m, int k, const SignalModel& s, double tau,
                                    const QuadratureControl& quad = {}) {
  if (!(quad.tol > 0.0) || quad.tol >= 1.0) throw InvalidParameter("quadrature tol must lie in (0, 1)");
  const auto bound = s.envelope();
  if (!bound) throw InvalidParameter("callback signal has no decay metadata; refusing to integrate");
  const double x0 = -2.0 * tau * m;
  const double alpha = bound->alpha;
  // |f(x0 + u)| <= exp(log_scale + alpha |u|).
  const double log_scale = std::log(bound->C) + alpha * std::abs(x0);

  // exp(-i k x - tau m x - x^2/4) = exp(tau^2 m^2) exp(-u^2/4) exp(-i k x), x = x0 + u.
  auto reduced = [&](double u) {
    const double x = x0 + u;
    return s(x) * std::polar(std::exp(-u * u / 4.0), -static_cast<double>(k) * x);
  };
  const double h0 = std::min(0.25, std::numbers::pi / (2.0 * (std::abs(k) + 1.0)));

  double R = quadrature_half_width(quad.tol, alpha);
  constexpr int kMaxWidenings = 6;
  for (int widen = 0;; ++widen) {
    if (s.kind() == SignalKind::callback) {
      for (double x : {x0 - R, x0 + R}) {
        const double lim = std::exp(log_scale + alpha * std::abs(x - x0));
        if (std::abs(s(x)) > lim * (1.0 + 1e-9)) {
          throw InvalidParameter("callback signal violates its decay metadata at x = " + std::to_string(x));
        }
      }
    }
    // Both tails: 2 exp(log_scale) int_R^inf exp(alpha u - u^2/4) du
    //   <= 2 exp(log_scale + alpha R - R^2/4) / (R/2 - alpha),  R > 2 alpha.
    const double log_tail = std::log(2.0) + log_scale + alpha * R - R * R / 4.0 - std::log(R / 2.0 - alpha);
    // An integral cancelled to rounding level is judged against the samples.
    auto log_target_for = [&](std::complex<double> v, double l1) {
      return std::log(quad.tol * std::max(std::abs(v), 64.0 * epsilon_v<double>() * l1));
    };

    const long long J0 = static_cast<long long>(std::ceil(R / h0));
    double h = h0;
    // Running sums over the current grid j h, |j| <= J0 2^level.
    std::complex<double> sum = reduced(0.0);
    double abs_sum = std::abs(sum);
    for (long long j = 1; j <= J0; ++j) {
      const auto a = reduced(static_cast<double>(j) * h);
      const auto b = reduced(-static_cast<double>(j) * h);
      sum += a + b;
      abs_sum += std::abs(a) + std::abs(b);
    }
    std::complex<double> prev = sum * h;
    std::complex<double> cur = prev;
    double l1 = abs_sum * h;
    bool converged = false;
    bool truncated = false;
    long long J = J0;
    for (int level = 0; level < quad.max_refinements; ++level) {
      h /= 2.0;
      J *= 2;
      for (long long j = 1; j <= J; j += 2) {
        const auto a = reduced(static_cast<double>(j) * h);
        const auto b = reduced(-static_cast<double>(j) * h);
        sum += a + b;
        abs_sum += std::abs(a) + std::abs(b);
      }
      cur = sum * h;
      l1 = abs_sum * h;
      const double diff = std::abs(cur - prev);
      if (diff <= quad.tol * std::abs(cur) || diff <= 64.0 * epsilon_v<double>() * l1) {
        converged = true;
        break;
      }
      // A cut-off integrand converges slowly; stop refining and widen.
      if (level >= 3 && log_tail > log_target_for(cur, l1)) {
        truncated = true;
        break;
      }
      prev = cur;
    }
    if (!converged && !truncated) {
      throw NonConvergence("gamma_quadrature: refinement cap exceeded", std::abs(cur), std::abs(prev));
    }

    const double log_target = log_target_for(cur, l1);
    if (converged && log_tail <= log_target) return ScaledValue::from_log(tau * tau * m * m) * ScaledValue(cur);
    if (widen >= kMaxWidenings) {
      throw NonConvergence("gamma_quadrature: tail bound stays above tolerance", std::exp(log_tail),
                           std::exp(log_target));
    }
    // exp(alpha R - R^2/4) <= exp(log_target - log_scale - 1) with one unit of slack.
    const double depth = std::max(1.0, log_scale + 1.0 - log_target);
    R = std::max(R + 1.0, 2.0 * alpha + 2.0 * std::sqrt(alpha * alpha + depth) + 1.0);
  }
}

/// Rectangular array of gamma_{m,k}, m in [-M, M], k in [-K, K].
class GammaTable {
 public:
  GammaTable() = default;

  GammaTable(int M, int K, double tau) : M_(M), K_(K), tau_(tau) {
    if (M < 0 || K < 0) throw InvalidParameter("table dimensions must be non-negative");
    values_.assign(static_cast<std::size_t>(2 * M + 1) * static_cast<std::size_t>(2 * K + 1),
                   ScaledValue());
  }

  int M() const noexcept { return M_; }
  int K() const noexcept { return K_; }
  double tau() const noexcept { return tau_; }
  int row_length() const noexcept { return 2 * K_ + 1; }

  bool contains(int m, int k) const noexcept { return std::abs(m) <= M_ && std::abs(k) <= K_; }

  const ScaledValue& at(int m, int k) const { return values_.at(index(m, k)); }
  ScaledValue& at(int m, int k) { return values_.at(index(m, k)); }

  /// Row m, indexed k + K.
  std::span<const ScaledValue> row(int m) const {
    if (std::abs(m) > M_) throw InvalidParameter("row index outside the table");
    return std::span<const ScaledValue>(values_).subspan(
        static_cast<std::size_t>(m + M_) * row_length(), row_length());
  }

  const std::vector<ScaledValue>& values() const noexcept { return values_; }

  friend bool operator==(const GammaTable&, const GammaTable&) = default;

 private:
  std::size_t index(int m, int k) const {
    if (!contains(m, k)) throw InvalidParameter("table index outside [-M, M] x [-K, K]");
    return static_cast<std::size_t>(m + M_) * row_length() + static_cast<std::size_t>(k + K_);
  }

  int M_ = 0;
  int K_ = 0;
  double tau_ = 0.0;
  std::vector<ScaledValue> values_;
};

struct ForwardOptions {
  QuadratureControl quad;
  int threads = 0;
};

/// One gamma entry: closed form when the signal has one, quadrature otherwise.
inline ScaledValue gamma_entry(int m, int k, const SignalModel& s, double tau,
                               const QuadratureControl& quad = {}) {
  return s.kind() == SignalKind::gaussian_family ? gamma_closed_form(m, k, s, tau)
                                                 : gamma_quadrature(m, k, s, tau, quad);
}

/// Fills the full table.  Rows are computed independently, so the result is
/// the same for every thread count; on failure nothing is returned.
inline GammaTable forward_table(const SignalModel& s, double tau, int M, int K,
                                const ForwardOptions& opts = {}) {
  if (!std::isfinite(tau) || tau <= 0.0) throw InvalidParameter("tau must be positive and finite");
  GammaTable table(M, K, tau);
  parallel_for(static_cast<std::size_t>(2 * M + 1), resolve_threads(opts.threads), [&](std::size_t i) {
    const int m = static_cast<int>(i) - M;
    for (int k = -K; k <= K; ++k) table.at(m, k) = gamma_entry(m, k, s, tau, opts.quad);
  });
  return table;
}

}  // namespace qlattice

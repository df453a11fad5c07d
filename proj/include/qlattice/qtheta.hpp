// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The qlattice Authors

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <utility>

#include "qlattice/errors.hpp"
#include "qlattice/numeric.hpp"
#include "qlattice/scaled.hpp"

namespace qlattice {

// ---------------------------------------------------------------------------
// Lattice parameters
// ---------------------------------------------------------------------------

/// Position of tau relative to the critical density pi.
enum class Regime { subcritical, critical, supercritical };

/// |tau - pi| at or below this value is classified as critical.
inline constexpr double kCriticalTolerance = 1e-12;

/// Largest |n| accepted for lattice-indexed quantities (theta derivatives at
/// q^n, coefficients E_m).  Keeps every exponent well inside ScaledValue.
inline constexpr int kMaxLatticeIndex = 64;

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::subcritical:
      return "subcritical";
    case Regime::critical:
      return "critical";
    case Regime::supercritical:
      return "supercritical";
  }
  return "unknown";
}

struct LatticeParams {
  double tau = 0.0;
  double q = 0.0;      ///< nome e^{-2 pi tau}
  double log_q = 0.0;  ///< exactly -2 pi tau
  Regime regime = Regime::subcritical;
};

inline Regime regime_of(double tau) {
  const double pi = std::numbers::pi;
  if (std::abs(tau - pi) <= kCriticalTolerance) return Regime::critical;
  return tau < pi ? Regime::subcritical : Regime::supercritical;
}

inline LatticeParams nome_from_tau(double tau) {
  if (!std::isfinite(tau) || tau <= 0.0) {
    throw InvalidParameter("tau must be positive and finite");
  }
  LatticeParams p;
  p.tau = tau;
  p.log_q = -2.0 * std::numbers::pi * tau;
  p.q = std::exp(p.log_q);
  p.regime = regime_of(tau);
  return p;
}

/// The nome recomputed in a wider real type.
template <class Real>
inline Real nome(const LatticeParams& p) {
  using std::exp;
  return exp(-Real(2) * pi_v<Real>() * Real(p.tau));
}

// ---------------------------------------------------------------------------
// Series truncation
// ---------------------------------------------------------------------------

struct SeriesControl {
  double abs_tol = 1e-16;
  int max_terms = 1 << 20;
  int min_terms = 8;

  void validate() const {
    if (!(abs_tol > 0.0) || !std::isfinite(abs_tol)) {
      throw InvalidParameter("series abs_tol must be positive");
    }
    if (min_terms < 1 || max_terms < 1 || min_terms > max_terms) {
      throw InvalidParameter("series control needs 1 <= min_terms <= max_terms");
    }
  }
};

/// Truncation control matched to the precision of Real.
template <class Real>
inline SeriesControl series_control_for() {
  SeriesControl c;
  c.abs_tol = std::max(to_double<Real>(epsilon_v<Real>()) / 16.0, 1e-300);
  return c;
}

namespace detail {

template <class Real>
inline void check_nome(const Real& q) {
  if (!(q > Real(0)) || !(q < Real(1))) {
    throw InvalidParameter("nome q must lie in (0, 1)");
  }
}

/// Sums t_0 + t_1 + t_{-1} + t_2 + t_{-2} + ... in that fixed order.  Each
/// side stops once its terms are decreasing and below abs_tol times the
/// largest term seen, after at least min_terms terms.  Both callables are
/// invoked with n = 1, 2, ... in order and may keep recurrence state.
template <class Real, class Pos, class Neg>
basic_scaled<Real> two_sided_sum(const basic_scaled<Real>& t0, Pos&& pos, Neg&& neg,
                                 const SeriesControl& ctrl, const char* what) {
  using S = basic_scaled<Real>;
  const S tol(Real(ctrl.abs_tol));
  S sum = t0;
  S biggest = t0;
  S prev_pos = t0;
  S prev_neg = t0;
  bool pos_on = true;
  bool neg_on = true;
  auto settled = [&](const S& t, const S& prev, int n) {
    if (n < ctrl.min_terms) return false;
    if (t.is_zero()) return true;
    return abs_less(t, biggest * tol) && !abs_less(prev, t);
  };
  for (int n = 1; pos_on || neg_on; ++n) {
    if (n > ctrl.max_terms) {
      throw NonConvergence(std::string(what) + ": series did not converge within max_terms");
    }
    if (pos_on) {
      const S t = pos(n);
      sum += t;
      if (abs_less(biggest, t)) biggest = t;
      if (settled(t, prev_pos, n)) pos_on = false;
      prev_pos = t;
    }
    if (neg_on) {
      const S t = neg(n);
      sum += t;
      if (abs_less(biggest, t)) biggest = t;
      if (settled(t, prev_neg, n)) neg_on = false;
      prev_neg = t;
    }
  }
  return sum;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Euler product and theta function
// ---------------------------------------------------------------------------

/// log of prod_{n>=1} (1 - q^n).
template <class Real>
Real log_euler_product(const Real& q, const SeriesControl& ctrl = series_control_for<Real>()) {
  using std::log;
  ctrl.validate();
  if (q < Real(0) || !(q < Real(1))) throw InvalidParameter("euler_product needs 0 <= q < 1");
  Real acc = Real(0);
  Real qn = q;
  for (int n = 1;; ++n) {
    if (n > ctrl.max_terms) {
      throw NonConvergence("euler_product: max_terms exhausted", to_double<Real>(acc));
    }
    acc += log(Real(1) - qn);
    if (n >= ctrl.min_terms && qn < Real(ctrl.abs_tol)) break;
    qn *= q;
  }
  return acc;
}

/// prod_{n>=1} (1 - q^n), truncated once q^n < abs_tol.
template <class Real>
Real euler_product(const Real& q, const SeriesControl& ctrl = series_control_for<Real>()) {
  ctrl.validate();
  if (q < Real(0) || !(q < Real(1))) throw InvalidParameter("euler_product needs 0 <= q < 1");
  Real acc = Real(1);
  Real qn = q;
  for (int n = 1;; ++n) {
    if (n > ctrl.max_terms) {
      throw NonConvergence("euler_product: max_terms exhausted", to_double<Real>(acc));
    }
    acc *= Real(1) - qn;
    if (n >= ctrl.min_terms && qn < Real(ctrl.abs_tol)) break;
    qn *= q;
  }
  return acc;
}

/// Theta(z; q) = sum_n (-1)^n z^n q^{n(n-1)/2}, in scaled arithmetic so that
/// |z| far from 1 cannot overflow.
template <class Real>
basic_scaled<Real> theta_series_scaled(const basic_scaled<Real>& z, const Real& q,
                                       const SeriesControl& ctrl = series_control_for<Real>()) {
  using S = basic_scaled<Real>;
  ctrl.validate();
  detail::check_nome(q);
  if (z.is_zero()) throw DomainError("theta is undefined at z = 0");
  const S minus_z = -z;
  const S inv_minus_z = S(complex_t<Real>(Real(1), Real(0))) / minus_z;
  const S qs(q);
  // t_n = t_{n-1} (-z) q^{n-1};  t_{-n} = t_{-n+1} (-z)^{-1} q^n.
  S tp(Real(1));
  S qpow_p(Real(1));
  auto pos = [&](int) {
    tp *= minus_z * qpow_p;
    qpow_p *= qs;
    return tp;
  };
  S tn(Real(1));
  S qpow_n = qs;
  auto neg = [&](int) {
    tn *= inv_minus_z * qpow_n;
    qpow_n *= qs;
    return tn;
  };
  return detail::two_sided_sum(S(Real(1)), pos, neg, ctrl, "theta_series");
}

template <class Real>
complex_t<Real> theta_series(const complex_t<Real>& z, const Real& q,
                             const SeriesControl& ctrl = series_control_for<Real>()) {
  return theta_series_scaled(basic_scaled<Real>(z), q, ctrl).to_complex();
}

/// Product side of the triple product identity:
/// (1 - z) prod_{n>=1} (1 - q^n)(1 - z q^n)(1 - q^n / z).
template <class Real>
basic_scaled<Real> theta_product_scaled(const complex_t<Real>& z, const Real& q,
                                        const SeriesControl& ctrl = series_control_for<Real>()) {
  using C = complex_t<Real>;
  using S = basic_scaled<Real>;
  using std::abs;
  ctrl.validate();
  detail::check_nome(q);
  if (z == C(Real(0), Real(0))) throw DomainError("theta is undefined at z = 0");
  const C one(Real(1), Real(0));
  const C zinv = one / z;
  const Real az = abs(z);
  const Real bound = az > Real(1) ? az : Real(1) / az;
  S acc(one - z);
  Real qn = q;
  for (int n = 1;; ++n) {
    if (n > ctrl.max_terms) throw NonConvergence("theta_product: max_terms exhausted");
    acc *= S(C((Real(1) - qn) * (one - z * qn) * (one - zinv * qn)));
    if (n >= ctrl.min_terms && qn * bound < Real(ctrl.abs_tol)) break;
    qn *= q;
  }
  return acc;
}

template <class Real>
complex_t<Real> theta_product(const complex_t<Real>& z, const Real& q,
                              const SeriesControl& ctrl = series_control_for<Real>()) {
  return theta_product_scaled(z, q, ctrl).to_complex();
}

/// Theta'(1; q) = -prod (1 - q^n)^3.
template <class Real>
Real theta_prime_one(const Real& q, const SeriesControl& ctrl = series_control_for<Real>()) {
  detail::check_nome(q);
  const Real p = euler_product(q, ctrl);
  return -(p * p * p);
}

/// d/dz Theta(z; q) at z = q^n, summed term by term from the differentiated
/// series: sum_l (-1)^l l q^{(l-1)(2n+l)/2}.
template <class Real>
basic_scaled<Real> theta_prime_lattice(int n, const Real& q,
                                       const SeriesControl& ctrl = series_control_for<Real>()) {
  using S = basic_scaled<Real>;
  using std::log;
  ctrl.validate();
  detail::check_nome(q);
  if (n < -kMaxLatticeIndex || n > kMaxLatticeIndex) {
    throw InvalidParameter("theta_prime_lattice: |n| exceeds the supported lattice index bound");
  }
  const Real log_q = log(q);
  auto term = [&](int l) {
    const long long twice_exp = static_cast<long long>(l - 1) * (2LL * n + l);
    S t = S::from_log(Real(twice_exp) / Real(2) * log_q);
    const Real sign = (l % 2 == 0) ? Real(l) : -Real(l);
    return t * S(sign);
  };
  return detail::two_sided_sum(S(), [&](int l) { return term(l); },
                               [&](int l) { return term(-l); }, ctrl, "theta_prime_lattice");
}

/// Closed-form candidates for Theta'(q^n; q) in terms of Theta'(1; q).
enum class DerivativeCandidate {
  printed,    ///< (-1)^{n+1} q^{-n(n-1)/2} Theta'(1)
  corrected,  ///< (-1)^n q^{-n(n+1)/2} Theta'(1), chain rule applied
};

template <class Real>
basic_scaled<Real> theta_prime_candidate(int n, const Real& q, DerivativeCandidate which,
                                         const SeriesControl& ctrl = series_control_for<Real>()) {
  using S = basic_scaled<Real>;
  using std::log;
  detail::check_nome(q);
  const long long nn = n;
  const long long twice_exp =
      which == DerivativeCandidate::printed ? -nn * (nn - 1) : -nn * (nn + 1);
  const bool odd_sign = which == DerivativeCandidate::printed ? ((n + 1) % 2 != 0) : (n % 2 != 0);
  S v = S::from_log(Real(twice_exp) / Real(2) * log(q)) * S(theta_prime_one(q, ctrl));
  return odd_sign ? -v : v;
}

/// Closed forms for the comparison function eta(|z|).
enum class EtaVariant {
  corrected,  ///< exp{-ln^2|z| / (2 ln q) + ln|z| / 2}; satisfies eta(q z) = eta(z) / |z|
  printed,    ///< exp{-ln^2|z| / (2 ln q) + (ln q)(ln|z|) / 2}; off by a constant per step
};

template <class Real>
Real log_eta(const Real& abs_z, const Real& q, EtaVariant variant = EtaVariant::corrected) {
  using std::log;
  detail::check_nome(q);
  if (!(abs_z > Real(0))) throw DomainError("eta is undefined at z = 0");
  const Real lz = log(abs_z);
  const Real lq = log(q);
  const Real linear = variant == EtaVariant::corrected ? lz / Real(2) : lq * lz / Real(2);
  return -lz * lz / (Real(2) * lq) + linear;
}

/// Comparison function with eta(q z) = eta(z) / |z|, so that |Theta| / eta
/// is invariant under z -> q z.
inline double eta(std::complex<double> z, double q, EtaVariant variant = EtaVariant::corrected) {
  if (z == std::complex<double>(0.0, 0.0)) throw DomainError("eta is undefined at z = 0");
  return std::exp(log_eta(std::abs(z), q, variant));
}

// ---------------------------------------------------------------------------
// Reconstruction coefficients
// ---------------------------------------------------------------------------

/// Closed forms for E_m; they differ only in the q-power of the prefactor.
enum class CoefficientVariant {
  corrected,  ///< prefactor q^{m(m+1)/2}; agrees with the Laurent coefficient
  printed,    ///< prefactor q^{m(m-1)/2}; off by q^{-m}, kept for diagnostics
};

inline const char* to_string(CoefficientVariant v) {
  return v == CoefficientVariant::corrected ? "m(m+1)/2" : "m(m-1)/2";
}

struct Coefficient {
  ScaledValue value;
  std::optional<std::string> warning;
};

namespace detail {

/// sum_{j>=0} (-1)^j q^{j(j+2m+1)/2}, returned as log of its leading power
/// plus the remaining O(1) sum.  For m < 0 the first -2m terms cancel in
/// pairs (j <-> -2m-1-j), so the sum restarts at j = -2m to avoid the
/// catastrophic cancellation.
inline std::pair<double, double> e_series(int m, double log_q, const SeriesControl& ctrl) {
  // exponent(i) relative to the leading one, with i = 0, 1, 2, ...
  const long long mm = m;
  auto twice_exp = [&](long long i) {
    return m >= 0 ? i * (i + 2 * mm + 1) : (i + 1) * (i - 2 * mm);
  };
  const long long lead = twice_exp(0);
  double sum = 0.0;
  for (long long i = 0;; ++i) {
    if (i > ctrl.max_terms) throw NonConvergence("coeff_E: series did not converge");
    const double t = std::exp(static_cast<double>(twice_exp(i) - lead) / 2.0 * log_q);
    sum += (i % 2 == 0) ? t : -t;
    if (i >= ctrl.min_terms && t < ctrl.abs_tol) break;
  }
  return {static_cast<double>(lead) / 2.0 * log_q, sum};
}

}  // namespace detail

/// Closed-form E_m in scaled arithmetic.
inline ScaledValue coeff_E_closed_form(int m, const LatticeParams& params,
                                       CoefficientVariant variant = CoefficientVariant::corrected,
                                       const SeriesControl& ctrl = {}) {
  ctrl.validate();
  if (m < -kMaxLatticeIndex || m > kMaxLatticeIndex) {
    throw InvalidParameter("coeff_E: |m| exceeds the supported lattice index bound");
  }
  const long long mm = m;
  const long long twice_pref = variant == CoefficientVariant::corrected ? mm * (mm + 1) : mm * (mm - 1);
  const auto [log_lead, sum] = detail::e_series(m, params.log_q, ctrl);
  const double log_p3 = 3.0 * log_euler_product(params.q, ctrl);
  ScaledValue v = ScaledValue::from_log(static_cast<double>(twice_pref) / 2.0 * params.log_q +
                                        log_lead - log_p3) *
                  ScaledValue(sum);
  return (m % 2 != 0) ? -v : v;
}

/// E_m(tau): the z^0 Laurent coefficient of Theta(z)/((z - q^m) Theta'(q^m)).
/// Outside the subcritical regime the value is still computed but carries a
/// warning.
inline Coefficient coeff_E(int m, const LatticeParams& params, const SeriesControl& ctrl = {},
                           CoefficientVariant variant = CoefficientVariant::corrected) {
  Coefficient c;
  c.value = coeff_E_closed_form(m, params, variant, ctrl);
  if (params.regime != Regime::subcritical) {
    c.warning = std::string("tau is ") + to_string(params.regime) +
                ": lattice samples do not determine the signal stably";
  }
  return c;
}

}  // namespace qlattice

#pragma once

// Closed-form performance of the continuous-time CuSum detector for a
// Brownian drift change: mean time to false alarm, mean detection delay,
// the threshold that meets a false-alarm constraint, and the asymptotic
// delay formulas for a drift that shrinks with the constraint.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "qcd/lambert.hpp"

namespace qcd {

/// Limit of gamma * mu(gamma)^2 as gamma grows. Finite carries that limit.
class Regime {
 public:
  enum class Kind { Infinite, Finite, Zero };

  static Regime infinite() { return Regime(Kind::Infinite, std::numeric_limits<double>::infinity()); }
  static Regime zero() { return Regime(Kind::Zero, 0.0); }
  static Regime finite(double theta) {
    if (!(theta > 0.0) || std::isinf(theta)) {
      throw std::domain_error("Regime::finite: theta must lie in (0, inf)");
    }
    return Regime(Kind::Finite, theta);
  }

  Kind kind() const { return kind_; }
  /// The limit itself: +inf, theta, or 0.
  double theta() const { return theta_; }

  const char* name() const {
    switch (kind_) {
      case Kind::Infinite: return "infinite";
      case Kind::Finite: return "finite";
      case Kind::Zero: return "zero";
    }
    return "?";
  }

  friend bool operator==(const Regime&, const Regime&) = default;

 private:
  Regime(Kind k, double theta) : kind_(k), theta_(theta) {}
  Kind kind_;
  double theta_;
};

/// A resolved operating point of the detector.
struct DetectorDesign {
  double gamma;  // false-alarm constraint, time
  double mu;     // post-change drift
  double x;      // gamma * mu^2 / 2
  double h;      // threshold
  double at2fa;  // mean time to false alarm, equals gamma
  double add;    // mean detection delay n(gamma)
};

namespace analytics {

namespace detail {

inline void require_positive(const char* fn, const char* name, double v) {
  if (!(v > 0.0) || std::isinf(v)) {
    throw std::domain_error(std::string(fn) + ": " + name + " must be positive and finite, got " +
                            std::to_string(v));
  }
}

inline void require_threshold(const char* fn, double h) {
  if (!(h >= 0.0) || std::isinf(h)) {
    throw std::domain_error(std::string(fn) + ": threshold must be nonnegative, got " +
                            std::to_string(h));
  }
}

// Sum_{k>=2} s^k h^k / k!, i.e. e^{sh} - 1 - sh for s = +-1.
inline double exp_tail(double h, double sign) {
  if (h < 0.1) {
    double term = h * h / 2.0;
    double acc = 0.0;
    for (int k = 2; k < 40; ++k) {
      const double add = (sign < 0.0 && k % 2 == 1) ? -term : term;
      acc += add;
      if (term <= 0.25 * lambert::detail::kEps * std::abs(acc)) break;
      term *= h / (k + 1);
    }
    return acc;
  }
  return std::expm1(sign * h) - sign * h;
}

// log(u) - 1 + 1/u with u = 1 + v, series for small v.
inline double g_from_v(double v) {
  if (v < 0.1) {
    // sum_{k>=2} (-1)^k (k-1)/k v^k
    double term = v * v;
    double acc = 0.0;
    for (int k = 2; k < 60; ++k) {
      const double add = term * (k - 1) / k;
      acc += (k % 2 == 0) ? add : -add;
      if (std::abs(add) <= 0.25 * lambert::detail::kEps * std::abs(acc)) break;
      term *= v;
    }
    return acc;
  }
  return std::log1p(v) - v / (1.0 + v);
}

}  // namespace detail

inline constexpr double kMaxThreshold = 709.782712893384;  // log(DBL_MAX)

/// Mean time to false alarm of the threshold-h detector, (2/mu^2)(e^h - h - 1).
inline double at2fa(double mu, double h) {
  detail::require_positive("at2fa", "mu", mu);
  detail::require_threshold("at2fa", h);
  if (h > kMaxThreshold) {
    throw std::overflow_error("at2fa: e^h overflows for h = " + std::to_string(h));
  }
  const double r = 2.0 / (mu * mu) * detail::exp_tail(h, 1.0);
  if (std::isinf(r)) throw std::overflow_error("at2fa: result overflows");
  return r;
}

/// Mean detection delay for a change at time 0, (2/mu^2)(e^{-h} + h - 1).
inline double add(double mu, double h) {
  detail::require_positive("add", "mu", mu);
  detail::require_threshold("add", h);
  const double r = 2.0 / (mu * mu) * detail::exp_tail(h, -1.0);
  if (std::isinf(r)) throw std::overflow_error("add: result overflows");
  return r;
}

/// G(x) for x >= 0. Uses G = log(u) - 1 + 1/u where u - log(u) = 1 + x.
inline double g_of_x(double x) {
  if (!(x >= 0.0)) throw std::domain_error("g_of_x: x must be nonnegative");
  return detail::g_from_v(lambert::solve_u_offset(x));
}

/// G'(x) = -1/W_{-1}(-e^{-1-x}) = 1/u, in (0, 1) for x > 0.
inline double g_deriv(double x) {
  if (!(x > 0.0)) throw std::domain_error("g_deriv: x must be positive");
  return 1.0 / (1.0 + lambert::solve_u_offset(x));
}

/// Unique positive threshold h with at2fa(mu, h) == gamma, plus the
/// resulting delays. Since u - log(u) = 1 + x, the threshold
/// -1 - x - W_{-1}(-e^{-1-x}) = u - 1 - x reduces to log(u).
inline DetectorDesign solve_threshold(double gamma, double mu) {
  detail::require_positive("solve_threshold", "gamma", gamma);
  detail::require_positive("solve_threshold", "mu", mu);
  const double x = 0.5 * gamma * mu * mu;
  if (!(x > 0.0)) throw std::domain_error("solve_threshold: gamma * mu^2 underflows");
  const double v = lambert::solve_u_offset(x);
  const double h = std::log1p(v);
  return DetectorDesign{gamma, mu, x, h, at2fa(mu, h), add(mu, h)};
}

/// Worst-case mean detection delay n(gamma) = (2/mu^2) G(gamma mu^2 / 2).
inline double n_exact(double gamma, double mu) {
  detail::require_positive("n_exact", "gamma", gamma);
  detail::require_positive("n_exact", "mu", mu);
  const double x = 0.5 * gamma * mu * mu;
  const double r = 2.0 / (mu * mu) * g_of_x(x);
  if (std::isinf(r)) throw std::overflow_error("n_exact: result overflows");
  return r;
}

/// Large-gamma equivalent of n(gamma) in the given regime. Natural log.
/// The infinite-regime form is rejected where log(gamma mu^2) <= 0.
inline double asymptotic_n(double gamma, const Regime& regime, double mu_at_gamma) {
  detail::require_positive("asymptotic_n", "gamma", gamma);
  detail::require_positive("asymptotic_n", "mu", mu_at_gamma);
  switch (regime.kind()) {
    case Regime::Kind::Infinite: {
      const double s = gamma * mu_at_gamma * mu_at_gamma;
      if (!(s > 1.0)) {
        throw std::domain_error("asymptotic_n: gamma*mu^2 <= 1, infinite-regime form not meaningful");
      }
      return 2.0 / (mu_at_gamma * mu_at_gamma) * std::log(s);
    }
    case Regime::Kind::Finite: {
      const double theta = regime.theta();
      return 2.0 / theta * g_of_x(0.5 * theta) * gamma;
    }
    case Regime::Kind::Zero:
      return gamma;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

/// Limit of the optimal threshold as gamma grows. The zero regime gives 0:
/// W_{-1}(-1/e) = -1 makes the threshold expression vanish.
inline double threshold_limit(const Regime& regime) {
  switch (regime.kind()) {
    case Regime::Kind::Infinite: return std::numeric_limits<double>::infinity();
    case Regime::Kind::Finite: return std::log1p(lambert::solve_u_offset(0.5 * regime.theta()));
    case Regime::Kind::Zero: return 0.0;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace analytics
}  // namespace qcd

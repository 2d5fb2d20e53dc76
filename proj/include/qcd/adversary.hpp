#pragma once

// Drift schedules mu(gamma) chosen by an adversary who knows the false-alarm
// constraint, their covertness regime, and the damage they inflict.

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>

#include "qcd/analytics.hpp"

namespace qcd {

/// Post-change drift as a function of the false-alarm constraint gamma.
class DriftSchedule {
 public:
  /// mu(gamma) = c * gamma^{-delta}
  struct PowerLaw {
    double c;
    double delta;
  };
  /// mu(gamma) = mu0
  struct Constant {
    double mu0;
  };

  static DriftSchedule power_law(double c, double delta) {
    if (!(c > 0.0) || std::isinf(c)) throw std::domain_error("power_law: c must be positive");
    if (!(delta >= 0.0) || std::isinf(delta)) {
      throw std::domain_error("power_law: delta must be nonnegative");
    }
    return DriftSchedule(PowerLaw{c, delta});
  }
  static DriftSchedule constant(double mu0) {
    if (!(mu0 > 0.0) || std::isinf(mu0)) throw std::domain_error("constant: mu0 must be positive");
    return DriftSchedule(Constant{mu0});
  }

  const std::variant<PowerLaw, Constant>& family() const { return family_; }

 private:
  explicit DriftSchedule(std::variant<PowerLaw, Constant> f) : family_(f) {}
  std::variant<PowerLaw, Constant> family_;
};

namespace adversary {

inline double mu_at(const DriftSchedule& schedule, double gamma) {
  if (!(gamma > 0.0) || std::isinf(gamma)) throw std::domain_error("mu_at: gamma must be positive");
  if (const auto* p = std::get_if<DriftSchedule::PowerLaw>(&schedule.family())) {
    return p->c * std::pow(gamma, -p->delta);
  }
  return std::get<DriftSchedule::Constant>(schedule.family()).mu0;
}

/// Regime of lim gamma * mu(gamma)^2. Exact for the parametric families.
inline Regime classify(const DriftSchedule& schedule) {
  if (const auto* p = std::get_if<DriftSchedule::PowerLaw>(&schedule.family())) {
    if (p->delta < 0.5) return Regime::infinite();
    if (p->delta == 0.5) return Regime::finite(p->c * p->c);
    return Regime::zero();
  }
  return Regime::infinite();
}

/// Covert means n(gamma) = Theta(gamma): the finite and zero regimes.
inline bool is_covert(const DriftSchedule& schedule) {
  return classify(schedule).kind() != Regime::Kind::Infinite;
}

/// M(gamma) = 100 |n(gamma) - gamma| / n(gamma), in percent.
inline double gap_metric(double gamma, const DriftSchedule& schedule) {
  const double n = analytics::n_exact(gamma, mu_at(schedule, gamma));
  return 100.0 * std::abs(n - gamma) / n;
}

/// D(gamma) = mu(gamma) n(gamma), using the exact delay.
inline double damage(double gamma, const DriftSchedule& schedule) {
  const double mu = mu_at(schedule, gamma);
  return mu * analytics::n_exact(gamma, mu);
}

/// Grid delta maximizing damage(gamma, gamma^{-delta}); first maximum wins,
/// so ties go to the smaller delta on an ascending grid.
inline double damage_argmax(double gamma, std::span<const double> delta_grid) {
  if (delta_grid.empty()) throw std::domain_error("damage_argmax: empty delta grid");
  double best_delta = delta_grid.front();
  double best = -1.0;
  for (double d : delta_grid) {
    const double value = damage(gamma, DriftSchedule::power_law(1.0, d));
    if (value > best || (value == best && d < best_delta)) {
      best = value;
      best_delta = d;
    }
  }
  return best_delta;
}

}  // namespace adversary
}  // namespace qcd

#pragma once

// Table builders behind the CLI subcommands. Each returns a CurveTable whose
// metadata is enough to re-run it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qcd/adversary.hpp"
#include "qcd/analytics.hpp"
#include "qcd/report.hpp"
#include "qcd/simulator.hpp"

namespace qcd::report {

inline const std::vector<double>& table1_gammas() {
  static const std::vector<double> g{2.0, 5.0, 10.0, 1e2, 1e3, 1e4, 1e5};
  return g;
}
inline const std::vector<double>& table1_deltas() {
  static const std::vector<double> d{0.75, 2.0, 5.0};
  return d;
}
inline const std::vector<double>& default_figure_gammas() {
  static const std::vector<double> g{1e3, 1e5, 1e8, 1e12};
  return g;
}
inline const std::vector<double>& default_damage_gammas() {
  static const std::vector<double> g{1e6, 1e8, 1e10, 1e12};
  return g;
}

/// {0, 1/n, ..., 1}; n = 200 gives the default step of 0.005.
inline std::vector<double> unit_delta_grid(int n = 200) {
  std::vector<double> d;
  d.reserve(n + 1);
  for (int i = 0; i <= n; ++i) d.push_back(static_cast<double>(i) / n);
  return d;
}

/// `points` log-spaced values from lo to hi, both endpoints exact.
inline std::vector<double> log_grid(double lo, double hi, int points) {
  if (!(lo > 0.0) || !(hi > lo) || points < 2) {
    throw std::domain_error("log_grid: need 0 < lo < hi and at least 2 points");
  }
  std::vector<double> g;
  g.reserve(points);
  const double span = std::log(hi / lo);
  for (int i = 0; i < points; ++i) {
    g.push_back(i == points - 1 ? hi : lo * std::exp(span * i / (points - 1)));
  }
  return g;
}

/// Rounds to 3 significant figures, then to at most 2 decimal places.
inline double display_round(double v) {
  if (v == 0.0 || !std::isfinite(v)) return v;
  const int mag = static_cast<int>(std::floor(std::log10(std::abs(v))));
  const double scale = std::pow(10.0, 2 - mag);
  const double sig3 = std::round(v * scale) / scale;
  return std::round(sig3 * 100.0) / 100.0;
}

namespace detail {

inline std::string join_reals(std::span<const double> v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_short(v[i]);
  return s;
}

inline MetaList base_meta(std::string command, std::string parameters) {
  return {{"command", std::move(command)},
          {"parameters", std::move(parameters)},
          {"version", std::string(kVersion)}};
}

}  // namespace detail

/// Single-row design summary for (gamma, mu).
inline CurveTable analyze(double gamma, double mu) {
  const DetectorDesign d = analytics::solve_threshold(gamma, mu);
  CurveTable t;
  t.metadata = detail::base_meta("analyze", "--gamma " + format_short(gamma) + " --mu " + format_short(mu));
  t.columns = {{"gamma", "time"},  {"mu", "1/sqrt(time)"}, {"x", "1"},          {"h", "1"},
               {"at2fa", "time"},  {"add", "time"},         {"add/gamma", "1"}, {"M", "percent"},
               {"damage", "sqrt(time)"}};
  t.add_row({d.gamma, d.mu, d.x, d.h, d.at2fa, d.add, d.add / gamma,
             100.0 * std::abs(d.add - gamma) / d.add, mu * d.add});
  return t;
}

/// Design summary for a drift schedule evaluated at gamma, with regime
/// (theta column: lim gamma mu^2, i.e. inf, theta or 0) and covert flag.
inline CurveTable analyze(double gamma, const DriftSchedule& schedule) {
  const double mu = adversary::mu_at(schedule, gamma);
  CurveTable t = analyze(gamma, mu);
  std::string params = "--gamma " + format_short(gamma);
  if (const auto* p = std::get_if<DriftSchedule::PowerLaw>(&schedule.family())) {
    params += " --delta " + format_short(p->delta) + " --c " + format_short(p->c);
  } else {
    params += " --mu0 " + format_short(std::get<DriftSchedule::Constant>(schedule.family()).mu0);
  }
  t.metadata = detail::base_meta("analyze", params);
  const Regime regime = adversary::classify(schedule);
  t.metadata.emplace_back("regime", regime.name());
  t.columns.push_back({"theta", "1"});
  t.columns.push_back({"covert", "bool"});
  t.rows.front().push_back(regime.theta());
  t.rows.front().push_back(adversary::is_covert(schedule) ? 1.0 : 0.0);
  return t;
}

/// M(gamma) for each delta, display-rounded and raw.
inline CurveTable table1() {
  CurveTable t;
  t.metadata = detail::base_meta("table1", "");
  t.columns.push_back({"delta", "1"});
  for (double g : table1_gammas()) t.columns.push_back({"M_" + format_short(g), "percent"});
  for (double g : table1_gammas()) t.columns.push_back({"M_raw_" + format_short(g), "percent"});
  for (double delta : table1_deltas()) {
    const auto schedule = DriftSchedule::power_law(1.0, delta);
    std::vector<double> raw;
    for (double g : table1_gammas()) raw.push_back(adversary::gap_metric(g, schedule));
    std::vector<double> row{delta};
    for (double m : raw) row.push_back(display_round(m));
    row.insert(row.end(), raw.begin(), raw.end());
    t.add_row(std::move(row));
  }
  return t;
}

/// n(gamma) against gamma for mu = gamma^{-delta}, plus the identity.
inline CurveTable fig1(std::span<const double> deltas, double gamma_min, double gamma_max, int points) {
  CurveTable t;
  t.metadata = detail::base_meta("fig1", "--deltas " + detail::join_reals(deltas) + " --gamma-min " +
                                            format_short(gamma_min) + " --gamma-max " +
                                            format_short(gamma_max) + " --points " + std::to_string(points));
  t.metadata.emplace_back("axes", "x=log,y=log");
  t.columns.push_back({"gamma", "time"});
  t.columns.push_back({"n@identity", "time"});
  for (double d : deltas) t.columns.push_back({"n@delta=" + format_short(d), "time"});
  for (double g : log_grid(gamma_min, gamma_max, points)) {
    std::vector<double> row{g, g};
    for (double d : deltas) row.push_back(analytics::n_exact(g, adversary::mu_at(DriftSchedule::power_law(1.0, d), g)));
    t.add_row(std::move(row));
  }
  return t;
}

/// Threshold and n(gamma)/gamma across delta, one column pair per gamma.
inline CurveTable phase(std::span<const double> gammas, std::span<const double> delta_grid) {
  CurveTable t;
  t.metadata = detail::base_meta("phase", "--gammas " + detail::join_reals(gammas) + " --deltas " +
                                              detail::join_reals(delta_grid));
  t.metadata.emplace_back("axes", "x=linear,y=linear");
  t.columns.push_back({"delta", "1"});
  for (double g : gammas) t.columns.push_back({"h@gamma=" + format_short(g), "1"});
  for (double g : gammas) t.columns.push_back({"n/gamma@gamma=" + format_short(g), "1"});
  for (double d : delta_grid) {
    std::vector<double> hs, ratios;
    for (double g : gammas) {
      const double mu = adversary::mu_at(DriftSchedule::power_law(1.0, d), g);
      const DetectorDesign design = analytics::solve_threshold(g, mu);
      hs.push_back(design.h);
      ratios.push_back(analytics::n_exact(g, mu) / g);
    }
    std::vector<double> row{d};
    row.insert(row.end(), hs.begin(), hs.end());
    row.insert(row.end(), ratios.begin(), ratios.end());
    t.add_row(std::move(row));
  }
  return t;
}

/// Natural log of the damage across delta, one column per gamma. The
/// maximizing delta per gamma is appended as trailer lines.
inline CurveTable damage(std::span<const double> gammas, std::span<const double> delta_grid) {
  CurveTable t;
  t.metadata = detail::base_meta("damage", "--gammas " + detail::join_reals(gammas) + " --deltas " +
                                               detail::join_reals(delta_grid));
  t.metadata.emplace_back("axes", "x=linear,y=linear");
  t.columns.push_back({"delta", "1"});
  for (double g : gammas) t.columns.push_back({"logD@gamma=" + format_short(g), "log(sqrt(time))"});
  for (double d : delta_grid) {
    std::vector<double> row{d};
    for (double g : gammas) row.push_back(std::log(adversary::damage(g, DriftSchedule::power_law(1.0, d))));
    t.add_row(std::move(row));
  }
  for (double g : gammas) {
    t.trailer.emplace_back("argmax_delta@gamma=" + format_short(g),
                           format_real(adversary::damage_argmax(g, delta_grid)));
  }
  return t;
}

struct SimulateRequest {
  sim::Mode mode = sim::Mode::PostChange;
  double mu = 1.0;
  std::optional<double> h;
  std::optional<double> gamma;  // design h from gamma when h is absent
  std::optional<double> step;
  std::optional<double> horizon;
  std::uint64_t paths = 10000;
  std::uint64_t seed = 0;
  bool bridge = true;
  bool strict = false;
};

/// Resolves defaults: h from gamma, step from default_step, horizon at 50
/// times the larger analytic mean.
inline sim::SimConfig resolve(const SimulateRequest& r) {
  if (r.h.has_value() == r.gamma.has_value()) {
    throw std::invalid_argument("simulate: give exactly one of h or gamma");
  }
  sim::SimConfig c;
  c.mode = r.mode;
  c.mu = r.mu;
  c.h = r.h ? *r.h : analytics::solve_threshold(*r.gamma, r.mu).h;
  c.step = r.step.value_or(sim::default_step(c.mu, c.h));
  c.horizon = r.horizon.value_or(50.0 * std::max(analytics::at2fa(c.mu, c.h), analytics::add(c.mu, c.h)));
  c.paths = r.paths;
  c.seed = r.seed;
  c.bridge_correction = r.bridge;
  c.validate();
  return c;
}

inline CurveTable simulate(const SimulateRequest& r, unsigned threads = 0) {
  const sim::SimConfig c = resolve(r);
  const sim::SimEstimate e = sim::estimate(c, {threads, r.strict});
  const double target =
      c.mode == sim::Mode::PreChange ? analytics::at2fa(c.mu, c.h) : analytics::add(c.mu, c.h);

  std::string params = std::string("--mode ") + sim::to_string(c.mode) + " --mu " + format_short(c.mu);
  params += r.gamma ? " --gamma " + format_short(*r.gamma) : " --h " + format_short(c.h);
  params += " --step " + format_short(c.step) + " --horizon " + format_short(c.horizon) + " --paths " +
            std::to_string(c.paths) + " --seed " + std::to_string(c.seed) + " --bridge " +
            (c.bridge_correction ? "on" : "off");

  CurveTable t;
  t.metadata = detail::base_meta("simulate", params);
  t.metadata.emplace_back("seed", std::to_string(c.seed));
  t.metadata.emplace_back("mode", sim::to_string(c.mode));
  t.columns = {{"mu", "1/sqrt(time)"}, {"h", "1"},         {"step", "time"},     {"paths", "count"},
               {"mean", "time"},       {"stderr", "time"}, {"truncated", "count"}, {"analytic", "time"},
               {"z", "1"}};
  t.add_row({c.mu, c.h, c.step, static_cast<double>(e.paths_used), e.mean, e.std_error,
             static_cast<double>(e.truncated), target, (e.mean - target) / e.std_error});
  return t;
}

}  // namespace qcd::report

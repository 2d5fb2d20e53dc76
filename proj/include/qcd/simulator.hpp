#pragma once

// Monte Carlo estimation of CuSum stopping times under Brownian dynamics.
//
// The log-likelihood process U_s = mu Z_s - mu^2 s / 2 has exactly Gaussian
// increments, so it is sampled on a grid of width `step` and the CuSum
// statistic Y = U - min U is advanced by the reflected recursion
// Y <- max(0, Y + dU). Optionally, a Brownian-bridge test catches threshold
// crossings between grid points.
//
// Each path draws from two private substreams derived from (seed, path
// index), so a path's outcome does not depend on which thread ran it or in
// what order. Aggregation runs in path-index order with compensated sums,
// which makes estimates bit-identical for any thread count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "qcd/analytics.hpp"

namespace qcd::sim {

enum class Mode { PreChange, PostChange };

inline const char* to_string(Mode m) { return m == Mode::PreChange ? "pre" : "post"; }

struct SimConfig {
  double mu = 1.0;
  double h = 1.0;
  double step = 1e-3;
  std::uint64_t paths = 1000;
  std::uint64_t seed = 0;
  double horizon = 100.0;
  bool bridge_correction = true;
  Mode mode = Mode::PostChange;

  void validate() const {
    auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!positive(mu)) throw std::domain_error("SimConfig: mu must be positive");
    if (!positive(h)) throw std::domain_error("SimConfig: h must be positive");
    if (!positive(step)) throw std::domain_error("SimConfig: step must be positive");
    if (!positive(horizon)) throw std::domain_error("SimConfig: horizon must be positive");
    if (step > horizon) throw std::domain_error("SimConfig: step exceeds horizon");
    if (paths < 1) throw std::domain_error("SimConfig: paths must be at least 1");
  }
};

struct PathState {
  double y = 0.0;
  double t = 0.0;
};

struct SimEstimate {
  double mean = std::numeric_limits<double>::quiet_NaN();  // NaN unless every path stopped
  double std_error = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t paths_used = 0;
  std::uint64_t truncated = 0;

  bool complete() const { return truncated == 0; }
  friend bool operator==(const SimEstimate&, const SimEstimate&) = default;
};

class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Increment of U over one step: -/+ mu^2 step / 2 + mu sqrt(step) N.
inline double drift_per_step(Mode mode, double mu, double step) {
  const double d = 0.5 * mu * mu * step;
  return mode == Mode::PreChange ? -d : d;
}

inline double step_increment(Mode mode, double mu, double step, double gaussian) {
  return drift_per_step(mode, mu, step) + mu * std::sqrt(step) * gaussian;
}

/// One step of the reflected statistic.
inline double reflect(double y, double du) { return std::max(0.0, y + du); }

/// Probability that a diffusion with per-unit-time variance `variance`
/// crossed level h between grid values a and b (both below h).
inline double bridge_crossing_probability(double a, double b, double h, double variance, double step) {
  return std::exp(-2.0 * (h - a) * (h - b) / (variance * step));
}

// Standard normal draws by a 256-layer ziggurat (Marsaglia and Tsang) on
// 64-bit engine output. Written out rather than using
// std::normal_distribution because the standard leaves that algorithm
// unspecified, and results must not vary between standard library
// implementations.
class NormalSource {
 public:
  template <class Engine>
  double operator()(Engine& eng) {
    const Tables& tb = tables();
    for (;;) {
      const std::uint64_t bits = eng();
      const unsigned i = static_cast<unsigned>(bits & 0xFFu);
      const bool negative = (bits >> 8) & 1u;
      const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
      const double x = u * tb.x[i];
      if (x < tb.x[i + 1]) return negative ? -x : x;
      if (i == 0) {
        double a, b;
        do {
          a = -std::log(1.0 - uniform(eng)) / kR;
          b = -std::log(1.0 - uniform(eng));
        } while (b + b < a * a);
        return negative ? -(kR + a) : kR + a;
      }
      if (tb.f[i + 1] + uniform(eng) * (tb.f[i] - tb.f[i + 1]) < std::exp(-0.5 * x * x)) {
        return negative ? -x : x;
      }
    }
  }

  /// Uniform on [0, 1) with 53 random bits.
  template <class Engine>
  static double uniform(Engine& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
  }

 private:
  static constexpr int kLayers = 256;
  static constexpr double kR = 3.6541528853610088;  // start of the tail
  static constexpr double kV = 0.00492867323399;    // area of each layer

  struct Tables {
    double x[kLayers + 1];
    double f[kLayers + 1];
  };

  static const Tables& tables() {
    static const Tables t = [] {
      Tables tb{};
      auto pdf = [](double v) { return std::exp(-0.5 * v * v); };
      tb.x[0] = kV / pdf(kR);
      tb.x[1] = kR;
      for (int i = 2; i < kLayers; ++i) {
        tb.x[i] = std::sqrt(-2.0 * std::log(kV / tb.x[i - 1] + pdf(tb.x[i - 1])));
      }
      tb.x[kLayers] = 0.0;
      for (int i = 0; i <= kLayers; ++i) tb.f[i] = pdf(tb.x[i]);
      return tb;
    }();
    return t;
  }
};

/// The two random substreams owned by one path.
struct PathStreams {
  std::mt19937_64 increments;
  std::mt19937_64 bridge;
};

/// Engine for substream `tag` of path `path_index`: the 64-bit key produced
/// by std::seed_seq from (seed, path_index, tag) seeds a std::mt19937_64.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t path_index, std::uint32_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(path_index),
                    static_cast<std::uint32_t>(path_index >> 32), tag};
  std::uint32_t key[2];
  seq.generate(key, key + 2);
  return std::mt19937_64((static_cast<std::uint64_t>(key[1]) << 32) | key[0]);
}

inline PathStreams path_streams(std::uint64_t seed, std::uint64_t path_index) {
  return PathStreams{substream(seed, path_index, 0u), substream(seed, path_index, 1u)};
}

namespace detail {

// Crossing probabilities below 2^-54 are skipped without drawing; a 53-bit
// uniform falls under them only when it is exactly 0.
inline constexpr double kBridgeExponentCutoff = 37.5;

inline std::uint64_t max_steps(const SimConfig& c) {
  return static_cast<std::uint64_t>(std::floor(c.horizon / c.step));
}

}  // namespace detail

/// First time the reflected statistic reaches h, or nullopt if the horizon
/// is reached first.
inline std::optional<double> run_path(const SimConfig& config, std::uint64_t path_index) {
  PathStreams streams = path_streams(config.seed, path_index);
  NormalSource normal;

  const double h = config.h;
  const double step = config.step;
  const double drift = drift_per_step(config.mode, config.mu, config.step);
  const double vol = config.mu * std::sqrt(config.step);
  const double inv_half_var_step = 2.0 / (config.mu * config.mu * config.step);
  const std::uint64_t n_max = detail::max_steps(config);
  const bool bridge = config.bridge_correction;

  PathState state;
  for (std::uint64_t k = 0; k < n_max; ++k) {
    const double next = reflect(state.y, drift + vol * normal(streams.increments));
    if (next >= h) return static_cast<double>(k + 1) * step;
    if (bridge) {
      const double e = inv_half_var_step * (h - state.y) * (h - next);
      if (e < detail::kBridgeExponentCutoff &&
          NormalSource::uniform(streams.bridge) < std::exp(-e)) {
        return (static_cast<double>(k) + 0.5) * step;
      }
    }
    state.y = next;
    state.t = static_cast<double>(k + 1) * step;
  }
  return std::nullopt;
}

struct ExecutionOptions {
  unsigned threads = 0;  // 0: hardware concurrency
  bool strict = false;   // throw TruncationError if any path hits the horizon
};

namespace detail {

// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline unsigned resolve_threads(unsigned requested, std::uint64_t paths) {
  unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::uint64_t>(n, paths));
}

}  // namespace detail

/// Mean and standard error of the stopping time over config.paths paths.
inline SimEstimate estimate(const SimConfig& config, const ExecutionOptions& options = {}) {
  config.validate();
  const std::uint64_t n = config.paths;
  std::vector<double> times(n, 0.0);
  std::vector<unsigned char> cut(n, 0);

  auto work = [&](std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t i = begin; i < end; ++i) {
      if (auto t = run_path(config, i)) {
        times[i] = *t;
      } else {
        cut[i] = 1;
      }
    }
  };

  const unsigned nthreads = detail::resolve_threads(options.threads, n);
  if (nthreads <= 1) {
    work(0, n);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(nthreads);
    const std::uint64_t chunk = (n + nthreads - 1) / nthreads;
    for (unsigned t = 0; t < nthreads; ++t) {
      const std::uint64_t b = std::min<std::uint64_t>(n, t * chunk);
      const std::uint64_t e = std::min<std::uint64_t>(n, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
  }

  SimEstimate out;
  out.paths_used = n;
  for (unsigned char c : cut) out.truncated += c;
  if (out.truncated > 0) {
    if (options.strict) {
      throw TruncationError(std::to_string(out.truncated) + " of " + std::to_string(n) +
                            " paths reached the horizon " + std::to_string(config.horizon));
    }
    return out;
  }

  detail::CompensatedSum sum;
  for (double t : times) sum.add(t);
  const double mean = sum.value() / static_cast<double>(n);
  detail::CompensatedSum sq;
  for (double t : times) sq.add((t - mean) * (t - mean));
  const double var = n > 1 ? sq.value() / static_cast<double>(n - 1) : 0.0;
  out.mean = mean;
  out.std_error = std::sqrt(var / static_cast<double>(n));
  return out;
}

/// Overrides for validate_design; unset fields take problem-scaled defaults.
struct SimOverrides {
  std::optional<double> step;
  std::optional<double> horizon;
  std::uint64_t paths = 10000;
  std::uint64_t seed = 0;
  bool bridge_correction = true;
  unsigned threads = 0;
  // Refuse designs whose expected total step count exceeds this.
  double max_total_steps = 2e9;
};

/// Default grid width: 1e-3 of the diffusion time needed to travel
/// min(1, h), i.e. 1e-3 * min(1, h^2) / mu^2.
inline double default_step(double mu, double h) {
  return 1e-3 * std::min(1.0, h * h) / (mu * mu);
}

struct ValidationReport {
  DetectorDesign design;
  SimConfig pre_config;
  SimConfig post_config;
  SimEstimate pre;   // estimates at2fa
  SimEstimate post;  // estimates add
  double z_at2fa;
  double z_add;
};

class RefusedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Designs the threshold for (gamma, mu) and checks both closed-form means
/// against simulation.
inline ValidationReport validate_design(double gamma, double mu, const SimOverrides& o = {}) {
  const DetectorDesign d = analytics::solve_threshold(gamma, mu);
  const double step = o.step.value_or(default_step(mu, d.h));
  const double horizon = o.horizon.value_or(50.0 * std::max(d.at2fa, d.add));
  if (d.at2fa > horizon) {
    throw RefusedError("validate_design: expected time to false alarm " + std::to_string(d.at2fa) +
                       " exceeds the horizon " + std::to_string(horizon));
  }
  const double expected_steps = static_cast<double>(o.paths) * (d.at2fa + d.add) / step;
  if (expected_steps > o.max_total_steps) {
    throw RefusedError("validate_design: about " + std::to_string(expected_steps) +
                       " simulation steps needed, budget is " + std::to_string(o.max_total_steps));
  }

  SimConfig base;
  base.mu = mu;
  base.h = d.h;
  base.step = step;
  base.paths = o.paths;
  base.seed = o.seed;
  base.horizon = horizon;
  base.bridge_correction = o.bridge_correction;

  ValidationReport r{d, base, base, {}, {}, 0.0, 0.0};
  r.pre_config.mode = Mode::PreChange;
  r.post_config.mode = Mode::PostChange;
  const ExecutionOptions exec{o.threads, false};
  r.pre = estimate(r.pre_config, exec);
  r.post = estimate(r.post_config, exec);
  r.z_at2fa = (r.pre.mean - d.at2fa) / r.pre.std_error;
  r.z_add = (r.post.mean - d.add) / r.post.std_error;
  return r;
}

}  // namespace qcd::sim

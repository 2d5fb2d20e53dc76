#pragma once

// Real branches of the Lambert W function, plus a log-domain solver for
// W_{-1}(-e^{-y}) that never forms the (underflowing) argument -e^{-y}.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace qcd::lambert {

enum class Branch { Principal, MinusOne };

namespace detail {

// 1/e split into a double head and a correction, so that z + 1/e is exact
// for z near the branch point.
inline constexpr double kInvEHi = 0.36787944117144233;
inline constexpr double kInvELo = -1.2428753672788363168e-17;
inline constexpr double kE = 2.718281828459045235360287;
inline constexpr double kEps = std::numeric_limits<double>::epsilon();

// Inputs at most this many ulps below -1/e are clamped onto the branch point.
inline constexpr int kBranchClampUlps = 4;

inline double branch_point() { return -kInvEHi; }

// Distance of z above the branch point, z + 1/e, computed without
// cancellation. Negative means outside the real domain.
inline double offset_from_branch(double z) { return (z + kInvEHi) + kInvELo; }

// Returns true if z is below -1/e by more than the clamp tolerance.
inline bool below_branch(double z) {
  const double b = branch_point();
  if (z >= b) return false;
  double limit = b;
  for (int i = 0; i < kBranchClampUlps; ++i) {
    limit = std::nextafter(limit, -std::numeric_limits<double>::infinity());
  }
  return z < limit;
}

// Series about the branch point in p = sqrt(2(1 + e z)); W0 takes +p, W-1
// takes -p.
inline double branch_series(double p) {
  constexpr double c[] = {-1.0,
                          1.0,
                          -1.0 / 3.0,
                          11.0 / 72.0,
                          -43.0 / 540.0,
                          769.0 / 17280.0,
                          -221.0 / 8505.0,
                          680863.0 / 43545600.0,
                          -1963.0 / 204120.0,
                          226287557.0 / 37623398400.0};
  double acc = 0.0;
  for (int i = 9; i >= 0; --i) acc = acc * p + c[i];
  return acc;
}

inline double branch_p(double z) {
  const double d = offset_from_branch(z);
  return d <= 0.0 ? 0.0 : std::sqrt(2.0 * kE * d);
}

inline double halley(double w, double z) {
  for (int it = 0; it < 32; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - z;
    const double wp1 = w + 1.0;
    if (f == 0.0 || wp1 == 0.0) break;
    const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
    const double dw = f / denom;
    w -= dw;
    if (std::abs(dw) <= 4.0 * kEps * std::abs(w)) break;
  }
  return w;
}

[[noreturn]] inline void domain_fail(const char* fn, double z) {
  throw std::domain_error(std::string(fn) + ": argument " + std::to_string(z) +
                          " outside the real branch domain");
}

}  // namespace detail

/// Principal branch W0 on [-1/e, inf). Result is >= -1.
inline double lambert_w0(double z) {
  using namespace detail;
  if (std::isnan(z) || below_branch(z)) domain_fail("lambert_w0", z);
  if (z == 0.0) return 0.0;
  if (std::isinf(z)) return z;
  if (offset_from_branch(z) <= 0.0) return -1.0;

  const double p = branch_p(z);
  if (p < 1e-3) return branch_series(p);

  double w;
  if (z < -0.25) {
    w = branch_series(p);
  } else if (z < 3.0) {
    const double l = std::log1p(z);
    w = l * (1.0 - std::log1p(l) / (2.0 + l));
  } else {
    const double l1 = std::log(z);
    const double l2 = std::log(l1);
    w = l1 - l2 + l2 / l1;
  }
  return halley(w, z);
}

/// Lower branch W_{-1} on [-1/e, 0). Result is <= -1.
inline double lambert_wm1(double z) {
  using namespace detail;
  if (std::isnan(z) || z >= 0.0 || below_branch(z)) domain_fail("lambert_wm1", z);
  if (offset_from_branch(z) <= 0.0) return -1.0;

  const double p = branch_p(z);
  if (p < 1e-3) return branch_series(-p);

  if (z > -1e-280) {
    // exp(w) underflows here; iterate on w + log(-w) = log(-z) instead.
    const double lz = std::log(-z);
    double w = lz - std::log(-lz);
    for (int it = 0; it < 32; ++it) {
      const double dw = (w + std::log(-w) - lz) / (1.0 + 1.0 / w);
      w -= dw;
      if (std::abs(dw) <= 4.0 * kEps * std::abs(w)) break;
    }
    return w;
  }

  double w;
  if (z < -0.25) {
    w = branch_series(-p);
  } else {
    const double l1 = std::log(-z);
    const double l2 = std::log(-l1);
    w = l1 - l2 + l2 / l1;
  }
  w = halley(w, z);
  return w > -1.0 ? -1.0 : w;
}

inline double lambert_w(Branch branch, double z) {
  return branch == Branch::Principal ? lambert_w0(z) : lambert_wm1(z);
}

/// W_{-1}'(z) = W/(z(1+W)); diverges at the branch point.
inline double lambert_wm1_deriv(double z) {
  if (std::isnan(z) || z >= 0.0 || detail::offset_from_branch(z) <= 0.0) {
    detail::domain_fail("lambert_wm1_deriv", z);
  }
  const double w = lambert_wm1(z);
  if (w == -1.0) detail::domain_fail("lambert_wm1_deriv", z);
  return w / (z * (1.0 + w));
}

namespace detail {

// v - log1p(v), accurate for small |v| where the direct form cancels.
inline double v_minus_log1p(double v) {
  if (std::abs(v) < 0.1) {
    // sum_{k>=2} (-1)^k v^k / k
    double term = v * v;
    double acc = 0.0;
    for (int k = 2; k < 40; ++k) {
      const double add = term / k;
      acc += (k % 2 == 0) ? add : -add;
      if (std::abs(add) <= 0.25 * kEps * std::abs(acc)) break;
      term *= v;
    }
    return acc;
  }
  return v - std::log1p(v);
}

}  // namespace detail

/// Solves u - log(u) = 1 + x for u >= 1 and returns v = u - 1.
///
/// Taking the offset x rather than y = 1 + x keeps full relative precision
/// when x is far below machine epsilon.
inline double solve_u_offset(double x) {
  using detail::kEps;
  if (std::isnan(x) || x < 0.0) {
    throw std::domain_error("solve_u: offset " + std::to_string(x) + " is negative");
  }
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return x;

  double v;
  if (x < 1.0) {
    const double s = std::sqrt(2.0 * x);
    v = s + s * s / 3.0 + s * s * s / 36.0;
  } else {
    const double y = 1.0 + x;
    v = y + std::log(y) - 1.0;
  }
  // Newton on f(v) = v - log1p(v) - x, f'(v) = v / (1 + v). f is convex, so
  // after the first step the iterates approach the root from above.
  for (int it = 0; it < 100; ++it) {
    const double f = detail::v_minus_log1p(v) - x;
    const double dv = f * (1.0 + v) / v;
    v -= dv;
    if (!(v > 0.0)) v = std::sqrt(2.0 * x);
    if (std::abs(dv) <= 2.0 * kEps * v) break;
  }
  return v;
}

/// u = -W_{-1}(-e^{-y}) for y >= 1, i.e. the root u >= 1 of u - log(u) = y.
inline double solve_u(double y) {
  constexpr double tol = 4.0 * detail::kEps;
  if (std::isnan(y) || y < 1.0 - tol) {
    throw std::domain_error("solve_u: argument " + std::to_string(y) + " is below 1");
  }
  if (y <= 1.0) return 1.0;
  return 1.0 + solve_u_offset(y - 1.0);
}

}  // namespace qcd::lambert

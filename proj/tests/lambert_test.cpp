#include "qcd/lambert.hpp"

#include <gtest/gtest.h>

#include <boost/math/special_functions/lambert_w.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "oracles.hpp"

namespace {

using qcd::lambert::lambert_w0;
using qcd::lambert::lambert_wm1;
using qcd::lambert::lambert_wm1_deriv;
using qcd::lambert::solve_u;
using qcd::lambert::solve_u_offset;

const double kBranch = -std::exp(-1.0);

TEST(LambertW0, KnownValues) {
  EXPECT_EQ(lambert_w0(0.0), 0.0);
  EXPECT_NEAR(lambert_w0(std::exp(1.0)), 1.0, 1e-15);
  EXPECT_EQ(lambert_w0(kBranch), -1.0);
  // mpmath: W0(-1/4)
  EXPECT_NEAR(lambert_w0(-0.25), -0.3574029561813889, 1e-15);
}

TEST(LambertWm1, KnownValues) {
  EXPECT_EQ(lambert_wm1(kBranch), -1.0);
  EXPECT_NEAR(lambert_wm1(-2.0 * std::exp(-2.0)), -2.0, 1e-14);
  // mpmath, 40 digits: W_{-1}(-1e-6) = -16.62650890137247338...
  EXPECT_NEAR(lambert_wm1(-1e-6), -16.626508901372473, 1e-13);
  EXPECT_NEAR(lambert_wm1(-0.25), -2.1532923641103496, 1e-14);
}

TEST(LambertWm1, ExpansionBracketsSmallArgument) {
  const double z = -1e-6;
  const double l1 = std::log(-z);
  const double approx = l1 - std::log(-l1);  // about -16.44
  EXPECT_NEAR(approx, -16.44, 0.01);
  EXPECT_LT(lambert_wm1(z), approx);
}

TEST(LambertDomain, Errors) {
  EXPECT_THROW(lambert_w0(-0.4), std::domain_error);
  EXPECT_THROW(lambert_wm1(0.0), std::domain_error);
  EXPECT_THROW(lambert_wm1(0.1), std::domain_error);
  EXPECT_THROW(lambert_wm1(-0.4), std::domain_error);
  EXPECT_THROW(lambert_w0(std::numeric_limits<double>::quiet_NaN()), std::domain_error);
}

TEST(LambertDomain, ClampsWithinFourUlpsOfBranchPoint) {
  double z = kBranch;
  for (int i = 0; i < 4; ++i) z = std::nextafter(z, -1.0);
  EXPECT_EQ(lambert_w0(z), -1.0);
  EXPECT_EQ(lambert_wm1(z), -1.0);
  z = std::nextafter(z, -1.0);
  EXPECT_THROW(lambert_w0(z), std::domain_error);
  EXPECT_THROW(lambert_wm1(z), std::domain_error);
}

TEST(LambertIdentity, PrincipalBranchResidual) {
  for (int n = 1; n <= 10000; ++n) {
    const double q = qcd::oracle::golden_point(n);
    // Half near the negative domain, half log-uniform over [1e-300, 1e300].
    const double z = n % 2 ? kBranch * q : std::pow(10.0, -300.0 + 600.0 * q);
    const double w = lambert_w0(z);
    ASSERT_GE(w, -1.0) << z;
    if (z != 0.0) {
      ASSERT_LE(qcd::oracle::lambert_residual(w, z), 1e-13) << "z=" << z;
    }
  }
}

TEST(LambertIdentity, LowerBranchResidual) {
  for (int n = 1; n <= 10000; ++n) {
    const double q = qcd::oracle::golden_point(n);
    const double z = n % 2 ? kBranch * (1.0 - q) : -std::exp(-1.0 - 700.0 * q);
    if (z == 0.0) continue;
    const double w = lambert_wm1(z);
    ASSERT_LE(w, -1.0) << z;
    ASSERT_LE(qcd::oracle::lambert_residual(w, z), 1e-13) << "z=" << z;
  }
}

TEST(LambertIdentity, AgreesWithBoost) {
  for (int n = 1; n <= 2000; ++n) {
    const double q = qcd::oracle::golden_point(n);
    const double z0 = kBranch + (20.0 - kBranch) * q;
    EXPECT_NEAR(lambert_w0(z0), boost::math::lambert_w0(z0), 1e-13 * std::max(1.0, std::abs(z0)));
    const double zm = kBranch * (1.0 - q);
    if (zm < 0.0 && zm > kBranch) {
      const double ref = boost::math::lambert_wm1(zm);
      EXPECT_NEAR(lambert_wm1(zm), ref, 1e-12 * std::abs(ref)) << zm;
    }
  }
}

TEST(LambertIdentity, BranchOrdering) {
  for (int n = 1; n <= 1000; ++n) {
    const double z = kBranch * (1.0 - qcd::oracle::golden_point(n));
    if (!(z > kBranch && z < 0.0)) continue;
    const double w0 = lambert_w0(z);
    const double wm = lambert_wm1(z);
    EXPECT_GE(w0, -1.0);
    EXPECT_LE(wm, -1.0);
    EXPECT_LT(wm, w0);
  }
  // Strict away from the branch point.
  EXPECT_GT(lambert_w0(-0.3), -1.0);
  EXPECT_LT(lambert_wm1(-0.3), -1.0);
}

TEST(LambertIdentity, LowerBranchNearZeroStaysFinite) {
  const double w = lambert_wm1(-1e-300);
  EXPECT_TRUE(std::isfinite(w));
  EXPECT_NEAR(w + std::log(-w), std::log(1e-300), 1e-12 * 700);
  EXPECT_TRUE(std::isfinite(lambert_wm1(-std::numeric_limits<double>::denorm_min())));
}

TEST(LambertAsymptotics, RatioToLeadingTermsDecreasesToOne) {
  double previous = std::numeric_limits<double>::infinity();
  for (double z : {-1e-8, -1e-12, -1e-16}) {
    const double l1 = std::log(-z);
    const double ratio = lambert_wm1(z) / (l1 - std::log(-l1));
    EXPECT_GT(ratio, 1.0);
    EXPECT_LT(ratio, previous);
    previous = ratio;
  }
  // mpmath: ratio at -1e-16 is 1.0023674925...
  EXPECT_NEAR(previous, 1.0023674925266760, 1e-12);
}

TEST(LambertDerivative, ClosedFormAtMinusTwoOverESquared) {
  const double z = -2.0 * std::exp(-2.0);
  EXPECT_NEAR(lambert_wm1_deriv(z), -std::exp(2.0), 1e-12);
}

TEST(LambertDerivative, MatchesFiniteDifferences) {
  // mpmath: d/dz W_{-1}(z) at -0.1 = -13.880252213229780...
  EXPECT_NEAR(lambert_wm1_deriv(-0.1), -13.880252213229781, 1e-12);
  const double fd = qcd::oracle::central_difference(lambert_wm1, -0.1, 1e-6);
  EXPECT_NEAR(lambert_wm1_deriv(-0.1) / fd, 1.0, 1e-6);

  const double lo = kBranch + 1e-3, hi = -1e-3;
  for (int i = 0; i <= 200; ++i) {
    const double z = lo + (hi - lo) * i / 200.0;
    const double step = 1e-6 * std::min(std::abs(z), z - kBranch);
    const double exact = lambert_wm1_deriv(z);
    const double numeric = qcd::oracle::central_difference(lambert_wm1, z, step);
    EXPECT_NEAR(exact / numeric, 1.0, 1e-6) << "z=" << z;
  }
}

TEST(LambertDerivative, DivergesAtBranchPoint) {
  EXPECT_THROW(lambert_wm1_deriv(kBranch), std::domain_error);
  EXPECT_THROW(lambert_wm1_deriv(0.0), std::domain_error);
  double previous = 0.0;
  for (double eps : {1e-2, 1e-4, 1e-6, 1e-8}) {
    const double magnitude = std::abs(lambert_wm1_deriv(kBranch + eps));
    EXPECT_GT(magnitude, previous);
    previous = magnitude;
  }
  EXPECT_GT(previous, 1e3);
}

TEST(SolveU, KnownValues) {
  EXPECT_EQ(solve_u(1.0), 1.0);
  // Bisection over [1, 10] and mpmath agree: 2.35767667394589905...
  EXPECT_NEAR(solve_u(1.5), 2.3576766739458991, 1e-14);
  EXPECT_NEAR(qcd::oracle::u_by_bisection(1.5), 2.3576766739458991, 1e-14);
  const double u = solve_u(1e6);
  EXPECT_NEAR(u, 1000013.8155243734, 1e-8);
  EXPECT_LE(std::abs(u - std::log(u) - 1e6), 1e-12 * 1e6);
}

TEST(SolveU, Errors) {
  EXPECT_THROW(solve_u(0.5), std::domain_error);
  EXPECT_THROW(solve_u_offset(-1e-3), std::domain_error);
  EXPECT_EQ(solve_u(1.0 - 1e-17), 1.0);
}

TEST(SolveU, ResidualAndMonotonicity) {
  double previous = 1.0;
  for (int i = 0; i <= 2000; ++i) {
    const double y = 1.0 + std::pow(10.0, -12.0 + 27.0 * i / 2000.0);
    const double u = solve_u(y);
    ASSERT_GE(u, 1.0);
    ASSERT_LE(std::abs(u - std::log(u) - y), 1e-12 * std::max(1.0, y)) << y;
    ASSERT_GE(u, previous) << y;
    previous = u;
  }
}

TEST(SolveU, MatchesDirectLowerBranch) {
  for (int i = 0; i <= 700; ++i) {
    const double y = 1.0 + i * (699.0 / 700.0);
    EXPECT_NEAR(lambert_wm1(-std::exp(-y)), -solve_u(y), 1e-10) << y;
  }
}

TEST(SolveU, FiniteBeyondUnderflow) {
  // -e^{-y} is 0 in double here, so the direct form is unusable.
  EXPECT_EQ(-std::exp(-800.0), 0.0);
  const double u = solve_u(800.0);
  EXPECT_TRUE(std::isfinite(u));
  EXPECT_NEAR(u, qcd::oracle::u_by_bisection(800.0), 1e-10);
  EXPECT_NEAR(solve_u(1e300) - std::log(solve_u(1e300)), 1e300, 1e288);
}

TEST(SolveU, OffsetKeepsTinyOffsets) {
  // u - 1 ~ sqrt(2x) even when 1 + x rounds to 1.
  const double x = 5e-46;
  const double v = solve_u_offset(x);
  EXPECT_NEAR(v / std::sqrt(2.0 * x), 1.0, 1e-20 + 2.0 * std::sqrt(2.0 * x));
  EXPECT_GT(v, 0.0);
}

}  // namespace

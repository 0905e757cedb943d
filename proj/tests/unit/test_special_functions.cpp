// Copyright 2026 The nlhdual Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nlh/special_functions.hpp"
#include "oracles.hpp"

using nlh::BesselOrder;

namespace {

/// Ascending series of Y_0 summed in long double:
/// Y0(x) = (2/pi)(ln(x/2) + gamma) J0(x) + (2/pi) sum_{k>=1} (-1)^{k+1} H_k (x^2/4)^k / (k!)^2.
double y0_series(double xd) {
  const long double x = xd, q = x * x / 4.0L;
  long double term = 1.0L, j0 = 1.0L, tail = 0.0L, harmonic = 0.0L;
  for (int k = 1; k < 200; ++k) {
    term *= -q / (static_cast<long double>(k) * k);
    harmonic += 1.0L / k;
    j0 += term;
    tail -= harmonic * term;
  }
  const long double gamma = 0.57721566490153286060651209L;
  const long double pi = 3.14159265358979323846264338L;
  return static_cast<double>(2.0L / pi * ((std::log(x / 2.0L) + gamma) * j0 + tail));
}

}  // namespace

TEST_CASE("BesselOrder validation") {
  CHECK_THROWS_AS(BesselOrder(-0.5), std::domain_error);
  CHECK_THROWS_AS(BesselOrder(0.3), std::domain_error);
  CHECK(BesselOrder::for_dimension(3).value() == 0.5);
  CHECK(BesselOrder::for_dimension(2).value() == 0.0);
  CHECK(BesselOrder::for_dimension(4).value() == 1.0);
}

TEST_CASE("half-integer closed forms") {
  const BesselOrder half(0.5);
  CHECK(std::fabs(nlh::bessel_y(half, std::numbers::pi / 2)) < 1e-15);
  CHECK(nlh::bessel_y(half, std::numbers::pi) == doctest::Approx(std::sqrt(2.0) / std::numbers::pi).epsilon(1e-14));
  CHECK(nlh::bessel_y(half, std::numbers::pi) == doctest::Approx(0.450158).epsilon(1e-6));
  // Y_{1/2}, Y_{3/2}, Y_{5/2} against the trigonometric forms on (0, 100].
  for (double x = 0.05; x <= 100.0; x += 0.37) {
    const double s = std::sin(x), c = std::cos(x), pre = std::sqrt(2.0 / (std::numbers::pi * x));
    const double y12 = -pre * c;
    const double y32 = -pre * (c / x + s);
    const double y52 = pre * ((1.0 - 3.0 / (x * x)) * c - 3.0 * s / x);
    const double env = pre * std::max(1.0, 3.0 / (x * x));
    CHECK(std::fabs(nlh::bessel_y(BesselOrder(0.5), x) - y12) <= 1e-12 * pre);
    CHECK(std::fabs(nlh::bessel_y(BesselOrder(1.5), x) - y32) <= 1e-12 * std::max(pre, std::fabs(y32)));
    CHECK(std::fabs(nlh::bessel_y(BesselOrder(2.5), x) - y52) <= 1e-12 * std::max(env, std::fabs(y52)));
  }
}

TEST_CASE("Y_0 against an independent ascending series") {
  CHECK(nlh::bessel_y(BesselOrder(0.0), 0.5) == doctest::Approx(y0_series(0.5)).epsilon(1e-12));
  for (double x : {0.01, 0.3, 1.0, 2.5, 5.0, 7.9}) {
    CHECK(nlh::bessel_y(BesselOrder(0.0), x) == doctest::Approx(y0_series(x)).epsilon(1e-12));
  }
}

TEST_CASE("integer orders against boost on (0, 100]") {
  for (int nu : {0, 1, 2, 3}) {
    for (double x = 0.02; x <= 100.0; x *= 1.07) {
      const double ref = boost::math::cyl_neumann(nu, x);
      const double env = std::max(std::fabs(ref), std::sqrt(2.0 / (std::numbers::pi * x)));
      CHECK(std::fabs(nlh::bessel_y(BesselOrder(nu), x) - ref) <= 1e-12 * env);
    }
  }
}

TEST_CASE("series and asymptotic branches agree at the switch") {
  const BesselOrder zero(0.0), one(1.0);
  for (double dx : {-1e-9, 1e-9}) {
    const double x = nlh::kBesselSeriesSwitch + dx;
    CHECK(nlh::bessel_y(zero, x) == doctest::Approx(boost::math::cyl_neumann(0, x)).epsilon(1e-11));
    CHECK(nlh::bessel_y(one, x) == doctest::Approx(boost::math::cyl_neumann(1, x)).epsilon(1e-11));
  }
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(nlh::bessel_y(BesselOrder(0.0), 0.0), std::domain_error);
  CHECK_THROWS_AS(nlh::bessel_y(BesselOrder(0.5), -1.0), std::domain_error);
  CHECK_THROWS_AS(nlh::psi_kernel(0.0, 3), std::domain_error);
  CHECK_THROWS_AS(nlh::psi_kernel(-1.0, 2), std::domain_error);
}

TEST_CASE("first positive zeros") {
  const double y12 = nlh::first_positive_zero_y(BesselOrder(0.5));
  CHECK(std::fabs(y12 - std::numbers::pi / 2) <= 1e-12);
  const double y0 = nlh::first_positive_zero_y(BesselOrder(0.0));
  CHECK(std::fabs(nlh::bessel_y(BesselOrder(0.0), y0)) <= 1e-11);
  CHECK(std::fabs(y0 - 0.89357696627916752) <= 1e-12);
  const double y1 = nlh::first_positive_zero_y(BesselOrder(1.0));
  const double y32 = nlh::first_positive_zero_y(BesselOrder(1.5));
  CHECK(y1 > std::numbers::pi / 2);
  CHECK(std::fabs(y1 - 2.1971413260310170) <= 1e-12);
  CHECK(y0 < y12);
  CHECK(y12 < y1);
  CHECK(y1 < y32);
  // Nothing smaller: Y stays negative before its first zero.
  for (double x = 1e-3; x < y1; x += 0.01) CHECK(nlh::bessel_y(BesselOrder(1.0), x) < 0.0);
}

TEST_CASE("real Helmholtz kernel") {
  for (double r : {0.5, 1.0, 2.0}) {
    CHECK(std::fabs(nlh::psi_kernel(r, 3) - std::cos(r) / (4.0 * std::numbers::pi * r)) <= 1e-12);
  }
  for (double r : {0.1, 0.7, 3.0, 11.0}) {
    CHECK(nlh::psi_kernel(r, 2) == doctest::Approx(-0.25 * boost::math::cyl_neumann(0, r)).epsilon(1e-12));
    CHECK(nlh::psi_kernel(r, 4) == doctest::Approx(oracle::psi(r, 4)).epsilon(1e-11));
  }
  for (int dim : {2, 3, 4}) {
    const double y = nlh::first_positive_zero_y(BesselOrder::for_dimension(dim));
    CHECK(std::fabs(nlh::psi_kernel(y, dim)) <= 1e-12);
  }
  const double y12 = std::numbers::pi / 2;
  for (double r = 0.01; r < y12; r += 0.05) CHECK(nlh::psi_kernel(r, 3) > 0.0);
}

TEST_CASE("kernel singularity is r^{2-N}") {
  for (int dim : {3, 4}) {
    double prev = 0.0;
    for (int k = 1; k <= 6; ++k) {
      const double r = std::pow(10.0, -k);
      const double scaled = nlh::psi_kernel(r, dim) * std::pow(r, dim - 2);
      CHECK(std::isfinite(scaled));
      CHECK(std::fabs(scaled) < 1.0);
      if (k > 1) CHECK(std::fabs(scaled - prev) < 1e-1 * std::fabs(prev) + 1e-12);
      prev = scaled;
    }
    CHECK(prev == doctest::Approx(nlh::psi_singular_coefficient(dim)).epsilon(1e-6));
  }
  // N = 2: Psi(r) + log(r) / (2 pi) stays bounded.
  for (int k = 1; k <= 6; ++k) {
    const double r = std::pow(10.0, -k);
    CHECK(std::fabs(nlh::psi_kernel(r, 2) + std::log(r) / (2.0 * std::numbers::pi)) < 1.0);
  }
}

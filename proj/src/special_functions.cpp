// Copyright 2026 The nlhdual Authors
// SPDX-License-Identifier: Apache-2.0

#include "nlh/special_functions.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace nlh {
namespace {

constexpr long double kPiL = 3.141592653589793238462643383279502884L;
constexpr long double kEulerGammaL = 0.577215664901532860606512090082402431L;

// Ascending series for Y_0 and Y_1, summed in long double. Cancellation
// grows like exp(x) / x, which stays below ~1e5 for x < 15.
void series_y01(double xd, double& y0, double& y1) {
  const long double x = xd;
  const long double half = x / 2.0L;
  const long double q = half * half;
  const long double log_half = std::log(half);

  // J0, J1 and the harmonic-number sums.
  long double j0 = 0.0L, j1 = 0.0L, s0 = 0.0L, s1 = 0.0L;
  long double term0 = 1.0L;   // (-q)^k / (k!)^2
  long double term1 = half;   // (-1)^k half^{2k+1} / (k! (k+1)!)
  long double harmonic = 0.0L;  // H_k
  for (int k = 0; k < 200; ++k) {
    if (k > 0) harmonic += 1.0L / k;
    const long double harmonic_next = harmonic + 1.0L / (k + 1);
    j0 += term0;
    j1 += term1;
    s0 += harmonic * term0;
    s1 += (harmonic + harmonic_next) * term1;
    if (std::fabs(term0) < 1e-22L * std::fabs(j0) && std::fabs(term1) < 1e-22L * std::fabs(j1) && k > 2) break;
    term0 *= -q / static_cast<long double>((k + 1) * (k + 1));
    term1 *= -q / static_cast<long double>((k + 1) * (k + 2));
  }
  // Y_0 = (2/pi) [ (log(x/2) + gamma) J_0 - sum (-1)^k H_k q^k / (k!)^2 ]
  y0 = static_cast<double>((2.0L / kPiL) * ((log_half + kEulerGammaL) * j0 - s0));
  // Y_1 = (2/pi) log(x/2) J_1 - 2/(pi x)
  //       - (1/pi) sum (-1)^k (psi(k+1) + psi(k+2)) half^{2k+1} / (k! (k+1)!)
  // with psi(m+1) = H_m - gamma.
  const long double digamma_sum = s1 - 2.0L * kEulerGammaL * j1;
  y1 = static_cast<double>((2.0L / kPiL) * log_half * j1 - 2.0L / (kPiL * x) - digamma_sum / kPiL);
}

// Hankel asymptotic expansion Y_nu(x) = sqrt(2/(pi x)) (P sin chi + Q cos chi).
double asymptotic_y(int nu, double x) {
  const double mu = 4.0 * nu * nu;
  double p = 0.0, q = 0.0;
  double term = 1.0;  // a_k / x^k with sign handled below
  double last = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 60; ++k) {
    if (k > 0) {
      const double odd = 2.0 * k - 1.0;
      term *= (mu - odd * odd) / (8.0 * k * x);
    }
    const double mag = std::fabs(term);
    if (mag > last) break;
    last = mag;
    // P collects even k with alternating sign, Q the odd k.
    const int sign = ((k / 2) % 2 == 0) ? 1 : -1;
    if (k % 2 == 0) {
      p += sign * term;
    } else {
      q += sign * term;
    }
    if (mag < 1e-17 * std::fabs(p)) break;
  }
  const double s = std::sin(x), c = std::cos(x);
  double sin_chi, cos_chi;
  if (nu == 0) {  // chi = x - pi/4
    sin_chi = (s - c) * std::numbers::sqrt2 / 2.0;
    cos_chi = (c + s) * std::numbers::sqrt2 / 2.0;
  } else {  // chi = x - 3 pi/4
    sin_chi = (-s - c) * std::numbers::sqrt2 / 2.0;
    cos_chi = (s - c) * std::numbers::sqrt2 / 2.0;
  }
  return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * sin_chi + q * cos_chi);
}

double integer_order_y(int n, double x) {
  double y0, y1;
  if (x < kBesselSeriesSwitch) {
    series_y01(x, y0, y1);
  } else {
    y0 = asymptotic_y(0, x);
    y1 = asymptotic_y(1, x);
  }
  if (n == 0) return y0;
  if (n == 1) return y1;
  for (int k = 1; k < n; ++k) {
    const double next = (2.0 * k / x) * y1 - y0;
    y0 = y1;
    y1 = next;
  }
  return y1;
}

double half_integer_order_y(int twice_nu, double x) {
  const double pref = std::sqrt(2.0 / (std::numbers::pi * x));
  double y_prev = pref * std::sin(x);   // Y_{-1/2}
  double y_cur = -pref * std::cos(x);   // Y_{1/2}
  for (int twice = 1; twice < twice_nu; twice += 2) {
    const double nu = 0.5 * twice;
    const double next = (2.0 * nu / x) * y_cur - y_prev;
    y_prev = y_cur;
    y_cur = next;
  }
  return y_cur;
}

}  // namespace

BesselOrder::BesselOrder(double nu) {
  const double twice = 2.0 * nu;
  if (!(nu >= 0.0) || std::fabs(twice - std::round(twice)) > 1e-12) {
    throw std::domain_error("BesselOrder: order must be a nonnegative integer or half-integer, got " +
                            std::to_string(nu));
  }
  twice_ = static_cast<int>(std::lround(twice));
  if (twice_ % 2 != 0 && twice_ > kMaxTwiceHalfIntegerOrder) {
    throw std::domain_error("BesselOrder: half-integer orders above 21/2 are not supported");
  }
}

BesselOrder BesselOrder::for_dimension(int dim) {
  if (dim < 2) throw std::domain_error("BesselOrder: dimension must be >= 2");
  return BesselOrder(0.5 * (dim - 2));
}

double bessel_y(BesselOrder nu, double x) {
  if (!(x > 0.0)) throw std::domain_error("bessel_y: argument must be positive");
  if (nu.is_half_integer()) return half_integer_order_y(nu.twice(), x);
  return integer_order_y(nu.twice() / 2, x);
}

double first_positive_zero_y(BesselOrder nu) {
  constexpr double kStep = 0.1;
  double a = 1e-3;
  double fa = bessel_y(nu, a);
  for (int i = 0; i < 100000; ++i) {
    const double b = a + kStep;
    const double fb = bessel_y(nu, b);
    if (fb == 0.0) return b;
    if ((fa < 0.0) != (fb < 0.0)) {
      double lo = a, hi = b, flo = fa;
      while (hi - lo > 1e-14) {
        const double mid = 0.5 * (lo + hi);
        const double fm = bessel_y(nu, mid);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      return 0.5 * (lo + hi);
    }
    a = b;
    fa = fb;
  }
  throw std::runtime_error("first_positive_zero_y: no sign change found");
}

double psi_kernel(double r, int dim) {
  if (!(r > 0.0)) throw std::domain_error("psi_kernel: radius must be positive");
  const BesselOrder nu = BesselOrder::for_dimension(dim);
  const double scale = (dim == 2) ? 1.0 : std::pow(2.0 * std::numbers::pi * r, 0.5 * (2 - dim));
  return -0.25 * scale * bessel_y(nu, r);
}

double psi_singular_coefficient(int dim) {
  if (dim < 2) throw std::domain_error("psi_singular_coefficient: dimension must be >= 2");
  if (dim == 2) return 1.0 / (2.0 * std::numbers::pi);
  // Green's function of -Delta: Gamma(N/2 - 1) / (4 pi^{N/2}) r^{2-N}.
  return std::tgamma(0.5 * dim - 1.0) / (4.0 * std::pow(std::numbers::pi, 0.5 * dim));
}

}  // namespace nlh

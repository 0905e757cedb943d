// Copyright 2026 The nlhdual Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace nlh {

/// Order nu = (N-2)/2 of the Bessel functions Y_nu that appear in the real
/// Helmholtz kernel. Stored as 2*nu so that integer and half-integer orders
/// are represented exactly.
class BesselOrder {
 public:
  /// Throws std::domain_error unless nu >= 0 and 2*nu is an integer.
  explicit BesselOrder(double nu);

  /// Order belonging to space dimension N >= 2.
  static BesselOrder for_dimension(int dim);

  double value() const { return 0.5 * twice_; }
  int twice() const { return twice_; }
  bool is_half_integer() const { return twice_ % 2 != 0; }

 private:
  int twice_ = 0;
};

/// Largest supported half-integer order (N <= 23).
inline constexpr int kMaxTwiceHalfIntegerOrder = 21;

/// Bessel function of the second kind Y_nu(x), x > 0.
///
/// Half-integer orders come from the trigonometric closed forms of Y_{-1/2},
/// Y_{1/2} and upward recurrence. Integer orders use the ascending series
/// (evaluated in extended precision) below kBesselSeriesSwitch and the
/// Hankel asymptotic expansion above it, then upward recurrence from Y_0, Y_1.
double bessel_y(BesselOrder nu, double x);

/// Switch point between the ascending series and the asymptotic expansion.
inline constexpr double kBesselSeriesSwitch = 15.0;

/// Smallest x > 0 with Y_nu(x) = 0, to absolute accuracy 1e-12.
double first_positive_zero_y(BesselOrder nu);

/// Real part of the outgoing Helmholtz fundamental solution in R^N,
///   Psi(r) = -1/4 (2 pi r)^{(2-N)/2} Y_{(N-2)/2}(r),
/// so that (-Delta - 1) Psi = delta.
double psi_kernel(double r, int dim);

/// Coefficient c_N of the leading singular term of Psi: c_N r^{2-N} for
/// N >= 3 and -log(r) / (2 pi) for N = 2 (returned as 1 / (2 pi)).
double psi_singular_coefficient(int dim);

}  // namespace nlh

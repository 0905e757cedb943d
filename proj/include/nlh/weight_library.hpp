// Copyright 2026 The nlhdual Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <filesystem>
#include <variant>

#include "nlh/grid_field.hpp"

namespace nlh {

/// How a ball indicator is sampled. Sharp profiles take the amplitude at
/// every node strictly inside the ball; smooth ones taper it as
/// a (1 - (d/r)^2)^4, which has the same open support and is C^3.
enum class Profile { sharp, smooth };

/// Q = a+ 1_{B(c+, r+)} - a- 1_{B(c-, r-)} with disjoint balls, a+ > 0, a- >= 0.
struct TwoBalls {
  std::array<double, kMaxDim> plus_center{};
  double plus_radius = 1.0;
  double plus_amplitude = 1.0;
  std::array<double, kMaxDim> minus_center{};
  double minus_radius = 0.0;
  double minus_amplitude = 1.0;  // the negative ball is absent while minus_radius is 0
  Profile profile = Profile::sharp;
};

/// Q = a_ball 1_{B(c, r)} + a_ring 1_{r_in < |x - c| < r_out}, amplitudes signed.
struct BallRing {
  std::array<double, kMaxDim> center{};
  double ball_radius = 0.5;
  double ball_amplitude = -1.0;
  double ring_inner = 1.0;
  double ring_outer = 2.0;
  double ring_amplitude = 1.0;
  Profile profile = Profile::sharp;
};

/// Q read from an NLHF file on exactly the run grid.
struct FromFile {
  std::filesystem::path path;
};

using WeightSpec = std::variant<TwoBalls, BallRing, FromFile>;

/// Thrown for specs that do not fit the grid or violate their invariants.
class WeightSpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Samples Q on the grid. The result is bounded and vanishes outside
/// [-L/2, L/2)^N.
ScalarField realize(const WeightSpec& spec, const Grid& grid);

struct GeometryReport {
  std::size_t aplus_cells = 0;
  std::size_t aminus_cells = 0;
  /// Max distance between A- node centers; a bounding-box upper bound when
  /// diam_exact is false.
  double diam_aminus = 0.0;
  bool diam_exact = true;
  /// Min distance between an A+ and an A- node; +inf if either mask is
  /// empty; a bounding-box lower bound when dist_exact is false.
  double dist_apm = 0.0;
  bool dist_exact = true;
};

GeometryReport geometry_report(const ScalarField& q);

struct DiameterCriterion {
  double diameter_bound = 0.0;  // diam(A-) + h sqrt(N)
  double first_zero = 0.0;      // y_{(N-2)/2}
  bool satisfied = true;
};

/// Sufficient condition diam(A-) <= y_{(N-2)/2} for the positivity of the
/// form on A-, with the node diameter inflated by one cell diagonal.
DiameterCriterion diameter_criterion(const GeometryReport& geometry, const Grid& grid);

}  // namespace nlh

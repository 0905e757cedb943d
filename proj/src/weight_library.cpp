// Copyright 2026 The nlhdual Authors
// SPDX-License-Identifier: Apache-2.0

#include "nlh/weight_library.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nlh/special_functions.hpp"

namespace nlh {
namespace {

double distance(const std::array<double, kMaxDim>& a, const std::array<double, kMaxDim>& b, int dim) {
  double s = 0.0;
  for (int d = 0; d < dim; ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return std::sqrt(s);
}

void require_inside(const std::array<double, kMaxDim>& c, double r, const Grid& grid, const char* what) {
  const double half = 0.5 * grid.half_extent();
  for (int d = 0; d < grid.dim(); ++d) {
    if (c[d] - r < -half || c[d] + r > half) {
      throw WeightSpecError(std::string(what) + " does not fit inside [-L/2, L/2)^N");
    }
  }
}

double taper(double s, Profile profile) {
  // s in [0, 1): normalized distance to the center of the profile.
  if (profile == Profile::sharp) return 1.0;
  const double t = 1.0 - s * s;
  return t * t * t * t;
}

ScalarField realize_two_balls(const TwoBalls& spec, const Grid& grid) {
  const int dim = grid.dim();
  if (!(spec.plus_radius > 0.0) || !(spec.plus_amplitude > 0.0)) {
    throw WeightSpecError("two_balls: positive ball needs radius > 0 and amplitude > 0");
  }
  if (spec.minus_amplitude < 0.0 || spec.minus_radius < 0.0) {
    throw WeightSpecError("two_balls: negative ball amplitude and radius must be >= 0");
  }
  const bool has_minus = spec.minus_amplitude > 0.0 && spec.minus_radius > 0.0;
  require_inside(spec.plus_center, spec.plus_radius, grid, "two_balls: positive ball");
  if (has_minus) {
    require_inside(spec.minus_center, spec.minus_radius, grid, "two_balls: negative ball");
    if (distance(spec.plus_center, spec.minus_center, dim) < spec.plus_radius + spec.minus_radius) {
      throw WeightSpecError("two_balls: balls overlap");
    }
  }
  ScalarField q(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto x = grid.position(i);
    const double dp = distance(x, spec.plus_center, dim);
    if (dp < spec.plus_radius) {
      q[i] = spec.plus_amplitude * taper(dp / spec.plus_radius, spec.profile);
      continue;
    }
    if (has_minus) {
      const double dm = distance(x, spec.minus_center, dim);
      if (dm < spec.minus_radius) q[i] = -spec.minus_amplitude * taper(dm / spec.minus_radius, spec.profile);
    }
  }
  return q;
}

ScalarField realize_ball_ring(const BallRing& spec, const Grid& grid) {
  if (!(spec.ball_radius > 0.0) || !(spec.ring_inner >= spec.ball_radius) || !(spec.ring_outer > spec.ring_inner)) {
    throw WeightSpecError("ball_ring: need 0 < ball_radius <= ring_inner < ring_outer");
  }
  require_inside(spec.center, spec.ring_outer, grid, "ball_ring: ring");
  const double mid = 0.5 * (spec.ring_inner + spec.ring_outer);
  const double half_width = 0.5 * (spec.ring_outer - spec.ring_inner);
  ScalarField q(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double d = distance(grid.position(i), spec.center, grid.dim());
    if (d < spec.ball_radius) {
      q[i] = spec.ball_amplitude * taper(d / spec.ball_radius, spec.profile);
    } else if (d > spec.ring_inner && d < spec.ring_outer) {
      q[i] = spec.ring_amplitude * taper(std::fabs(d - mid) / half_width, spec.profile);
    }
  }
  return q;
}

ScalarField realize_from_file(const FromFile& spec, const Grid& grid) {
  ScalarField q = read_nlhf(spec.path);
  if (!(q.grid() == grid)) throw WeightSpecError("from_file: grid in " + spec.path.string() + " differs from run grid");
  const double half = 0.5 * grid.half_extent();
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] == 0.0) continue;
    const auto x = grid.position(i);
    for (int d = 0; d < grid.dim(); ++d) {
      if (x[d] < -half || x[d] >= half) {
        throw WeightSpecError("from_file: weight is not supported inside [-L/2, L/2)^N");
      }
    }
  }
  return q;
}

}  // namespace

ScalarField realize(const WeightSpec& spec, const Grid& grid) {
  return std::visit(
      [&](const auto& s) -> ScalarField {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, TwoBalls>) return realize_two_balls(s, grid);
        else if constexpr (std::is_same_v<T, BallRing>) return realize_ball_ring(s, grid);
        else return realize_from_file(s, grid);
      },
      spec);
}

GeometryReport geometry_report(const ScalarField& q) {
  constexpr std::size_t kBruteForceCells = 20000;
  constexpr double kBruteForcePairs = 4e8;
  const Grid& grid = q.grid();
  const int dim = grid.dim();
  const auto masks = mask_from_weight(q);
  const auto minus = masks.aminus.indices();
  const auto plus = masks.aplus.indices();
  GeometryReport rep;
  rep.aplus_cells = plus.size();
  rep.aminus_cells = minus.size();

  std::vector<std::array<double, kMaxDim>> xm(minus.size()), xp(plus.size());
  for (std::size_t a = 0; a < minus.size(); ++a) xm[a] = grid.position(minus[a]);
  for (std::size_t a = 0; a < plus.size(); ++a) xp[a] = grid.position(plus[a]);

  auto bbox = [dim](const std::vector<std::array<double, kMaxDim>>& pts) {
    std::array<double, kMaxDim> lo, hi;
    lo.fill(std::numeric_limits<double>::infinity());
    hi.fill(-std::numeric_limits<double>::infinity());
    for (const auto& x : pts) {
      for (int d = 0; d < dim; ++d) {
        lo[d] = std::min(lo[d], x[d]);
        hi[d] = std::max(hi[d], x[d]);
      }
    }
    return std::pair{lo, hi};
  };

  if (minus.size() <= kBruteForceCells) {
    double best = 0.0;
    for (std::size_t a = 0; a < xm.size(); ++a) {
      for (std::size_t b = a + 1; b < xm.size(); ++b) best = std::max(best, distance(xm[a], xm[b], dim));
    }
    rep.diam_aminus = best;
  } else {
    const auto [lo, hi] = bbox(xm);
    rep.diam_aminus = distance(lo, hi, dim);
    rep.diam_exact = false;
  }

  if (minus.empty() || plus.empty()) {
    rep.dist_apm = std::numeric_limits<double>::infinity();
  } else if (static_cast<double>(minus.size()) * static_cast<double>(plus.size()) <= kBruteForcePairs) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& a : xp) {
      for (const auto& b : xm) best = std::min(best, distance(a, b, dim));
    }
    rep.dist_apm = best;
  } else {
    const auto [plo, phi] = bbox(xp);
    const auto [mlo, mhi] = bbox(xm);
    double s = 0.0;
    for (int d = 0; d < dim; ++d) {
      const double gap = std::max({0.0, mlo[d] - phi[d], plo[d] - mhi[d]});
      s += gap * gap;
    }
    rep.dist_apm = std::sqrt(s);
    rep.dist_exact = false;
  }
  return rep;
}

DiameterCriterion diameter_criterion(const GeometryReport& geometry, const Grid& grid) {
  DiameterCriterion c;
  c.first_zero = first_positive_zero_y(BesselOrder::for_dimension(grid.dim()));
  if (geometry.aminus_cells == 0) {
    c.diameter_bound = 0.0;
    c.satisfied = true;
    return c;
  }
  c.diameter_bound = geometry.diam_aminus + grid.spacing() * std::sqrt(static_cast<double>(grid.dim()));
  c.satisfied = c.diameter_bound <= c.first_zero;
  return c;
}

}  // namespace nlh

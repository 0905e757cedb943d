// Copyright 2026 The nlhdual Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlh/birman_schwinger.hpp"
#include "nlh/dual_functional.hpp"

namespace nlh {

/// Discrete path from 0 to the far endpoint in L^{p'}(A+).
struct MpPath {
  std::vector<ScalarField> nodes;
  std::vector<double> values;  // reduced functional at each node
  /// The last segment runs through the region where the functional is
  /// already <= 0; it is kept out of the arclength redistribution so the
  /// nodes resolve the ridge instead of the far tail.
  bool far_tail = false;
};

struct MpOptions {
  int nodes = 17;
  /// Stopping threshold on the scaled gradient
  /// ||G||_p / (lambda^{1-p'} ||phi||_{p'}^{p'-1}).
  double tol_mp = 1e-7;
  int max_iters = 5000;
  int restarts = 5;
  std::uint64_t seed = 0;
  /// <= 0 selects the default relative inner tolerance.
  double tol_inner = 0.0;
  int redistribute_every = 10;
  /// Fraction of the max-node step applied to its two neighbors.
  double neighbor_fraction = 0.2;
  double armijo_c = 1e-4;
  /// Iterations without a relative drop of the path maximum by more than
  /// stagnation_drop before a restart.
  int stagnation_window = 200;
  double stagnation_drop = 1e-10;
  /// Newton refinement of the coupled system, attempted once the scaled
  /// gradient at the max node falls below polish_threshold. Needs the dense
  /// representation of K.
  bool newton_polish = true;
  double polish_threshold = 1e-1;
  int polish_every = 25;
};

struct MpResult {
  double lambda = 0.0;
  ScalarField phi_star;
  ScalarField psi_star;     // Z(phi_star)
  double level = 0.0;       // reduced functional at phi_star
  double grad_norm = 0.0;   // scaled gradient norm at phi_star
  double grad_norm_raw = 0.0;
  int iterations = 0;
  int restarts_used = 0;
  bool converged = false;
  bool polished = false;    // the final iterate came from the Newton refinement
  double path_max = 0.0;    // maximum over the final path
  int path_max_increases = 0;
  std::string message;
  MpPath path;
};

/// Thrown when the far endpoint cannot be certified on this grid.
class EndpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// lambda^{1-p'} ||phi||^{p'-1}, the norm of the lambda term of the gradient.
double gradient_scale(const ScalarField& phi, double lambda, double p_conj);

/// Radius (lambda^{p'-1} alpha)^{1/(p'-2)} of the sphere on which the reduced
/// functional is bounded below by sphere_infimum_bound.
double sphere_radius(const MethodConstants& consts, double lambda);

/// alpha (1/p' - 1/2) (lambda^{p'-1} alpha)^{2/(p'-2)}.
double sphere_infimum_bound(const MethodConstants& consts, double lambda);

/// Far endpoint radius (alpha / (2 beta^p))^{1/(p-2)} used when beta > 0.
double endpoint_radius(const MethodConstants& consts);

/// v2 with reduced value <= 1e-8 and norm above sphere_radius. Uses the
/// closed-form radius when beta > 1e-12 and it verifies, otherwise doubles
/// t from 1 along t phi0.
ScalarField make_endpoint(const MethodConstants& consts, double lambda, const WeightedOperator& op,
                          double tol_inner = 0.0);

/// Path deformation towards a mountain-pass critical point. An optional
/// initial path replaces the straight segment from 0 to make_endpoint.
MpResult find_critical_point(double lambda, const MethodConstants& consts, const WeightedOperator& op,
                             const MpOptions& options = {}, const std::optional<MpPath>& initial_path = std::nullopt);

struct SweepOptions {
  MpOptions mp;
  /// Start each lambda from the previous converged path (sequential only).
  bool warm_start = true;
  /// Workers > 1 run lambdas in parallel and imply warm_start = false.
  int workers = 1;
};

/// find_critical_point for each lambda in ascending order. A failing lambda
/// is recorded with converged = false and a message; the sweep continues.
/// The i-th lambda uses seed mix_seed(seed, i) regardless of worker count.
std::vector<MpResult> lambda_sweep(const std::vector<double>& lambdas, const MethodConstants& consts,
                                   const WeightedOperator& op, const SweepOptions& options = {});

}  // namespace nlh

// Copyright 2026 The nlhdual Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <stdexcept>

#include "nlh/birman_schwinger.hpp"
#include "nlh/grid_field.hpp"

namespace nlh {

/// Dual state: phi lives on A+, psi on A-.
struct DualPair {
  ScalarField phi;
  ScalarField psi;
};

/// J(phi, psi) = lambda^{1-p'}/p' ||phi||^{p'} - 1/p' ||psi||^{p'}
///               - 1/2 <phi - psi, K (phi - psi)>.
double eval_J(const ScalarField& phi, const ScalarField& psi, double lambda, const WeightedOperator& op);

/// lambda^{1-p'} |phi|^{p'-2} phi - 1_{A+} K (phi - psi).
ScalarField grad_phi(const ScalarField& phi, const ScalarField& psi, double lambda, const WeightedOperator& op);

/// -|psi|^{p'-2} psi + 1_{A-} K (phi - psi). Independent of lambda; the
/// argument is kept for symmetry with grad_phi.
ScalarField grad_psi(const ScalarField& phi, const ScalarField& psi, double lambda, const WeightedOperator& op);

/// The inner maximization detected unbounded ascent, which happens only
/// when the form <psi, K psi> is not positive semidefinite on A-.
class PositivityViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InnerSolveOptions {
  /// Stopping threshold on ||grad_psi||_p; <= 0 selects
  /// 1e-9 max(1, ||phi||_{p'}^{p'-1}).
  double tol = 0.0;
  int max_iters = 10000;
  double initial_damping = 0.5;
  /// Optional starting point, used only if it is not worse than psi = 0.
  std::optional<ScalarField> warm_start;
};

struct InnerSolveReport {
  int iterations = 0;
  double optimality_residual = 0.0;  // ||grad_psi||_p at the returned psi
  double objective = 0.0;            // J(phi, psi) without the lambda term
  double tolerance = 0.0;
  bool converged = false;
};

struct InnerSolution {
  ScalarField psi;
  InnerSolveReport report;
};

double default_inner_tolerance(const ScalarField& phi, const WeightedOperator& op);

/// Maximizer Z(phi) of the strictly concave map psi -> J(phi, psi).
/// Newton iteration in t = |psi|^{p'-2} psi, where the optimality condition
/// reads t + B J_p(t) = 1_{A-} K phi with B the A- block of K. Steps are
/// backtracked on the objective; the damped fixed point
/// psi <- (1 - tau) psi + tau dual_map(1_{A-} K (phi - psi), p) takes over
/// when Newton does not make progress or no dense block is available.
/// Throws PositivityViolation when the Newton Hessian is not positive
/// definite or the iterates leave the a-priori ball
/// ||psi||^{p'-1} <= p' ||1_{A-} K phi||_p. Both only happen without positivity.
InnerSolution solve_Z(const ScalarField& phi, const WeightedOperator& op, const InnerSolveOptions& options = {});

struct ReducedEvaluation {
  double value = 0.0;   // reduced functional at phi
  ScalarField z;        // Z(phi)
  ScalarField gradient; // grad_phi(phi, Z(phi))
  InnerSolveReport inner;
};

/// Value, maximizer and gradient of the reduced functional sup_psi J(phi, psi)
/// with a single inner solve.
ReducedEvaluation evaluate_reduced(const ScalarField& phi, double lambda, const WeightedOperator& op,
                                   const InnerSolveOptions& options = {});

struct ReducedValue {
  double value = 0.0;
  ScalarField z;
};

ReducedValue eval_reduced(const ScalarField& phi, double lambda, const WeightedOperator& op,
                          const InnerSolveOptions& options = {});

ScalarField grad_reduced(const ScalarField& phi, double lambda, const WeightedOperator& op,
                         const InnerSolveOptions& options = {});

}  // namespace nlh

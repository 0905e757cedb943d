// Copyright 2026 The nlhdual Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "nlh/grid_field.hpp"
#include "nlh/resolvent.hpp"

namespace nlh {

struct WeightedOperatorOptions {
  /// Supports of at most this many cells keep an explicit matrix of K on
  /// supp Q and apply it directly; larger supports go through the FFT.
  std::size_t dense_limit = 4096;
};

/// Birman-Schwinger operator K f = |Q|^{1/p} R(|Q|^{1/p} f) together with
/// the sign masks A+ = {Q > 0}, A- = {Q < 0}.
///
/// p = 2 is accepted as a diagnostic exponent (linear eigenvalue problems);
/// the nonlinear machinery requires p > 2.
class WeightedOperator {
 public:
  WeightedOperator(ResolventOperator resolvent, const ScalarField& q, double p,
                   WeightedOperatorOptions options = {});

  const Grid& grid() const { return resolvent_.grid(); }
  const ResolventOperator& resolvent() const { return resolvent_; }
  const ScalarField& weight() const { return q_; }
  const ScalarField& weight_root() const { return root_; }
  const SupportMask& aplus() const { return aplus_; }
  const SupportMask& aminus() const { return aminus_; }
  double p() const { return p_; }
  double p_conj() const { return p_conj_; }

  /// Indices of supp Q = A+ u A-, ascending.
  const std::vector<std::size_t>& support() const { return support_; }
  bool has_dense() const { return dense_ != nullptr; }
  /// Matrix of K on support(): entry (a, b) = h^N w_a w_b Psi_h(x_a - x_b).
  const Eigen::MatrixXd& dense() const;

  /// K f, dense route when available.
  ScalarField apply(const ScalarField& f) const;
  /// K f through the FFT resolvent regardless of the dense matrix.
  ScalarField apply_fft(const ScalarField& f) const;

  /// Explicit matrix of K on the A- cells (ascending flat indices), kept when
  /// A- has at most dense_limit cells.
  bool has_negative_block() const { return negative_block_ != nullptr; }
  const Eigen::MatrixXd& negative_block() const;
  const std::vector<std::size_t>& negative_cells() const { return negative_cells_; }

  /// Matrix of K between the cells of two masks, built from kernel samples.
  /// Its eigen/singular values are those of K in the L^2 quadrature pairing.
  Eigen::MatrixXd block(const SupportMask& rows, const SupportMask& cols) const;

 private:
  ResolventOperator resolvent_;
  ScalarField q_;
  ScalarField root_;
  SupportMask aplus_;
  SupportMask aminus_;
  double p_;
  double p_conj_;
  std::vector<std::size_t> support_;
  std::shared_ptr<const Eigen::MatrixXd> dense_;
  std::vector<std::size_t> negative_cells_;
  std::shared_ptr<const Eigen::MatrixXd> negative_block_;
};

inline ScalarField apply_K(const WeightedOperator& op, const ScalarField& f) { return op.apply(f); }

struct PowerIterationOptions {
  int seeds = 8;
  int max_iters = 10000;
  double rel_tol = 1e-10;
  std::uint64_t seed = 0;
};

struct AlphaResult {
  double alpha = 0.0;
  ScalarField phi0;       // unit L^{p'} norm, supported in A+
  int best_seed = -1;
  int iterations = 0;     // of the best seed
  bool converged = false; // every seed converged
  /// Accepted steps whose Rayleigh value dropped by more than 1e-12 |rho|.
  int monotonicity_violations = 0;
  /// Steps that needed a positive shift to stay monotone.
  int shifted_steps = 0;
};

struct BetaResult {
  double beta = 0.0;
  ScalarField psi_star;   // unit L^{p'} norm on A-
  ScalarField phi_star;   // unit L^{p'} norm on A+, the optimal partner
  int best_seed = -1;
  int iterations = 0;
  bool converged = true;
  int monotonicity_violations = 0;
};

/// alpha = max { <phi, K phi> : ||phi||_{p'} = 1, supp phi in A+ }.
///
/// Generalized power iteration phi <- normalize(dual_map(1_{A+}(K phi + s J phi), p))
/// with J the p'-duality map. The shift s starts at 0 and is raised only when a
/// step would lower the Rayleigh value, so accepted values never decrease.
AlphaResult compute_alpha(const WeightedOperator& op, const PowerIterationOptions& options = {});

/// beta = max { <phi, K psi> } over unit phi on A+, psi on A-, computed as
/// max ||1_{A+} K psi||_p over unit psi (the phi-maximization is explicit).
BetaResult compute_beta(const WeightedOperator& op, const PowerIterationOptions& options = {});

/// (2 beta / alpha)^p; throws std::domain_error for alpha <= 0.
double lambda0(double alpha, double beta, double p);

struct MethodConstants {
  double p = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double lambda0 = 0.0;
  ScalarField phi0;
};

MethodConstants compute_constants(const WeightedOperator& op, const PowerIterationOptions& options = {});

struct PositivityReport {
  double min_eigenvalue = 0.0;
  double scale = 0.0;     // spectral radius of the A- block
  bool pass = true;
  bool converged = true;
  std::string method;     // "empty", "dense" or "lanczos"
  std::size_t cells = 0;
  ScalarField eigenvector;  // L^2-normalized, on A-
};

struct PositivityOptions {
  std::size_t dense_cells = 4096;
  int lanczos_steps = 300;
  double rel_tol = 1e-10;
};

/// Smallest eigenvalue of the quadratic form psi -> <psi, K psi> on A-.
/// Passes iff min_eigenvalue >= -rel_tol * scale.
PositivityReport check_negative_positivity(const WeightedOperator& op, const PositivityOptions& options = {});

}  // namespace nlh

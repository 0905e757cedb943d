// Copyright 2026 The nlhdual Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "nlh/birman_schwinger.hpp"
#include "nlh/grid_field.hpp"

namespace nlh {

/// u = R(|Q|^{1/p} (phi - psi)).
ScalarField build_u(const ScalarField& phi, const ScalarField& psi, const WeightedOperator& op);

/// Q_lambda = lambda Q_+ - Q_-.
ScalarField lambda_weight(double lambda, const WeightedOperator& op);

/// ||u - R(Q_lambda |u|^{p-2} u)||_p / max(||u||_p, 1e-300).
double residual_integral(const ScalarField& u, double lambda, const WeightedOperator& op);

/// ||(-Delta_h - k^2) u - Q_lambda |u|^{p-2} u||_2 / ||u||_2 over the nodes
/// in the interior window [-3L/4, 3L/4)^N, k = 1. Zero for u = 0.
double residual_pde(const ScalarField& u, double lambda, const WeightedOperator& op);

/// Same residual for an arbitrary wavenumber and weight on u's own grid:
/// ||(-Delta_h - k^2) u - q |u|^{p-2} u||_2 / ||u||_2 on the interior window.
double helmholtz_residual(const ScalarField& u, const ScalarField& q, double k, double p,
                          double window_fraction = 0.75);

/// L^p mismatch of Q_lambda |u|^{p-2} u = |Q|^{1/p} (phi - psi) on supp Q.
double chain_identity_mismatch(const ScalarField& u, const ScalarField& phi, const ScalarField& psi, double lambda,
                               const WeightedOperator& op);

/// v(x) = k^{2/(p-2)} u(k x). The grid is scaled by 1/k, so the samples are
/// those of u multiplied by k^{2/(p-2)} and no interpolation is needed. If u
/// solves -Delta u - u = Q |u|^{p-2} u, v solves -Delta v - k^2 v = Q(k x) |v|^{p-2} v.
ScalarField rescale_to_k(const ScalarField& u, double k, double p);

/// Weight q sampled on the grid of rescale_to_k: values of q at k x.
ScalarField rescale_weight(const ScalarField& q, double k);

struct SolutionRecord {
  double lambda = 0.0;
  bool converged = false;
  double level = 0.0;
  double phi_norm = 0.0;  // ||phi||_{p'}
  double psi_norm = 0.0;  // ||psi||_{p'}
  double u_norm_p = 0.0;
  double residual_integral = 0.0;
  double residual_pde = 0.0;
  double chain_mismatch = 0.0;
  int iterations = 0;
  int restarts = 0;
  ScalarField u;
  ScalarField phi;
  ScalarField psi;
};

/// Reconstruction of u and all residual diagnostics for one dual pair.
SolutionRecord make_record(double lambda, const ScalarField& phi, const ScalarField& psi, const WeightedOperator& op);

}  // namespace nlh

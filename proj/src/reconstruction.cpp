// Copyright 2026 The nlhdual Authors
// SPDX-License-Identifier: Apache-2.0

#include "nlh/reconstruction.hpp"

#include <cmath>
#include <stdexcept>

namespace nlh {
namespace {

constexpr double kTiny = 1e-300;

ScalarField nonlinearity(const ScalarField& q, const ScalarField& u, double p) {
  ScalarField out = dual_map(u, p);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= q[i];
  return out;
}

}  // namespace

ScalarField build_u(const ScalarField& phi, const ScalarField& psi, const WeightedOperator& op) {
  if (!(phi.grid() == op.grid()) || !(psi.grid() == op.grid())) {
    throw GridMismatch("build_u: fields must live on the operator grid");
  }
  return op.resolvent().apply(hadamard(op.weight_root(), phi - psi));
}

ScalarField lambda_weight(double lambda, const WeightedOperator& op) {
  ScalarField q = op.weight();
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] > 0.0) q[i] *= lambda;
  }
  return q;
}

double residual_integral(const ScalarField& u, double lambda, const WeightedOperator& op) {
  const double p = op.p();
  const ScalarField ql = lambda_weight(lambda, op);
  const ScalarField r = u - op.resolvent().apply(nonlinearity(ql, u, p));
  return lp_norm(r, p) / std::max(lp_norm(u, p), kTiny);
}

double helmholtz_residual(const ScalarField& u, const ScalarField& q, double k, double p, double window_fraction) {
  if (!(u.grid() == q.grid())) throw GridMismatch("helmholtz_residual: u and q grids differ");
  const ScalarField lap = discrete_laplacian(u);
  const ScalarField f = nonlinearity(q, u, p);
  const SupportMask window = interior_window(u.grid(), window_fraction);
  ScalarField r(u.grid());
  for (std::size_t i = 0; i < u.size(); ++i) r[i] = -lap[i] - k * k * u[i] - f[i];
  const double un = lp_norm(restrict_to(u, window), 2.0);
  if (!(un > kTiny)) return 0.0;
  return lp_norm(restrict_to(r, window), 2.0) / un;
}

double residual_pde(const ScalarField& u, double lambda, const WeightedOperator& op) {
  return helmholtz_residual(u, lambda_weight(lambda, op), 1.0, op.p());
}

double chain_identity_mismatch(const ScalarField& u, const ScalarField& phi, const ScalarField& psi, double lambda,
                               const WeightedOperator& op) {
  const ScalarField lhs = nonlinearity(lambda_weight(lambda, op), u, op.p());
  const ScalarField rhs = hadamard(op.weight_root(), phi - psi);
  SupportMask supp(op.grid());
  for (auto i : op.support()) supp.set(i, true);
  return lp_norm(restrict_to(lhs - rhs, supp), op.p());
}

ScalarField rescale_to_k(const ScalarField& u, double k, double p) {
  if (!(k > 0.0)) throw std::domain_error("rescale_to_k: k must be positive");
  const Grid& g = u.grid();
  Grid scaled(g.dim(), g.points(), g.half_extent() / k);
  const double factor = std::pow(k, 2.0 / (p - 2.0));
  std::vector<double> v(u.values().begin(), u.values().end());
  for (double& x : v) x *= factor;
  return ScalarField(scaled, std::move(v));
}

ScalarField rescale_weight(const ScalarField& q, double k) {
  if (!(k > 0.0)) throw std::domain_error("rescale_weight: k must be positive");
  const Grid& g = q.grid();
  Grid scaled(g.dim(), g.points(), g.half_extent() / k);
  return ScalarField(scaled, std::vector<double>(q.values().begin(), q.values().end()));
}

SolutionRecord make_record(double lambda, const ScalarField& phi, const ScalarField& psi, const WeightedOperator& op) {
  SolutionRecord rec;
  rec.lambda = lambda;
  rec.phi = phi;
  rec.psi = psi;
  rec.u = build_u(phi, psi, op);
  rec.phi_norm = lp_norm(phi, op.p_conj());
  rec.psi_norm = lp_norm(psi, op.p_conj());
  rec.u_norm_p = lp_norm(rec.u, op.p());
  rec.residual_integral = residual_integral(rec.u, lambda, op);
  rec.residual_pde = residual_pde(rec.u, lambda, op);
  rec.chain_mismatch = chain_identity_mismatch(rec.u, phi, psi, lambda, op);
  return rec;
}

}  // namespace nlh

// Copyright 2026 The nlhdual Authors
// SPDX-License-Identifier: Apache-2.0

#include "nlh/dual_functional.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>

namespace nlh {
namespace {

void require_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::domain_error("dual functional: lambda must be positive");
}

double power_norm(const ScalarField& f, double q) {
  const double n = lp_norm(f, q);
  return std::pow(n, q);
}

// Inner objective relative to psi = 0:
//   J(phi, psi) - J(phi, 0) = <psi, K phi> - 1/2 <psi, K psi> - 1/p' ||psi||^{p'},
// evaluated without the phi-only constant so its roundoff scales with psi.
double inner_gain(const ScalarField& psi, const ScalarField& kphi, const ScalarField& kpsi, double pc) {
  const double hn = psi.grid().cell_volume();
  long double acc = 0.0L;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    if (psi[i] != 0.0) acc += static_cast<long double>(psi[i]) * (kphi[i] - 0.5 * kpsi[i]);
  }
  return hn * static_cast<double>(acc) - power_norm(psi, pc) / pc;
}

}  // namespace

double eval_J(const ScalarField& phi, const ScalarField& psi, double lambda, const WeightedOperator& op) {
  require_lambda(lambda);
  const double pc = op.p_conj();
  const ScalarField d = phi - psi;
  const ScalarField kd = op.apply(d);
  return std::pow(lambda, 1.0 - pc) / pc * power_norm(phi, pc) - power_norm(psi, pc) / pc - 0.5 * inner(d, kd);
}

ScalarField grad_phi(const ScalarField& phi, const ScalarField& psi, double lambda, const WeightedOperator& op) {
  require_lambda(lambda);
  const double pc = op.p_conj();
  ScalarField g = std::pow(lambda, 1.0 - pc) * dual_map(phi, pc);
  g -= restrict_to(op.apply(phi - psi), op.aplus());
  return g;
}

ScalarField grad_psi(const ScalarField& phi, const ScalarField& psi, double lambda, const WeightedOperator& op) {
  require_lambda(lambda);
  ScalarField g = restrict_to(op.apply(phi - psi), op.aminus());
  g -= dual_map(psi, op.p_conj());
  return g;
}

double default_inner_tolerance(const ScalarField& phi, const WeightedOperator& op) {
  const double pc = op.p_conj();
  return 1e-9 * std::max(1.0, std::pow(lp_norm(phi, pc), pc - 1.0));
}

InnerSolution solve_Z(const ScalarField& phi, const WeightedOperator& op, const InnerSolveOptions& options) {
  const double p = op.p(), pc = op.p_conj();
  const Grid& grid = op.grid();
  if (!(phi.grid() == grid)) throw GridMismatch("solve_Z: phi grid differs from operator grid");
  InnerSolution out{ScalarField(grid), {}};
  auto& rep = out.report;
  rep.tolerance = options.tol > 0.0 ? options.tol : default_inner_tolerance(phi, op);

  const ScalarField kphi = op.apply(phi);
  const double base = -0.5 * inner(phi, kphi);  // J(phi, 0) without the lambda term
  if (op.aminus().empty()) {
    rep.objective = base;
    rep.converged = true;
    return out;
  }
  const ScalarField g0 = restrict_to(kphi, op.aminus());
  // A-priori bound for iterates that are at least as good as psi = 0.
  const double radius_bound = 2.0 * pc * lp_norm(g0, p);

  ScalarField psi(grid);
  ScalarField kpsi(grid);
  double h = 0.0;
  if (options.warm_start) {
    if (!(options.warm_start->grid() == grid)) throw GridMismatch("solve_Z: warm start grid differs");
    ScalarField w = restrict_to(*options.warm_start, op.aminus());
    ScalarField kw = op.apply(w);
    const double hw = inner_gain(w, kphi, kw, pc);
    if (hw >= h) {
      psi = std::move(w);
      kpsi = std::move(kw);
      h = hw;
    }
  }

  constexpr int kRefreshEvery = 100;
  const double slack = 4.0 * std::numeric_limits<double>::epsilon();
  const bool newton = op.has_negative_block();
  const auto& cells = op.negative_cells();
  const auto n = static_cast<Eigen::Index>(cells.size());
  for (int it = 0;; ++it) {
    ScalarField g = restrict_to(kphi - kpsi, op.aminus());
    ScalarField grad = g - dual_map(psi, pc);
    rep.optimality_residual = lp_norm(grad, p);
    rep.iterations = it;
    if (rep.optimality_residual <= rep.tolerance) {
      rep.converged = true;
      break;
    }
    if (it >= options.max_iters) break;

    bool accepted = false;
    if (newton) {
      // Newton step for F(t) = g(psi(t)) - t in t = |psi|^{p'-2} psi, where
      // psi(t) = |t|^{p-2} t. With the A- block B and S = diag((p-1)|t|^{p-2})^{1/2}
      // the Jacobian is -(I + B S^2), solved through the symmetric I + S B S,
      // which is positive definite exactly when the objective is locally
      // strictly concave.
      const Eigen::MatrixXd& b = op.negative_block();
      Eigen::VectorXd t(n), f(n), sd(n);
      for (Eigen::Index a = 0; a < n; ++a) {
        const std::size_t i = cells[static_cast<std::size_t>(a)];
        t[a] = psi[i] == 0.0 ? 0.0 : std::copysign(std::pow(std::fabs(psi[i]), pc - 1.0), psi[i]);
        f[a] = grad[i];
        sd[a] = std::sqrt((p - 1.0) * std::pow(std::fabs(t[a]), p - 2.0));
      }
      Eigen::MatrixXd m = sd.asDiagonal() * b * sd.asDiagonal();
      m.diagonal().array() += 1.0;
      Eigen::LLT<Eigen::MatrixXd> llt(m);
      if (llt.info() != Eigen::Success) {
        throw PositivityViolation("solve_Z: the inner objective is not concave; the form on A- is not positive");
      }
      const Eigen::VectorXd w = llt.solve(sd.cwiseProduct(f));
      const Eigen::VectorXd delta = f - b * sd.cwiseProduct(w);
      ScalarField cand(grid), kcand(grid);
      for (double s = 1.0; s >= 1.0 / 64.0 && !accepted; s *= 0.5) {
        Eigen::VectorXd cpsi(n);
        for (Eigen::Index a = 0; a < n; ++a) {
          const double ta = t[a] + s * delta[a];
          cpsi[a] = ta == 0.0 ? 0.0 : std::copysign(std::pow(std::fabs(ta), p - 1.0), ta);
        }
        const Eigen::VectorXd kc = b * cpsi;
        for (Eigen::Index a = 0; a < n; ++a) {
          const std::size_t i = cells[static_cast<std::size_t>(a)];
          cand[i] = cpsi[a];
          kcand[i] = kc[a];
        }
        const double hc = inner_gain(cand, kphi, kcand, pc);
        bool better = hc > h;
        if (!better && hc >= h - slack * std::fabs(h)) {
          // At the roundoff floor of the objective, fall back to the residual.
          const ScalarField cg = restrict_to(kphi - kcand, op.aminus()) - dual_map(cand, pc);
          better = lp_norm(cg, p) < rep.optimality_residual;
        }
        if (better) {
          psi = cand;
          kpsi = kcand;
          h = hc;
          accepted = true;
        }
      }
    }
    if (!accepted) {
      const ScalarField target = dual_map(g, p);
      const ScalarField ktarget = op.apply(target);
      double tau = options.initial_damping;
      ScalarField cand(grid), kcand(grid);
      while (tau > 1e-20) {
        for (std::size_t i = 0; i < psi.size(); ++i) {
          cand[i] = (1.0 - tau) * psi[i] + tau * target[i];
          kcand[i] = (1.0 - tau) * kpsi[i] + tau * ktarget[i];
        }
        const double hc = inner_gain(cand, kphi, kcand, pc);
        if (hc >= h - slack * std::fabs(h)) {
          h = hc;
          accepted = true;
          break;
        }
        tau *= 0.5;
      }
      if (!accepted) break;  // roundoff floor: no representable ascent left
      psi = std::move(cand);
      kpsi = std::move(kcand);
    }
    if ((it + 1) % kRefreshEvery == 0) {
      kpsi = op.apply(psi);
      h = inner_gain(psi, kphi, kpsi, pc);
    }
    if (std::pow(lp_norm(psi, pc), pc - 1.0) > radius_bound * (1.0 + 1e-8) + 1e-300) {
      throw PositivityViolation("solve_Z: inner iterates grow without bound; the form on A- is not positive");
    }
  }
  rep.objective = base + h;
  out.psi = std::move(psi);
  return out;
}

ReducedEvaluation evaluate_reduced(const ScalarField& phi, double lambda, const WeightedOperator& op,
                                   const InnerSolveOptions& options) {
  require_lambda(lambda);
  const double pc = op.p_conj();
  InnerSolution inner_sol = solve_Z(phi, op, options);
  ReducedEvaluation ev;
  const ScalarField d = phi - inner_sol.psi;
  const ScalarField kd = op.apply(d);
  const double scale = std::pow(lambda, 1.0 - pc);
  ev.value = scale / pc * power_norm(phi, pc) - power_norm(inner_sol.psi, pc) / pc - 0.5 * inner(d, kd);
  ev.gradient = scale * dual_map(phi, pc);
  ev.gradient -= restrict_to(kd, op.aplus());
  ev.z = std::move(inner_sol.psi);
  ev.inner = inner_sol.report;
  return ev;
}

ReducedValue eval_reduced(const ScalarField& phi, double lambda, const WeightedOperator& op,
                          const InnerSolveOptions& options) {
  ReducedEvaluation ev = evaluate_reduced(phi, lambda, op, options);
  return {ev.value, std::move(ev.z)};
}

ScalarField grad_reduced(const ScalarField& phi, double lambda, const WeightedOperator& op,
                         const InnerSolveOptions& options) {
  return evaluate_reduced(phi, lambda, op, options).gradient;
}

}  // namespace nlh

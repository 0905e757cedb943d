// Copyright 2026 The nlhdual Authors
// SPDX-License-Identifier: Apache-2.0

#include "nlh/birman_schwinger.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nlh/random.hpp"

namespace nlh {

WeightedOperator::WeightedOperator(ResolventOperator resolvent, const ScalarField& q, double p,
                                   WeightedOperatorOptions options)
    : resolvent_(std::move(resolvent)),
      q_(q),
      root_(q.grid()),
      aplus_(q.grid()),
      aminus_(q.grid()),
      p_(p),
      p_conj_(0.0) {
  if (!(q.grid() == resolvent_.grid())) throw GridMismatch("WeightedOperator: weight grid differs from resolvent grid");
  if (!(p >= 2.0) || !std::isfinite(p)) throw std::domain_error("WeightedOperator: exponent must satisfy p >= 2");
  if (!q.all_finite()) throw std::invalid_argument("WeightedOperator: weight has non-finite values");
  p_conj_ = conjugate_exponent(p);
  auto masks = mask_from_weight(q);
  aplus_ = std::move(masks.aplus);
  aminus_ = std::move(masks.aminus);
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] != 0.0) {
      root_[i] = std::pow(std::fabs(q[i]), 1.0 / p);
      support_.push_back(i);
    }
  }
  if (support_.size() <= options.dense_limit) {
    SupportMask supp(q.grid());
    for (auto i : support_) supp.set(i, true);
    dense_ = std::make_shared<const Eigen::MatrixXd>(block(supp, supp));
  }
  negative_cells_ = aminus_.indices();
  if (!negative_cells_.empty() && negative_cells_.size() <= options.dense_limit) {
    negative_block_ = std::make_shared<const Eigen::MatrixXd>(block(aminus_, aminus_));
  }
}

const Eigen::MatrixXd& WeightedOperator::negative_block() const {
  if (!negative_block_) throw std::logic_error("WeightedOperator: no explicit A- block for this support size");
  return *negative_block_;
}

const Eigen::MatrixXd& WeightedOperator::dense() const {
  if (!dense_) throw std::logic_error("WeightedOperator: no dense representation for this support size");
  return *dense_;
}

Eigen::MatrixXd WeightedOperator::block(const SupportMask& rows, const SupportMask& cols) const {
  const auto ri = rows.indices();
  const auto ci = cols.indices();
  const Grid& g = grid();
  std::vector<std::array<int, kMaxDim>> rpos(ri.size()), cpos(ci.size());
  for (std::size_t a = 0; a < ri.size(); ++a) rpos[a] = g.multi_index(ri[a]);
  for (std::size_t b = 0; b < ci.size(); ++b) cpos[b] = g.multi_index(ci[b]);
  Eigen::MatrixXd out(ri.size(), ci.size());
  const double hn = g.cell_volume();
  for (std::size_t a = 0; a < ri.size(); ++a) {
    for (std::size_t b = 0; b < ci.size(); ++b) {
      std::array<int, kMaxDim> off{};
      for (int d = 0; d < g.dim(); ++d) off[d] = rpos[a][d] - cpos[b][d];
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          hn * root_[ri[a]] * root_[ci[b]] * resolvent_.kernel_at_offset(off);
    }
  }
  return out;
}

ScalarField WeightedOperator::apply(const ScalarField& f) const {
  if (!dense_) return apply_fft(f);
  if (!(f.grid() == grid())) throw GridMismatch("apply_K: field grid differs from operator grid");
  const auto n = static_cast<Eigen::Index>(support_.size());
  Eigen::VectorXd x(n);
  for (Eigen::Index a = 0; a < n; ++a) x[a] = f[support_[a]];
  const Eigen::VectorXd y = (*dense_) * x;
  ScalarField out(grid());
  for (Eigen::Index a = 0; a < n; ++a) out[support_[a]] = y[a];
  return out;
}

ScalarField WeightedOperator::apply_fft(const ScalarField& f) const {
  if (!(f.grid() == grid())) throw GridMismatch("apply_K: field grid differs from operator grid");
  return hadamard(root_, resolvent_.apply(hadamard(root_, f)));
}

namespace {

/// Tracks value increments of a monotone iteration and decides convergence
/// from the increment plus the geometric tail it predicts. Slowly contracting
/// iterations make small steps long before they are close to the limit.
class IncrementMonitor {
 public:
  explicit IncrementMonitor(double rel_tol) : rel_tol_(rel_tol) {}
  bool converged(double increment, double value) {
    const double inc = std::fabs(increment);
    double tail = 0.0;
    if (previous_ > 0.0 && inc > 0.0) {
      const double q = inc / previous_;
      tail = q < 1.0 ? inc * q / (1.0 - q) : std::numeric_limits<double>::infinity();
    }
    previous_ = inc;
    return std::max(inc, tail) <= rel_tol_ * std::fabs(value);
  }

 private:
  double rel_tol_;
  double previous_ = 0.0;
};

struct SeedRun {
  double value = -std::numeric_limits<double>::infinity();
  ScalarField state;
  ScalarField partner;
  int iterations = 0;
  bool converged = false;
  int violations = 0;
  int shifted = 0;
};

SeedRun alpha_seed(const WeightedOperator& op, std::uint64_t seed, const PowerIterationOptions& opt) {
  const double p = op.p(), pc = op.p_conj();
  std::mt19937_64 rng(seed);
  SeedRun run{-std::numeric_limits<double>::infinity(), ScalarField(op.grid()), ScalarField(op.grid())};
  ScalarField phi = normalize(random_field(op.aplus(), rng, true), pc);
  ScalarField kphi = op.apply(phi);
  double rho = inner(phi, kphi);
  double shift = 0.0;
  IncrementMonitor monitor(opt.rel_tol);
  for (int it = 0; it < opt.max_iters; ++it) {
    ScalarField g = kphi;
    if (shift > 0.0) g.axpy(shift, dual_map(phi, pc));
    ScalarField cand = normalize(dual_map(restrict_to(g, op.aplus()), p), pc);
    ScalarField kc = op.apply(cand);
    const double rc = inner(cand, kc);
    run.iterations = it + 1;
    if (rc < rho - 1e-12 * std::fabs(rho)) {
      // A convex shift of the objective restores the ascent property.
      shift = shift == 0.0 ? std::max(std::fabs(rho), 1e-300) : 2.0 * shift;
      ++run.shifted;
      if (shift > 1e12 * std::max(std::fabs(rho), 1e-300)) break;
      continue;
    }
    const double increment = rc - rho;
    if (increment < -1e-12 * std::fabs(rho)) ++run.violations;
    phi = std::move(cand);
    kphi = std::move(kc);
    rho = rc;
    if (shift > 0.0) {
      shift *= 0.5;
      if (shift < 1e-6 * std::fabs(rho)) shift = 0.0;
    }
    if (monitor.converged(increment, rho)) {
      run.converged = true;
      break;
    }
  }
  run.value = rho;
  run.state = std::move(phi);
  return run;
}

SeedRun beta_seed(const WeightedOperator& op, std::uint64_t seed, const PowerIterationOptions& opt) {
  const double p = op.p(), pc = op.p_conj();
  std::mt19937_64 rng(seed);
  SeedRun run{0.0, ScalarField(op.grid()), ScalarField(op.grid())};
  ScalarField psi = normalize(random_field(op.aminus(), rng, true), pc);
  ScalarField g = restrict_to(op.apply(psi), op.aplus());
  double value = lp_norm(g, p);
  if (value == 0.0) {
    run.value = 0.0;
    run.state = psi;
    run.converged = true;
    return run;
  }
  IncrementMonitor monitor(opt.rel_tol);
  for (int it = 0; it < opt.max_iters; ++it) {
    const ScalarField partner = dual_map(g, p);
    ScalarField t = restrict_to(op.apply(partner), op.aminus());
    ScalarField cand = normalize(dual_map(t, p), pc);
    ScalarField gc = restrict_to(op.apply(cand), op.aplus());
    const double vc = lp_norm(gc, p);
    run.iterations = it + 1;
    const double increment = vc - value;
    if (increment < -1e-12 * value) ++run.violations;
    psi = std::move(cand);
    g = std::move(gc);
    value = vc;
    if (monitor.converged(increment, value)) {
      run.converged = true;
      break;
    }
  }
  run.value = value;
  run.state = std::move(psi);
  run.partner = normalize(dual_map(g, p), pc);
  return run;
}

// Lanczos with full reorthogonalization for the
// smallest eigenvalue of a symmetric operator given by its action.
template <class Apply>
void lanczos_smallest(Apply&& apply, Eigen::Index n, int max_steps, double rel_tol, std::uint64_t seed,
                      PositivityReport& report, Eigen::VectorXd& eigvec) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const int steps = static_cast<int>(std::min<Eigen::Index>(max_steps, n));
  Eigen::MatrixXd basis(n, steps);
  std::vector<double> diag, off;
  Eigen::VectorXd q(n);
  for (Eigen::Index i = 0; i < n; ++i) q[i] = dist(rng);
  q.normalize();
  report.converged = false;
  for (int j = 0; j < steps; ++j) {
    basis.col(j) = q;
    Eigen::VectorXd w = apply(q);
    const double a = q.dot(w);
    diag.push_back(a);
    for (int r = 0; r < 2; ++r) w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).transpose() * w);
    const double b = w.norm();
    const int m = j + 1;
    if (m % 10 == 0 || m == steps || b == 0.0) {
      Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
      for (int k = 0; k < m; ++k) t(k, k) = diag[k];
      for (int k = 0; k + 1 < m; ++k) t(k, k + 1) = t(k + 1, k) = off[k];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
      const double theta = es.eigenvalues()[0];
      const double scale = std::max(std::fabs(es.eigenvalues()[0]), std::fabs(es.eigenvalues()[m - 1]));
      const double resid = b * std::fabs(es.eigenvectors()(m - 1, 0));
      report.min_eigenvalue = theta;
      report.scale = scale;
      eigvec = basis.leftCols(m) * es.eigenvectors().col(0);
      if (resid <= rel_tol * std::max(scale, 1e-300) || b == 0.0) {
        report.converged = true;
        return;
      }
    }
    if (b == 0.0) return;
    off.push_back(b);
    q = w / b;
  }
}

}  // namespace

AlphaResult compute_alpha(const WeightedOperator& op, const PowerIterationOptions& options) {
  if (op.aplus().empty()) throw std::invalid_argument("compute_alpha: A+ is empty");
  AlphaResult best;
  best.alpha = -std::numeric_limits<double>::infinity();
  best.converged = true;
  for (int s = 0; s < options.seeds; ++s) {
    SeedRun run = alpha_seed(op, mix_seed(options.seed, static_cast<std::uint64_t>(s)), options);
    best.converged = best.converged && run.converged;
    best.monotonicity_violations += run.violations;
    best.shifted_steps += run.shifted;
    if (run.value > best.alpha) {
      best.alpha = run.value;
      best.phi0 = std::move(run.state);
      best.best_seed = s;
      best.iterations = run.iterations;
    }
  }
  return best;
}

BetaResult compute_beta(const WeightedOperator& op, const PowerIterationOptions& options) {
  BetaResult best;
  best.psi_star = ScalarField(op.grid());
  best.phi_star = ScalarField(op.grid());
  if (op.aminus().empty() || op.aplus().empty()) {
    best.beta = 0.0;
    return best;
  }
  best.beta = -1.0;
  for (int s = 0; s < options.seeds; ++s) {
    SeedRun run = beta_seed(op, mix_seed(options.seed ^ 0xbe7aULL, static_cast<std::uint64_t>(s)), options);
    best.converged = best.converged && run.converged;
    best.monotonicity_violations += run.violations;
    if (run.value > best.beta) {
      best.beta = run.value;
      best.psi_star = std::move(run.state);
      best.phi_star = std::move(run.partner);
      best.best_seed = s;
      best.iterations = run.iterations;
    }
  }
  best.beta = std::max(best.beta, 0.0);
  return best;
}

double lambda0(double alpha, double beta, double p) {
  if (!(alpha > 0.0)) throw std::domain_error("lambda0: alpha must be positive");
  return std::pow(2.0 * beta / alpha, p);
}

MethodConstants compute_constants(const WeightedOperator& op, const PowerIterationOptions& options) {
  MethodConstants c;
  c.p = op.p();
  const AlphaResult a = compute_alpha(op, options);
  const BetaResult b = compute_beta(op, options);
  c.alpha = a.alpha;
  c.beta = b.beta;
  c.phi0 = a.phi0;
  c.lambda0 = lambda0(c.alpha, c.beta, c.p);
  return c;
}

PositivityReport check_negative_positivity(const WeightedOperator& op, const PositivityOptions& options) {
  PositivityReport report;
  report.eigenvector = ScalarField(op.grid());
  const auto cells = op.aminus().indices();
  report.cells = cells.size();
  if (cells.empty()) {
    report.method = "empty";
    return report;
  }
  Eigen::VectorXd vec;
  if (cells.size() <= options.dense_cells) {
    report.method = "dense";
    const Eigen::MatrixXd b = op.block(op.aminus(), op.aminus());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b);
    if (es.info() != Eigen::Success) {
      report.converged = false;
    }
    const auto& ev = es.eigenvalues();
    report.min_eigenvalue = ev[0];
    report.scale = std::max(std::fabs(ev[0]), std::fabs(ev[ev.size() - 1]));
    vec = es.eigenvectors().col(0);
  } else {
    report.method = "lanczos";
    auto apply = [&](const Eigen::VectorXd& x) {
      ScalarField f(op.grid());
      for (std::size_t a = 0; a < cells.size(); ++a) f[cells[a]] = x[static_cast<Eigen::Index>(a)];
      const ScalarField kf = op.apply(f);
      Eigen::VectorXd y(static_cast<Eigen::Index>(cells.size()));
      for (std::size_t a = 0; a < cells.size(); ++a) y[static_cast<Eigen::Index>(a)] = kf[cells[a]];
      return y;
    };
    lanczos_smallest(apply, static_cast<Eigen::Index>(cells.size()), options.lanczos_steps, options.rel_tol, 0x1a2c05ULL,
                     report, vec);
  }
  // L^2-normalize in the quadrature pairing.
  const double norm = std::sqrt(op.grid().cell_volume()) * vec.norm();
  for (std::size_t a = 0; a < cells.size(); ++a) {
    report.eigenvector[cells[a]] = norm > 0.0 ? vec[static_cast<Eigen::Index>(a)] / norm : 0.0;
  }
  report.pass = report.min_eigenvalue >= -options.rel_tol * report.scale;
  return report;
}

}  // namespace nlh

// Copyright 2026 The nlhdual Authors
// SPDX-License-Identifier: Apache-2.0

#include "nlh/mountain_pass.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

#include "nlh/random.hpp"

namespace nlh {

double gradient_scale(const ScalarField& phi, double lambda, double p_conj) {
  return std::pow(lambda, 1.0 - p_conj) * std::pow(lp_norm(phi, p_conj), p_conj - 1.0);
}

double sphere_radius(const MethodConstants& consts, double lambda) {
  const double pc = conjugate_exponent(consts.p);
  return std::pow(std::pow(lambda, pc - 1.0) * consts.alpha, 1.0 / (pc - 2.0));
}

double sphere_infimum_bound(const MethodConstants& consts, double lambda) {
  const double pc = conjugate_exponent(consts.p);
  return consts.alpha * (1.0 / pc - 0.5) * std::pow(std::pow(lambda, pc - 1.0) * consts.alpha, 2.0 / (pc - 2.0));
}

double endpoint_radius(const MethodConstants& consts) {
  return std::pow(0.5 * consts.alpha * std::pow(consts.beta, -consts.p), 1.0 / (consts.p - 2.0));
}

namespace {

InnerSolveOptions inner_options(double tol, const ScalarField* warm) {
  InnerSolveOptions o;
  o.tol = tol;
  if (warm != nullptr && warm->size() > 0) o.warm_start = *warm;
  return o;
}

}  // namespace

ScalarField make_endpoint(const MethodConstants& consts, double lambda, const WeightedOperator& op,
                          double tol_inner) {
  if (!(consts.alpha > 0.0)) throw EndpointError("make_endpoint: alpha must be positive");
  const double pc = op.p_conj();
  const double r_lambda = sphere_radius(consts, lambda);
  const double unit = lp_norm(consts.phi0, pc);
  auto certified = [&](const ScalarField& v, double bound) {
    return lp_norm(v, pc) > r_lambda && eval_reduced(v, lambda, op, inner_options(tol_inner, nullptr)).value <= bound;
  };
  if (consts.beta > 1e-12) {
    ScalarField v = endpoint_radius(consts) / unit * consts.phi0;
    if (certified(v, 1e-8)) return v;
  }
  double t = 1.0;
  for (int k = 0; k < 200; ++k, t *= 2.0) {
    ScalarField v = t / unit * consts.phi0;
    if (certified(v, 0.0)) return v;
  }
  throw EndpointError("make_endpoint: no certified far endpoint along the alpha-maximizer ray");
}


namespace {

struct NodeState {
  double value = 0.0;
  ScalarField z;
  ScalarField gradient;
};

class Deformer {
 public:
  Deformer(double lambda, const WeightedOperator& op, const MpOptions& opt)
      : lambda_(lambda), op_(op), opt_(opt), p_(op.p()), pc_(op.p_conj()) {}

  NodeState evaluate(const ScalarField& phi, const ScalarField* warm) const {
    ReducedEvaluation ev = evaluate_reduced(phi, lambda_, op_, inner_options(opt_.tol_inner, warm));
    return {ev.value, std::move(ev.z), std::move(ev.gradient)};
  }

  double scaled_norm(const NodeState& s, const ScalarField& phi) const {
    const double scale = gradient_scale(phi, lambda_, pc_);
    return scale > 0.0 ? lp_norm(s.gradient, p_) / scale : std::numeric_limits<double>::infinity();
  }

  void evaluate_all() {
    states_.assign(nodes_.size(), NodeState{});
    for (std::size_t k = 0; k < nodes_.size(); ++k) states_[k] = evaluate(nodes_[k], nullptr);
  }

  std::size_t argmax_interior() const {
    std::size_t best = 1;
    for (std::size_t k = 2; k + 1 < nodes_.size(); ++k) {
      if (states_[k].value > states_[best].value) best = k;
    }
    return best;
  }

  double path_max() const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& s : states_) m = std::max(m, s.value);
    return m;
  }

  /// Last node index taking part in the redistribution.
  std::size_t active_end() const { return far_tail_ ? nodes_.size() - 2 : nodes_.size() - 1; }

  double mean_spacing() const {
    const std::size_t hi = active_end();
    double total = 0.0;
    for (std::size_t k = 0; k < hi; ++k) total += lp_norm(nodes_[k + 1] - nodes_[k], pc_);
    return total / static_cast<double>(hi);
  }

  /// Unit steepest-descent direction -dual_map(G, p) / ||G||_p^{p-1}.
  ScalarField descent(const ScalarField& g) const {
    const double n = lp_norm(g, p_);
    ScalarField d = dual_map(g, p_);
    d *= -1.0 / std::pow(n, p_ - 1.0);
    return d;
  }

  /// Arclength redistribution in the L^{p'} metric, separately on both sides
  /// of the max node so that node keeps its place.
  void redistribute(std::size_t imax) {
    std::vector<ScalarField> nodes = nodes_;
    std::vector<ScalarField> warm(nodes_.size());
    auto side = [&](std::size_t lo, std::size_t hi) {
      if (hi <= lo + 1) return;
      std::vector<double> cum(hi - lo + 1, 0.0);
      for (std::size_t k = lo; k < hi; ++k) cum[k - lo + 1] = cum[k - lo] + lp_norm(nodes_[k + 1] - nodes_[k], pc_);
      const double total = cum.back();
      if (!(total > 0.0)) return;
      std::size_t seg = 0;
      for (std::size_t j = lo + 1; j < hi; ++j) {
        const double target = total * static_cast<double>(j - lo) / static_cast<double>(hi - lo);
        while (seg + 2 < cum.size() && cum[seg + 1] < target) ++seg;
        const double len = cum[seg + 1] - cum[seg];
        const double w = len > 0.0 ? std::clamp((target - cum[seg]) / len, 0.0, 1.0) : 0.0;
        nodes[j] = (1.0 - w) * nodes_[lo + seg] + w * nodes_[lo + seg + 1];
        warm[j] = (1.0 - w) * states_[lo + seg].z + w * states_[lo + seg + 1].z;
      }
    };
    const std::size_t hi = active_end();
    if (imax < hi) {
      side(0, imax);
      side(imax, hi);
    } else {
      side(0, hi);
    }
    for (std::size_t k = 1; k < hi; ++k) {
      if (k != imax) states_[k] = evaluate(nodes[k], &warm[k]);
    }
    nodes_ = std::move(nodes);
  }

  /// Golden-section maximization of the functional on the two segments next
  /// to node i; returns the best point found (node i itself if none is higher).
  std::pair<ScalarField, NodeState> refine_max(std::size_t i) const {
    ScalarField best = nodes_[i];
    NodeState best_state = states_[i];
    for (std::size_t j : {i - 1, i + 1}) {
      const ScalarField dir = nodes_[j] - nodes_[i];
      const ScalarField* warm = &states_[i].z;
      auto at = [&](double s) {
        ScalarField x = nodes_[i];
        x.axpy(s, dir);
        return x;
      };
      constexpr double g = 0.6180339887498949;
      double a = 0.0, b = 1.0;
      double c = b - g * (b - a), d = a + g * (b - a);
      NodeState fc = evaluate(at(c), warm), fd = evaluate(at(d), warm);
      for (int k = 0; k < 24; ++k) {
        if (fc.value > fd.value) {
          b = d;
          d = c;
          fd = std::move(fc);
          c = b - g * (b - a);
          fc = evaluate(at(c), warm);
        } else {
          a = c;
          c = d;
          fc = std::move(fd);
          d = a + g * (b - a);
          fd = evaluate(at(d), warm);
        }
      }
      NodeState& top = fc.value > fd.value ? fc : fd;
      if (top.value > best_state.value) {
        best = at(fc.value > fd.value ? c : d);
        best_state = std::move(top);
      }
    }
    return {std::move(best), std::move(best_state)};
  }

  std::vector<ScalarField> nodes_;
  std::vector<NodeState> states_;
  bool far_tail_ = false;

 private:
  double lambda_;
  const WeightedOperator& op_;
  const MpOptions& opt_;
  double p_, pc_;
};

struct PolishResult {
  ScalarField phi;
  ScalarField psi;
};

/// Damped Newton (Levenberg-Marquardt) iteration for the coupled stationarity
/// system in the variables s = |phi|^{p'-2} phi, t = |psi|^{p'-2} psi, where
/// it is smooth:
///   lambda^{1-p'} s - 1_{A+} K (phi - psi) = 0,  -t + 1_{A-} K (phi - psi) = 0,
/// with phi = |s|^{p-2} s and psi = |t|^{p-2} t.
std::optional<PolishResult> newton_polish(const ScalarField& phi, const ScalarField& psi, double lambda,
                                          const WeightedOperator& op, int max_iters = 100) {
  if (!op.has_dense()) return std::nullopt;
  const double p = op.p(), pc = op.p_conj();
  const double c = std::pow(lambda, 1.0 - pc);
  const auto& supp = op.support();
  const Eigen::MatrixXd& k = op.dense();
  const auto n = static_cast<Eigen::Index>(supp.size());
  std::vector<char> is_plus(supp.size());
  for (std::size_t a = 0; a < supp.size(); ++a) is_plus[a] = op.aplus().contains(supp[a]) ? 1 : 0;

  auto jp = [p](double v) { return v == 0.0 ? 0.0 : std::copysign(std::pow(std::fabs(v), p - 1.0), v); };
  auto jpc = [pc](double v) { return v == 0.0 ? 0.0 : std::copysign(std::pow(std::fabs(v), pc - 1.0), v); };

  Eigen::VectorXd x(n);  // s on A+ cells, t on A- cells
  for (Eigen::Index a = 0; a < n; ++a) {
    const std::size_t i = supp[static_cast<std::size_t>(a)];
    x[a] = is_plus[a] ? jpc(phi[i]) : jpc(psi[i]);
  }
  auto residual = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd diff(n);
    for (Eigen::Index a = 0; a < n; ++a) diff[a] = is_plus[a] ? jp(v[a]) : -jp(v[a]);
    Eigen::VectorXd f = k * diff;
    for (Eigen::Index a = 0; a < n; ++a) f[a] = is_plus[a] ? c * v[a] - f[a] : -v[a] + f[a];
    return f;
  };
  Eigen::VectorXd f = residual(x);
  double fn = f.norm();
  double mu = -1.0;
  for (int it = 0; it < max_iters; ++it) {
    const double ref = std::max((c * x).cwiseAbs().maxCoeff(), 1e-300);
    if (f.cwiseAbs().maxCoeff() <= 1e-14 * ref) break;
    Eigen::MatrixXd jac(n, n);
    for (Eigen::Index b = 0; b < n; ++b) {
      const double deriv = (p - 1.0) * std::pow(std::fabs(x[b]), p - 2.0);
      // d(phi - psi)_b / dx_b is +deriv on A+ and -deriv on A-.
      const double col = is_plus[b] ? deriv : -deriv;
      for (Eigen::Index a = 0; a < n; ++a) jac(a, b) = (is_plus[a] ? -1.0 : 1.0) * k(a, b) * col;
      jac(b, b) += is_plus[b] ? c : -1.0;
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd jtf = jac.transpose() * f;
    if (mu < 0.0) mu = 1e-6 * jtj.diagonal().maxCoeff();
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      Eigen::MatrixXd a = jtj;
      a.diagonal().array() += mu;
      const Eigen::VectorXd step = a.ldlt().solve(-jtf);
      if (!step.allFinite()) return std::nullopt;
      Eigen::VectorXd xt = x + step;
      Eigen::VectorXd ft = residual(xt);
      if (ft.norm() < fn) {
        x = std::move(xt);
        f = std::move(ft);
        fn = f.norm();
        mu = std::max(mu / 3.0, 1e-300);
        accepted = true;
        break;
      }
      mu *= 4.0;
    }
    if (!accepted) break;
  }
  PolishResult out{ScalarField(op.grid()), ScalarField(op.grid())};
  for (Eigen::Index a = 0; a < n; ++a) {
    const std::size_t i = supp[static_cast<std::size_t>(a)];
    if (is_plus[a]) out.phi[i] = jp(x[a]);
    else out.psi[i] = jp(x[a]);
  }
  if (!out.phi.all_finite() || !out.psi.all_finite()) return std::nullopt;
  return out;
}

/// Straight initial path. Nodes 0..n-2 cover [0, t_e] along the ray of v2,
/// where t_e is the first radius beyond the sphere at which the functional
/// is <= 0; the last node is v2 itself.
MpPath straight_path(const ScalarField& v2, double lambda, const MethodConstants& consts,
                     const WeightedOperator& op, const MpOptions& options) {
  const double pc = op.p_conj();
  const std::size_t n = static_cast<std::size_t>(options.nodes);
  const double end = lp_norm(v2, pc);
  const ScalarField unit = (1.0 / end) * v2;
  double te = end;
  for (double t = sphere_radius(consts, lambda); t < end; t *= 1.25) {
    if (eval_reduced(t * unit, lambda, op, inner_options(options.tol_inner, nullptr)).value <= 0.0) {
      te = t;
      break;
    }
  }
  MpPath path;
  path.nodes.resize(n);
  path.far_tail = te < end * (1.0 - 1e-12);
  const std::size_t spread = path.far_tail ? n - 2 : n - 1;
  for (std::size_t j = 0; j <= spread; ++j) path.nodes[j] = (te * static_cast<double>(j) / static_cast<double>(spread)) * unit;
  path.nodes.back() = v2;
  return path;
}

}  // namespace

MpResult find_critical_point(double lambda, const MethodConstants& consts, const WeightedOperator& op,
                             const MpOptions& options, const std::optional<MpPath>& initial_path) {
  if (options.nodes < 9) throw std::invalid_argument("find_critical_point: need at least 9 path nodes");
  if (!(lambda > consts.lambda0)) throw std::domain_error("find_critical_point: lambda must exceed lambda0");
  const double p = op.p(), pc = op.p_conj();
  const auto n = static_cast<std::size_t>(options.nodes);
  Deformer def(lambda, op, options);

  MpPath base;
  if (initial_path && initial_path->nodes.size() == n) {
    base = *initial_path;
  } else {
    base = straight_path(make_endpoint(consts, lambda, op, options.tol_inner), lambda, consts, op, options);
  }
  base.nodes.front() = ScalarField(op.grid());
  const double active_norm = lp_norm(base.nodes[base.far_tail ? n - 2 : n - 1], pc);

  MpResult result;
  result.lambda = lambda;
  double best_gn = std::numeric_limits<double>::infinity();
  ScalarField best_phi;
  std::mt19937_64 rng(options.seed);
  int total_iters = 0;
  bool done = false;

  auto finalize = [&](const ScalarField& phi, const ScalarField* warm, bool polished) {
    // Independent re-evaluation with a tighter inner solve.
    const double scale = gradient_scale(phi, lambda, pc);
    const double tight = std::min(default_inner_tolerance(phi, op), 1e-2 * options.tol_mp * std::max(scale, 1e-300));
    ReducedEvaluation ev = evaluate_reduced(phi, lambda, op, inner_options(tight, warm));
    result.phi_star = phi;
    result.psi_star = ev.z;
    result.level = ev.value;
    result.grad_norm_raw = lp_norm(ev.gradient, p);
    result.grad_norm = scale > 0.0 ? result.grad_norm_raw / scale : std::numeric_limits<double>::infinity();
    result.polished = polished;
    return result.grad_norm <= options.tol_mp && lp_norm(phi, pc) > 0.0;
  };

  for (int attempt = 0; attempt <= options.restarts && !done; ++attempt) {
    def.nodes_ = base.nodes;
    def.far_tail_ = base.far_tail;
    if (attempt > 0) {
      // Transverse perturbation of the interior, vanishing at both ends.
      ScalarField xi = normalize(random_field(op.aplus(), rng, false), pc);
      const double amp = 0.05 * active_norm * static_cast<double>(attempt);
      const std::size_t hi = def.active_end();
      for (std::size_t j = 1; j < hi; ++j) {
        const double t = static_cast<double>(j) / static_cast<double>(hi);
        def.nodes_[j].axpy(amp * std::sin(M_PI * t), xi);
      }
      result.restarts_used = attempt;
    }
    def.evaluate_all();
    double step = 0.05 * def.mean_spacing();
    double reference_max = def.path_max();
    int last_drop = 0;
    int last_polish = -options.polish_every;
    for (int it = 0; it < options.max_iters; ++it, ++total_iters) {
      if (it > 0 && options.redistribute_every > 0 && it % options.redistribute_every == 0) {
        def.redistribute(def.argmax_interior());
      }
      const std::size_t imax = def.argmax_interior();
      const ScalarField& phi = def.nodes_[imax];
      const NodeState& st = def.states_[imax];
      const double gn = def.scaled_norm(st, phi);
      if (gn < best_gn) {
        best_gn = gn;
        best_phi = phi;
      }
      if (gn <= options.tol_mp && finalize(phi, &st.z, false)) {
        done = true;
        break;
      }
      if (options.newton_polish && op.has_dense() && gn <= options.polish_threshold &&
          it - last_polish >= options.polish_every) {
        last_polish = it;
        const auto [start, start_state] = def.refine_max(imax);
        if (auto pol = newton_polish(start, start_state.z, lambda, op)) {
          const double level = eval_J(pol->phi, pol->psi, lambda, op);
          const bool nontrivial = lp_norm(pol->phi, pc) > 1e-3 * lp_norm(start, pc);
          if (nontrivial && std::fabs(level - start_state.value) <= 0.05 * std::fabs(start_state.value) &&
              finalize(pol->phi, &pol->psi, true)) {
            done = true;
            break;
          }
        }
      }

      // Armijo step of the max node along the L^{p'} steepest descent. Steps
      // stay below half the mean node spacing so the path keeps resolving
      // the ridge it has to cross.
      const double gnorm = lp_norm(st.gradient, p);
      if (!(gnorm > 0.0)) break;
      const ScalarField dir = def.descent(st.gradient);
      const double old_max = def.path_max();
      double s = std::min(step, 0.5 * def.mean_spacing());
      bool accepted = false;
      NodeState trial_state;
      ScalarField trial;
      for (int ls = 0; ls < 60; ++ls, s *= 0.5) {
        trial = phi;
        trial.axpy(s, dir);
        trial_state = def.evaluate(trial, &st.z);
        if (trial_state.value <= st.value - options.armijo_c * s * gnorm) {
          accepted = true;
          break;
        }
      }
      if (!accepted) break;  // no representable descent left: restart
      def.nodes_[imax] = std::move(trial);
      def.states_[imax] = std::move(trial_state);
      step = 2.0 * s;

      const double moved_max = def.path_max();
      for (std::size_t j : {imax - 1, imax + 1}) {
        if (j == 0 || j + 1 >= n) continue;
        const NodeState& nj = def.states_[j];
        if (!(lp_norm(nj.gradient, p) > 0.0)) continue;
        ScalarField tj = def.nodes_[j];
        tj.axpy(options.neighbor_fraction * s, def.descent(nj.gradient));
        NodeState sj = def.evaluate(tj, &nj.z);
        if (sj.value <= moved_max) {
          def.nodes_[j] = std::move(tj);
          def.states_[j] = std::move(sj);
        }
      }
      const double new_max = def.path_max();
      if (new_max > old_max + 1e-12 * std::fabs(old_max)) ++result.path_max_increases;

      if (new_max < reference_max - options.stagnation_drop * std::fabs(reference_max)) {
        reference_max = new_max;
        last_drop = it;
      } else if (it - last_drop >= options.stagnation_window) {
        break;
      }
    }
    if (!done) base.nodes = def.nodes_;
  }

  result.iterations = total_iters;
  result.path.nodes = def.nodes_;
  result.path.far_tail = def.far_tail_;
  for (const auto& s : def.states_) result.path.values.push_back(s.value);
  result.path_max = def.path_max();
  if (done) {
    result.converged = true;
    result.message = result.polished ? "converged (newton refinement)" : "converged";
  } else {
    if (best_phi.size() > 0) finalize(best_phi, nullptr, false);
    result.converged = false;
    result.message = "not converged: best scaled gradient " + std::to_string(result.grad_norm);
  }
  return result;
}

namespace {

MpResult failed_result(double lambda, const std::string& what) {
  MpResult r;
  r.lambda = lambda;
  r.converged = false;
  r.message = what;
  return r;
}

}  // namespace

std::vector<MpResult> lambda_sweep(const std::vector<double>& lambdas, const MethodConstants& consts,
                                   const WeightedOperator& op, const SweepOptions& options) {
  std::vector<double> sorted = lambdas;
  std::sort(sorted.begin(), sorted.end());
  std::vector<MpResult> out(sorted.size());
  auto run_one = [&](std::size_t i, const std::optional<MpPath>& warm) {
    MpOptions mp = options.mp;
    mp.seed = mix_seed(options.mp.seed, i);
    try {
      return find_critical_point(sorted[i], consts, op, mp, warm);
    } catch (const std::exception& e) {
      return failed_result(sorted[i], e.what());
    }
  };

  const int workers = std::max(1, options.workers);
  if (workers == 1) {
    std::optional<MpPath> warm;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      std::optional<MpPath> start;
      if (options.warm_start && warm) {
        try {
          // Keep the shape of the previous path and move its end onto the new endpoint.
          const ScalarField v2 = make_endpoint(consts, sorted[i], op, options.mp.tol_inner);
          MpPath path = *warm;
          const double pc = op.p_conj();
          const double ratio = lp_norm(v2, pc) / lp_norm(path.nodes.back(), pc);
          for (auto& node : path.nodes) node *= ratio;
          path.nodes.back() = v2;
          start = std::move(path);
        } catch (const std::exception&) {
          start.reset();
        }
      }
      out[i] = run_one(i, start);
      if (out[i].converged && out[i].path.nodes.size() == static_cast<std::size_t>(options.mp.nodes)) {
        warm = out[i].path;
      }
    }
    return out;
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const int spawn = std::min<int>(workers, static_cast<int>(sorted.size()));
  for (int w = 0; w < spawn; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < sorted.size(); i = next++) out[i] = run_one(i, std::nullopt);
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace nlh

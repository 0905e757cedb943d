// Copyright 2026 The nlhdual Authors
// SPDX-License-Identifier: Apache-2.0

#include "nlh/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "nlh/birman_schwinger.hpp"
#include "nlh/mountain_pass.hpp"
#include "nlh/resolvent.hpp"
#include "nlh/special_functions.hpp"
#include "nlh/weight_library.hpp"

namespace nlh {

namespace {

/// Shortest decimal form that round-trips, independent of the locale.
std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string lambda_label(double l) {
  std::ostringstream s;
  s.precision(6);
  s << l;
  return s.str();
}

}  // namespace

int RunSummary::converged_count() const {
  int n = 0;
  for (const auto& r : rows) n += r.converged ? 1 : 0;
  return n;
}

int RunSummary::exit_code(RunStage stage) const {
  if (constants_computed && !constants.positivity_pass) return 2;
  if (stage == RunStage::constants) return constants_computed ? 0 : 4;
  return converged_count() > 0 ? 0 : 4;
}

Problem build_problem(const RunConfig& config) {
  Grid grid(config.dim, config.points, config.half_extent);
  ScalarField q = realize(config.weight, grid);
  return {grid, std::move(q)};
}

RunSummary run(const RunConfig& config, const RunOptions& options) {
  RunSummary summary;
  auto note = [&](std::string m) { summary.messages.push_back(std::move(m)); };

  Problem problem;
  try {
    problem = build_problem(config);
  } catch (const std::exception& e) {
    note(std::string("weight: ") + e.what());
    return summary;
  }
  ConstantsSummary& cs = summary.constants;

  const GeometryReport geo = geometry_report(problem.q);
  const DiameterCriterion crit = diameter_criterion(geo, problem.grid);
  cs.aplus_cells = geo.aplus_cells;
  cs.aminus_cells = geo.aminus_cells;
  cs.diam_aminus = geo.diam_aminus;
  cs.dist_apm = geo.dist_apm;
  cs.first_zero = crit.first_zero;
  cs.diameter_criterion = crit.satisfied;
  if (geo.aplus_cells == 0) {
    note("weight: Q has no positive part; nothing to solve");
    return summary;
  }
  if (!crit.satisfied) {
    note("geometry: diam(A-) + h sqrt(N) = " + num(crit.diameter_bound) + " exceeds y = " + num(crit.first_zero) +
         "; positivity is not guaranteed and is checked directly");
  }

  const WeightedOperator op(ResolventOperator(problem.grid), problem.q, config.p);
  const PositivityReport pos = check_negative_positivity(op);
  cs.min_eigenvalue = pos.min_eigenvalue;
  cs.positivity_scale = pos.scale;
  cs.positivity_pass = pos.pass;
  cs.positivity_method = pos.method;

  PowerIterationOptions pio;
  pio.seed = config.seed;
  MethodConstants consts;
  try {
    consts = compute_constants(op, pio);
  } catch (const std::exception& e) {
    note(std::string("constants: ") + e.what());
    return summary;
  }
  cs.alpha = consts.alpha;
  cs.beta = consts.beta;
  cs.lambda0 = consts.lambda0;
  summary.constants_computed = true;

  if (!pos.pass) {
    note("positivity: form on A- has eigenvalue " + num(pos.min_eigenvalue) + " < -1e-10 * " + num(pos.scale) +
         "; lambda sweep aborted");
    return summary;
  }
  if (options.stage == RunStage::constants) return summary;

  std::vector<double> admissible;
  for (double l : config.lambdas) {
    if (l > consts.lambda0) {
      admissible.push_back(l);
    } else {
      summary.skipped_lambdas.push_back(l);
      note("lambda " + lambda_label(l) + " skipped: not above lambda0 = " + num(consts.lambda0));
    }
  }
  if (admissible.empty()) return summary;

  SweepOptions sweep;
  sweep.mp.nodes = config.nodes;
  sweep.mp.max_iters = config.max_iters;
  sweep.mp.restarts = config.restarts;
  sweep.mp.tol_mp = config.tol_mp;
  sweep.mp.tol_inner = config.tol_inner;
  sweep.mp.seed = config.seed;
  sweep.mp.newton_polish = config.newton_polish;
  sweep.warm_start = config.warm_start && options.workers <= 1;
  sweep.workers = options.workers;
  const std::vector<MpResult> results = lambda_sweep(admissible, consts, op, sweep);

  for (const MpResult& r : results) {
    SolutionRecord rec;
    if (r.phi_star.size() == op.grid().size() && r.psi_star.size() == op.grid().size()) {
      try {
        rec = make_record(r.lambda, r.phi_star, r.psi_star, op);
      } catch (const std::exception& e) {
        note("lambda " + lambda_label(r.lambda) + " reconstruction: " + e.what());
        rec = SolutionRecord{};
      }
    }
    rec.lambda = r.lambda;
    rec.converged = r.converged;
    rec.level = r.phi_star.size() > 0 ? r.level : std::numeric_limits<double>::quiet_NaN();
    rec.iterations = r.iterations;
    rec.restarts = r.restarts_used;
    if (rec.u.size() == 0) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      rec.phi_norm = rec.psi_norm = rec.u_norm_p = rec.residual_integral = rec.residual_pde = nan;
    }
    note("lambda " + lambda_label(r.lambda) + ": " + r.message);
    summary.rows.push_back(std::move(rec));
  }
  return summary;
}

std::string summary_csv(const RunSummary& summary) {
  std::string out = std::string(kSummaryHeader) + "\n";
  for (const auto& r : summary.rows) {
    out += num(r.lambda) + "," + (r.converged ? "1" : "0") + "," + num(r.level) + "," + num(r.phi_norm) + "," +
           num(r.psi_norm) + "," + num(r.u_norm_p) + "," + num(r.residual_integral) + "," + num(r.residual_pde) + "," +
           std::to_string(r.iterations) + "," + std::to_string(r.restarts) + "\n";
  }
  return out;
}

std::string constants_csv(const RunSummary& summary, const RunConfig& config) {
  const ConstantsSummary& c = summary.constants;
  std::string out =
      "N,M,L,p,alpha,beta,lambda0,min_eig,positivity_scale,positivity_pass,aplus_cells,aminus_cells,diam_aminus,"
      "y_first_zero,diameter_criterion,dist_apm\n";
  out += std::to_string(config.dim) + "," + std::to_string(config.points) + "," + num(config.half_extent) + "," +
         num(config.p) + "," + num(c.alpha) + "," + num(c.beta) + "," + num(c.lambda0) + "," + num(c.min_eigenvalue) +
         "," + num(c.positivity_scale) + "," + (c.positivity_pass ? "1" : "0") + "," + std::to_string(c.aplus_cells) +
         "," + std::to_string(c.aminus_cells) + "," + num(c.diam_aminus) + "," + num(c.first_zero) + "," +
         (c.diameter_criterion ? "1" : "0") + "," + num(c.dist_apm) + "\n";
  return out;
}

std::string slice_csv(const ScalarField& u) {
  const Grid& g = u.grid();
  const int m = g.points();
  std::string out = "x,y,u\n";
  std::array<int, kMaxDim> idx{};
  for (int d = 2; d < g.dim(); ++d) idx[d] = m / 2;  // node at coordinate 0
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      idx[0] = i;
      idx[1] = j;
      const std::size_t flat = g.flat_index(idx);
      out += num(g.coordinate(i)) + "," + num(g.coordinate(j)) + "," + num(u[flat]) + "\n";
    }
  }
  return out;
}

void emit_outputs(const RunSummary& summary, const RunConfig& config, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
  write_text(dir / "summary.csv", summary_csv(summary));
  write_text(dir / "constants.csv", constants_csv(summary, config));
  if (!config.write_fields) return;
  for (std::size_t i = 0; i < summary.rows.size(); ++i) {
    const SolutionRecord& r = summary.rows[i];
    if (r.u.size() == 0) continue;
    const std::string k = std::to_string(i);
    write_nlhf(r.u, dir / ("u_" + k + ".nlhf"));
    write_nlhf(r.phi, dir / ("phi_" + k + ".nlhf"));
    write_nlhf(r.psi, dir / ("psi_" + k + ".nlhf"));
    write_text(dir / ("slice_" + k + ".csv"), slice_csv(r.u));
  }
}

}  // namespace nlh

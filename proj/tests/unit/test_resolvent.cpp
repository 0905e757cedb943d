// Copyright 2026 The nlhdual Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nlh/random.hpp"
#include "nlh/resolvent.hpp"
#include "nlh/special_functions.hpp"
#include "oracles.hpp"

using namespace nlh;

namespace {

/// Random field on the central ball of radius r.
ScalarField compact_random(const Grid& g, double r, std::mt19937_64& rng) {
  SupportMask m(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto x = g.position(i);
    double s = 0.0;
    for (int d = 0; d < g.dim(); ++d) s += x[d] * x[d];
    m.set(i, s < r * r);
  }
  return random_field(m, rng, false);
}

ScalarField gaussian(const Grid& g, double sigma) {
  ScalarField f(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto x = g.position(i);
    double s = 0.0;
    for (int d = 0; d < g.dim(); ++d) s += x[d] * x[d];
    f[i] = std::exp(-s / (2.0 * sigma * sigma));
  }
  return f;
}

double pde_residual(const ScalarField& f, const ScalarField& u) {
  const ScalarField lap = discrete_laplacian(u);
  const SupportMask win = interior_window(f.grid(), 0.75);
  ScalarField r(f.grid());
  for (std::size_t i = 0; i < f.size(); ++i) r[i] = -lap[i] - u[i] - f[i];
  return lp_norm(restrict_to(r, win), 2.0) / lp_norm(restrict_to(f, win), 2.0);
}

}  // namespace

TEST_CASE("origin cell and kernel samples") {
  const ResolventOperator op(Grid(3, 32, 8.0));
  CHECK(std::isfinite(op.origin_cell_value()));
  CHECK(op.origin_cell_value() > 0.0);
  CHECK(op.origin_cell_value() == doctest::Approx(oracle::psi_ball_mean(0.5, 3)).epsilon(1e-10));
  CHECK(psi_cell_mean(0.1, 2) == doctest::Approx(oracle::psi_ball_mean(0.1, 2)).epsilon(1e-10));
  CHECK(psi_cell_mean(0.3, 4) == doctest::Approx(oracle::psi_ball_mean(0.3, 4)).epsilon(1e-10));

  const Grid g(3, 16, 8.0);
  const ResolventOperator r(g);
  for (const auto& off : {std::array<int, 4>{1, 0, 0, 0}, {2, -3, 1, 0}, {-16, 16, 5, 0}}) {
    const double d = g.spacing() * std::sqrt(double(off[0] * off[0] + off[1] * off[1] + off[2] * off[2]));
    CHECK(r.kernel_at_offset(off) == doctest::Approx(oracle::psi(d, 3)).epsilon(1e-12));
  }
  CHECK_THROWS(r.kernel_at_offset({17, 0, 0, 0}));
}

TEST_CASE("kernel vanishes on the first zero") {
  // h = pi/8, so the offset (4, 0, 0) lies at distance pi/2 = y_{1/2}.
  const Grid g(3, 32, 2.0 * std::numbers::pi);
  const ResolventOperator op(g);
  CHECK(std::fabs(op.kernel_at_offset({4, 0, 0, 0})) <= 1e-12);
}

TEST_CASE("kernel spectrum is real") {
  CHECK(ResolventOperator(Grid(2, 32, 4.0)).spectrum_imaginary_residue() <= 1e-12);
  CHECK(ResolventOperator(Grid(3, 16, 4.0)).spectrum_imaginary_residue() <= 1e-12);
}

TEST_CASE("FFT convolution equals the direct sum") {
  for (int dim : {2, 3}) {
    const Grid g(dim, 8, 2.0);
    const ResolventOperator op(g);
    std::mt19937_64 rng(dim);
    const ScalarField f = compact_random(g, 10.0, rng);  // whole box
    const ScalarField u = apply_R(op, f);
    std::vector<std::size_t> all(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) all[i] = i;
    ScalarField ones(g);
    for (std::size_t i = 0; i < g.size(); ++i) ones[i] = 1.0;
    const Eigen::MatrixXd k = oracle::kernel_matrix(g, all, all, ones);
    Eigen::VectorXd fv(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) fv[i] = f[i];
    const Eigen::VectorXd ref = k * fv;
    double scale = ref.cwiseAbs().maxCoeff();
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::fabs(u[i] - ref[i]) <= 1e-12 * scale);
  }
}

TEST_CASE("zero, linearity and grid mismatch") {
  const Grid g(2, 32, 4.0);
  const ResolventOperator op(g);
  const ScalarField z = apply_R(op, ScalarField(g));
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(z[i] == 0.0);
  std::mt19937_64 rng(17);
  const ScalarField f = compact_random(g, 2.0, rng), h = compact_random(g, 2.0, rng);
  const ScalarField lhs = apply_R(op, -1.5 * f + h);
  const ScalarField rhs = -1.5 * apply_R(op, f) + apply_R(op, h);
  const double scale = lp_norm(rhs, 2.0);
  CHECK(lp_norm(lhs - rhs, 2.0) <= 1e-12 * scale);
  CHECK_THROWS_AS(apply_R(op, ScalarField(Grid(2, 16, 4.0))), GridMismatch);
}

TEST_CASE("self-adjointness in the quadrature pairing") {
  for (auto [dim, m] : {std::pair{2, 64}, std::pair{3, 32}}) {
    const Grid g(dim, m, 4.0);
    const ResolventOperator op(g);
    std::mt19937_64 rng(100 + dim);
    for (int t = 0; t < 20; ++t) {
      const ScalarField f = compact_random(g, 2.0, rng), h = compact_random(g, 2.0, rng);
      const double a = inner(f, apply_R(op, h)), b = inner(h, apply_R(op, f));
      const double scale = lp_norm(f, 2.0) * lp_norm(apply_R(op, h), 2.0);
      CHECK(std::fabs(a - b) <= 1e-11 * scale);
    }
  }
}

TEST_CASE("pairing of smooth data converges at second order") {
  // inner(f, R g) for fixed smooth f, g: successive differences shrink by ~4.
  std::vector<double> vals;
  for (int m : {16, 32, 64, 128}) {
    const Grid g(2, m, 4.0);
    const ResolventOperator op(g);
    const ScalarField f = gaussian(g, 0.6);
    ScalarField h(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto x = g.position(i);
      h[i] = std::exp(-((x[0] - 0.7) * (x[0] - 0.7) + x[1] * x[1]) / 0.5);
    }
    vals.push_back(inner(f, apply_R(op, h)));
  }
  const double r1 = std::fabs(vals[1] - vals[0]) / std::fabs(vals[2] - vals[1]);
  const double r2 = std::fabs(vals[2] - vals[1]) / std::fabs(vals[3] - vals[2]);
  MESSAGE("pairing refinement ratios " << r1 << ", " << r2);
  CHECK(r2 > 3.0);
  CHECK(r2 < 5.5);
}

TEST_CASE("resolvent inverts the Helmholtz operator at second order") {
  std::vector<double> res;
  for (int m : {32, 64, 128}) {
    const Grid g(2, m, 4.0);
    const ScalarField f = gaussian(g, 0.5);
    res.push_back(pde_residual(f, apply_R(ResolventOperator(g), f)));
  }
  const double order = std::log2(res[1] / res[2]);
  MESSAGE("PDE residuals " << res[0] << " " << res[1] << " " << res[2] << ", order " << order);
  CHECK(res[0] > res[1]);
  CHECK(order > 1.7);
  CHECK(order < 2.3);
}

TEST_CASE("empirical L^{p'} -> L^p bound") {
  const Grid g(2, 32, 4.0);
  const ResolventOperator op(g);
  std::mt19937_64 rng(23);
  const double p = 6.0, pc = conjugate_exponent(p);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const ScalarField f = normalize(compact_random(g, 2.0, rng), pc);
    worst = std::max(worst, lp_norm(apply_R(op, f), p));
  }
  MESSAGE("operator-norm estimate " << worst);
  CHECK(std::isfinite(worst));
  CHECK(worst < 10.0);
}

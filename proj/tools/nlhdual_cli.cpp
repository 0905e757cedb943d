// Copyright 2026 The nlhdual Authors
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <optional>

#include "nlh/config.hpp"
#include "nlh/pipeline.hpp"

namespace {

constexpr int kExitConfigInvalid = 3;

void print_constants(const nlh::RunSummary& s) {
  const auto& c = s.constants;
  std::printf("A+ cells %zu, A- cells %zu\n", c.aplus_cells, c.aminus_cells);
  std::printf("diam(A-) %.6g (first zero %.6g, criterion %s), dist(A+, A-) %.6g\n", c.diam_aminus, c.first_zero,
              c.diameter_criterion ? "met" : "not met", c.dist_apm);
  std::printf("positivity on A-: %s, min eigenvalue %.6e, scale %.6e (%s)\n", c.positivity_pass ? "pass" : "FAIL",
              c.min_eigenvalue, c.positivity_scale, c.positivity_method.c_str());
  if (s.constants_computed) std::printf("alpha %.12g, beta %.12g, lambda0 %.12g\n", c.alpha, c.beta, c.lambda0);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual variational solver for the nonlinear Helmholtz equation -Δu - u = Q(x)|u|^{p-2}u"};
  app.require_subcommand(1);
  int workers = 1;
  std::optional<std::uint64_t> seed;
  app.add_option("--workers", workers, "Worker threads for the lambda sweep (disables warm starts if > 1)")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Random seed, overrides problem.seed");

  std::string config_path;
  auto* solve = app.add_subcommand("solve", "Run the full pipeline and write the outputs");
  auto* constants = app.add_subcommand("constants", "Compute alpha, beta, lambda0 and the positivity check");
  auto* check = app.add_subcommand("check", "Validate a config without solving");
  for (auto* sub : {solve, constants, check}) {
    sub->add_option("config", config_path, "Config file")->required();
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfigInvalid;
  }

  nlh::RunConfig config;
  try {
    config = nlh::load_config(config_path);
    if (seed) config.seed = *seed;
    (void)nlh::build_problem(config);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s: %s\n", config_path.c_str(), e.what());
    return kExitConfigInvalid;
  }

  if (*check) {
    std::printf("%s: valid (N=%d, M=%d, L=%g, p=%g, %zu lambda values)\n", config_path.c_str(), config.dim,
                config.points, config.half_extent, config.p, config.lambdas.size());
    return 0;
  }

  const nlh::RunStage stage = *constants ? nlh::RunStage::constants : nlh::RunStage::full;
  const nlh::RunSummary summary = nlh::run(config, {stage, workers});
  for (const auto& m : summary.messages) std::fprintf(stderr, "%s\n", m.c_str());
  print_constants(summary);
  try {
    nlh::emit_outputs(summary, config, config.output_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "output: %s\n", e.what());
    return 4;
  }
  if (stage == nlh::RunStage::full) {
    std::printf("%d of %zu lambda values converged; outputs in %s\n", summary.converged_count(), summary.rows.size(),
                config.output_dir.string().c_str());
  }
  return summary.exit_code(stage);
}

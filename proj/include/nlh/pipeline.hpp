// Copyright 2026 The nlhdual Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nlh/config.hpp"
#include "nlh/grid_field.hpp"
#include "nlh/reconstruction.hpp"

namespace nlh {

struct ConstantsSummary {
  double alpha = 0.0;
  double beta = 0.0;
  double lambda0 = 0.0;
  double min_eigenvalue = 0.0;
  double positivity_scale = 0.0;
  bool positivity_pass = false;
  std::string positivity_method;
  std::size_t aplus_cells = 0;
  std::size_t aminus_cells = 0;
  double diam_aminus = 0.0;
  double first_zero = 0.0;  // y_{(N-2)/2}
  bool diameter_criterion = false;
  double dist_apm = 0.0;
};

enum class RunStage { constants, full };

struct RunOptions {
  RunStage stage = RunStage::full;
  int workers = 1;
};

struct RunSummary {
  ConstantsSummary constants;
  bool constants_computed = false;
  /// Rows ordered by lambda; only lambdas above lambda0 are attempted.
  std::vector<SolutionRecord> rows;
  std::vector<double> skipped_lambdas;
  /// Warnings and per-stage failures, in the order they occurred.
  std::vector<std::string> messages;

  int converged_count() const;
  /// 0 if at least one lambda converged, 2 if the positivity check failed,
  /// 4 otherwise. For a constants-only run: 0 or 2.
  int exit_code(RunStage stage) const;
};

/// Grid and sampled weight for a config. Throws WeightSpecError or the NLHF
/// reader's errors when the weight cannot be realized.
struct Problem {
  Grid grid;
  ScalarField q;
};
Problem build_problem(const RunConfig& config);

/// Full pipeline: weight, geometry, positivity, constants, lambda sweep and
/// reconstruction. Stage failures are recorded in the summary.
RunSummary run(const RunConfig& config, const RunOptions& options = {});

/// Writes summary.csv, constants.csv and, if enabled, u_/phi_/psi_<i>.nlhf and
/// slice_<i>.csv for every row. Creates the directory. Throws
/// std::runtime_error naming the path on I/O failure.
void emit_outputs(const RunSummary& summary, const RunConfig& config, const std::filesystem::path& dir);

/// The exact summary.csv header.
inline constexpr const char* kSummaryHeader =
    "lambda,converged,level,phi_norm,psi_norm,u_norm_p,res_integral,res_pde,iters,restarts";

std::string summary_csv(const RunSummary& summary);
std::string constants_csv(const RunSummary& summary, const RunConfig& config);

/// Midplane of u as CSV rows "x,y,u": the whole field for N = 2, the plane
/// through the grid center (coordinate 0 on the trailing axes) for N > 2.
std::string slice_csv(const ScalarField& u);

}  // namespace nlh

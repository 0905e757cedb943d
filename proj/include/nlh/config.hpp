// Copyright 2026 The nlhdual Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlh/weight_library.hpp"

namespace nlh {

/// Parse or validation failure. line() is 0 for errors that concern the
/// configuration as a whole.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

/// Parsed run configuration.
///
/// Text format: `key = value` lines grouped under the sections [grid],
/// [problem], [weight], [mp] and [output]. A key may also be written with its
/// section as a prefix (`grid.M = 64`). `#` starts a comment. Lists are comma
/// separated. Every key and section name is checked; unknown ones are errors.
struct RunConfig {
  // [grid]
  int dim = 2;
  int points = 64;
  double half_extent = 8.0;

  // [problem]
  double p = 6.0;
  bool strict = false;
  /// Either an explicit list or a geometric grid lambda_min..lambda_max.
  std::vector<double> lambdas;
  double tol_inner = 0.0;  // 0 selects the default relative tolerance
  double tol_mp = 1e-7;
  std::uint64_t seed = 0;

  // [weight]
  WeightSpec weight = TwoBalls{};

  // [mp]
  int nodes = 17;
  int max_iters = 5000;
  int restarts = 5;
  bool warm_start = true;
  bool newton_polish = true;

  // [output]
  std::filesystem::path output_dir = "nlhdual_out";
  bool write_fields = true;
};

/// Parses and validates config text. Relative from_file paths are resolved
/// against base_dir.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});

/// Reads and parses a config file; relative paths inside it resolve against
/// the file's directory.
RunConfig load_config(const std::filesystem::path& path);

/// Checks the invariants of an assembled config (p > 2, lambdas > 0, the
/// exponent window in strict mode, grid sizes). Throws ConfigError.
void validate(const RunConfig& config);

/// Admissible exponent window [2(N+1)/(N-1), 2N/(N-2)) of strict mode.
struct ExponentWindow {
  double lower;
  double upper;  // +inf for N <= 2
};
ExponentWindow exponent_window(int dim);

}  // namespace nlh

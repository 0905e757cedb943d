// Copyright 2026 The nlhdual Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nlh/config.hpp"
#include "nlh/grid_field.hpp"
#include "nlh/pipeline.hpp"

using namespace nlh;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"([grid]
N = 2
M = 32
L = 4
[problem]
p = 6
lambdas = 0.001, 3, 6
seed = 3
[weight]
kind = two_balls
profile = smooth
plus_center = -1, 0
plus_radius = 0.9
minus_center = 0.9, 0
minus_radius = 0.4
minus_amplitude = 2
)";

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("nlhdual_test_pipeline_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::size_t columns(const std::string& line) { return static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1; }

const RunSummary& small_run() {
  static const RunSummary s = run(parse_config(kSmall));
  return s;
}

}  // namespace

TEST_CASE("small run converges and skips inadmissible lambdas") {
  const RunSummary& s = small_run();
  REQUIRE(s.constants_computed);
  CHECK(s.constants.positivity_pass);
  CHECK(s.constants.alpha > 0.0);
  CHECK(s.constants.beta > 0.0);
  CHECK(s.constants.lambda0 == doctest::Approx(std::pow(2.0 * s.constants.beta / s.constants.alpha, 6.0)));
  REQUIRE(s.constants.lambda0 < 3.0);
  REQUIRE(s.skipped_lambdas.size() == 1);
  CHECK(s.skipped_lambdas[0] == 0.001);
  REQUIRE(s.rows.size() == 2);
  CHECK(s.rows[0].lambda < s.rows[1].lambda);
  for (const auto& r : s.rows) {
    CHECK(r.converged);
    CHECK(r.residual_integral <= 1e-6);
    CHECK(r.residual_pde >= 0.0);
  }
  CHECK(s.converged_count() == 2);
  CHECK(s.exit_code(RunStage::full) == 0);
  CHECK(std::any_of(s.messages.begin(), s.messages.end(),
                    [](const std::string& m) { return m.find("skipped") != std::string::npos; }));
}

TEST_CASE("outputs are complete and reproducible") {
  const RunConfig cfg = parse_config(kSmall);
  const RunSummary& s = small_run();
  const fs::path a = scratch("a"), b = scratch("b");
  emit_outputs(s, cfg, a);
  emit_outputs(run(cfg), cfg, b);
  CHECK(slurp(a / "summary.csv") == slurp(b / "summary.csv"));
  CHECK(slurp(a / "constants.csv") == slurp(b / "constants.csv"));
  CHECK(slurp(a / "u_0.nlhf") == slurp(b / "u_0.nlhf"));

  const auto rows = lines(slurp(a / "summary.csv"));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == kSummaryHeader);
  for (const auto& r : rows) CHECK(columns(r) == 10);
  const auto consts = lines(slurp(a / "constants.csv"));
  REQUIRE(consts.size() >= 2);
  for (const auto& r : consts) CHECK(columns(r) == columns(consts[0]));

  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    const std::string tag = std::to_string(i);
    for (const char* stem : {"u_", "phi_", "psi_"}) CHECK(fs::exists(a / (stem + tag + ".nlhf")));
    const ScalarField u = read_nlhf(a / ("u_" + tag + ".nlhf"));
    REQUIRE(u.size() == s.rows[i].u.size());
    CHECK(std::equal(u.values().begin(), u.values().end(), s.rows[i].u.values().begin()));
    const auto slice = lines(slurp(a / ("slice_" + tag + ".csv")));
    REQUIRE(!slice.empty());
    for (std::size_t k = 1; k < slice.size(); ++k) CHECK(columns(slice[k]) == 3);
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("nonnegative weight reduces to the single-variable problem") {
  std::string text = kSmall;
  text.replace(text.find("minus_amplitude = 2"), 19, "minus_amplitude = 0");
  const RunSummary s = run(parse_config(text));
  REQUIRE(s.constants_computed);
  CHECK(s.constants.beta == 0.0);
  CHECK(s.constants.lambda0 == 0.0);
  CHECK(s.constants.aminus_cells == 0);
  CHECK(s.skipped_lambdas.empty());
  REQUIRE(s.rows.size() == 3);
  for (const auto& r : s.rows) {
    CHECK(r.converged);
    CHECK(r.psi_norm == 0.0);
    CHECK(r.residual_integral <= 1e-6);
  }
}

TEST_CASE("failed positivity aborts the sweep") {
  // Two negative disks of radius 0.6 whose centers are 2.2 apart, where the
  // kernel is negative; one positive disk away from them.
  const Grid g(2, 64, 6.0);
  ScalarField q(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto x = g.position(i);
    if (std::hypot(x[0] + 1.1, x[1]) < 0.6 || std::hypot(x[0] - 1.1, x[1]) < 0.6) q[i] = -1.0;
    if (std::hypot(x[0], x[1] - 2.0) < 0.4) q[i] = 1.0;
  }
  const fs::path dir = scratch("bump");
  write_nlhf(q, dir / "q.nlhf");
  const std::string text = R"([grid]
N = 2
M = 64
L = 6
[problem]
p = 6
lambdas = 10, 20
[weight]
kind = from_file
path = q.nlhf
)";
  const RunConfig cfg = parse_config(text, dir);
  const RunSummary s = run(cfg);
  CHECK_FALSE(s.constants.positivity_pass);
  CHECK(s.constants.min_eigenvalue < 0.0);
  CHECK_FALSE(s.constants.diameter_criterion);
  CHECK(s.rows.empty());
  CHECK(s.exit_code(RunStage::full) == 2);
  CHECK(s.exit_code(RunStage::constants) == 2);
  CHECK(std::any_of(s.messages.begin(), s.messages.end(),
                    [](const std::string& m) { return m.find("positivity") != std::string::npos; }));
  emit_outputs(s, cfg, dir / "out");
  CHECK(lines(slurp(dir / "out" / "summary.csv")).size() == 1);
  CHECK(slurp(dir / "out" / "constants.csv").find("positivity") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("constants stage stops before the sweep") {
  RunOptions opt;
  opt.stage = RunStage::constants;
  const RunSummary s = run(parse_config(kSmall), opt);
  CHECK(s.constants_computed);
  CHECK(s.rows.empty());
  CHECK(s.exit_code(RunStage::constants) == 0);
  CHECK(s.exit_code(RunStage::full) == 4);
}

TEST_CASE("parallel workers match the cold serial run") {
  std::string text = std::string(kSmall) + "[mp]\nwarm_start = false\n";
  const RunConfig cfg = parse_config(text);
  RunOptions par;
  par.workers = 2;
  CHECK(summary_csv(run(cfg)) == summary_csv(run(cfg, par)));
}

TEST_CASE("slice of a three-dimensional field") {
  const Grid g(3, 8, 2.0);
  ScalarField u(g);
  for (std::size_t i = 0; i < g.size(); ++i) u[i] = static_cast<double>(i);
  const auto rows = lines(slice_csv(u));
  // Header plus one row per node of the midplane.
  REQUIRE(rows.size() == 1 + 64);
  CHECK(rows[0] == "x,y,u");
  for (std::size_t k = 1; k < rows.size(); ++k) CHECK(columns(rows[k]) == 3);
}

// Copyright 2026 The nlhdual Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "nlh/config.hpp"

using namespace nlh;

namespace {

const char* kMinimal = R"(# two balls in the plane
[grid]
N = 2
M = 64
L = 8

[problem]
p = 6
lambdas = 4, 6, 8

[weight]
kind = two_balls
plus_center = -1.5, 0
plus_radius = 1
minus_center = 1.5, 0
minus_radius = 0.3
)";

/// Line number carried by the ConfigError thrown for text, or -1.
int error_line(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

std::string error_message(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("minimal config") {
  const RunConfig c = parse_config(kMinimal);
  CHECK(c.dim == 2);
  CHECK(c.points == 64);
  CHECK(c.half_extent == 8.0);
  CHECK(c.p == 6.0);
  REQUIRE(c.lambdas.size() == 3);
  CHECK(c.lambdas[0] == 4.0);
  CHECK(c.lambdas[2] == 8.0);
  const auto* tb = std::get_if<TwoBalls>(&c.weight);
  REQUIRE(tb != nullptr);
  CHECK(tb->plus_center[0] == -1.5);
  CHECK(tb->minus_radius == 0.3);
  CHECK(tb->plus_amplitude == 1.0);
  CHECK(c.nodes == 17);
  CHECK(c.max_iters == 5000);
  CHECK(c.restarts == 5);
  CHECK(c.tol_mp == 1e-7);
}

TEST_CASE("dotted keys and geometric lambda grid") {
  std::string text = std::string(kMinimal) +
                     "[mp]\nnodes = 21\ngrid.M = 32\nwarm_start = false\n"
                     "[output]\ndir = /tmp/somewhere\nfields = no\n";
  text.erase(text.find("M = 64\n"), 7);
  RunConfig c = parse_config(text);
  CHECK(c.points == 32);
  CHECK(c.nodes == 21);
  CHECK_FALSE(c.warm_start);
  CHECK_FALSE(c.write_fields);
  CHECK(c.output_dir == "/tmp/somewhere");

  const std::string geo = R"([grid]
N = 2
M = 32
L = 4
[problem]
p = 6
lambda_min = 1
lambda_max = 100
lambda_count = 3
[weight]
kind = two_balls
plus_center = -1, 0
plus_radius = 0.5
minus_center = 1, 0
minus_radius = 0.3
)";
  c = parse_config(geo);
  REQUIRE(c.lambdas.size() == 3);
  CHECK(c.lambdas[0] == doctest::Approx(1.0));
  CHECK(c.lambdas[1] == doctest::Approx(10.0));
  CHECK(c.lambdas[2] == doctest::Approx(100.0));
}

TEST_CASE("unknown keys and sections are rejected with their line") {
  const std::string text = std::string(kMinimal) + "gridd.M = 32\n";
  const std::string msg = error_message(text);
  CHECK(msg.find("gridd.M") != std::string::npos);
  CHECK(error_line(text) == 17);
  CHECK(error_line(std::string(kMinimal) + "[gird]\n") == 17);
  CHECK(error_line("[grid]\nN = 2\nMM = 4\n") == 3);
  // A key that belongs to another weight kind.
  CHECK(error_message(std::string(kMinimal) + "ring_inner = 1\n").find("ring_inner") != std::string::npos);
}

TEST_CASE("malformed lines carry line numbers") {
  CHECK(error_line("[grid]\nN 2\n") == 2);
  CHECK(error_line("[grid]\nN = two\n") == 2);
  CHECK(error_line("[grid]\nN = 2\nN = 3\n") == 3);
  CHECK(error_line("[grid\n") == 1);
  CHECK(error_line("N = 2\n") == 1);  // key outside any section
}

TEST_CASE("validation of invariants") {
  auto with = [](const std::string& extra) { return std::string(kMinimal) + extra; };
  CHECK_THROWS_AS(parse_config(with("grid.M = 32\n")), ConfigError);  // duplicate key
  CHECK(error_message(std::string(kMinimal).replace(std::string(kMinimal).find("p = 6"), 5, "p = 2"))
            .find("p") != std::string::npos);
  CHECK(error_line(std::string(kMinimal).replace(std::string(kMinimal).find("p = 6"), 5, "p = 2")) > 0);
  CHECK_THROWS_AS(parse_config(std::string(kMinimal).replace(std::string(kMinimal).find("4, 6, 8"), 7, "4, -1")),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(std::string(kMinimal).replace(std::string(kMinimal).find("M = 64"), 6, "M = 48")),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(std::string(kMinimal).replace(std::string(kMinimal).find("N = 2"), 5, "N = 7")),
                  ConfigError);
}

TEST_CASE("strict exponent window") {
  const ExponentWindow w3 = exponent_window(3);
  CHECK(w3.lower == doctest::Approx(4.0));
  CHECK(w3.upper == doctest::Approx(6.0));
  const ExponentWindow w4 = exponent_window(4);
  CHECK(w4.lower == doctest::Approx(10.0 / 3.0));
  CHECK(w4.upper == doctest::Approx(4.0));
  CHECK(std::isinf(exponent_window(2).upper));

  const std::string base = R"([grid]
N = 3
M = 16
L = 4
[problem]
strict = true
lambdas = 2
[weight]
kind = two_balls
plus_center = -1, 0, 0
plus_radius = 0.5
minus_center = 1, 0, 0
minus_radius = 0.3
)";
  // 3 < 2 * 4 / 2 = 4.
  CHECK_THROWS_AS(parse_config(base + "[problem]\np = 3\n"), ConfigError);
  CHECK(error_message(base + "problem.p = 3\n").find("strict") != std::string::npos);
  CHECK_NOTHROW(parse_config(base + "problem.p = 4\n"));
  CHECK_NOTHROW(parse_config(base + "problem.p = 5.9\n"));
  CHECK_THROWS_AS(parse_config(base + "problem.p = 6\n"), ConfigError);
  // Strict mode needs N >= 3.
  std::string planar = base;
  planar.replace(planar.find("N = 3"), 5, "N = 2");
  planar.replace(planar.find("-1, 0, 0"), 8, "-1, 0");
  planar.replace(planar.find("1, 0, 0"), 7, "1, 0");
  CHECK_THROWS_AS(parse_config(planar + "problem.p = 6\n"), ConfigError);
  // Without strict mode any p > 2 is accepted.
  std::string loose = base;
  loose.replace(loose.find("strict = true"), 13, "strict = false");
  CHECK_NOTHROW(parse_config(loose + "problem.p = 3\n"));
}

TEST_CASE("weight kinds") {
  const std::string head = "[grid]\nN = 2\nM = 32\nL = 4\n[problem]\np = 6\nlambdas = 2\n";
  const RunConfig ring = parse_config(head +
                                      "[weight]\nkind = ball_ring\ncenter = 0, 0\nball_radius = 0.4\n"
                                      "ball_amplitude = 1\nring_inner = 1.0\nring_outer = 1.5\n"
                                      "ring_amplitude = -1\nprofile = smooth\n");
  const auto* br = std::get_if<BallRing>(&ring.weight);
  REQUIRE(br != nullptr);
  CHECK(br->ring_outer == 1.5);
  CHECK(br->profile == Profile::smooth);
  CHECK_THROWS_AS(parse_config(head + "[weight]\nkind = stripes\n"), ConfigError);
  CHECK_THROWS_AS(parse_config(head + "[weight]\nkind = two_balls\nprofile = fuzzy\n"), ConfigError);

  const RunConfig file = parse_config(head + "[weight]\nkind = from_file\npath = q.nlhf\n", "/data/runs");
  const auto* ff = std::get_if<FromFile>(&file.weight);
  REQUIRE(ff != nullptr);
  CHECK(ff->path == std::filesystem::path("/data/runs/q.nlhf"));
}

TEST_CASE("load_config reads from disk") {
  const auto dir = std::filesystem::temp_directory_path() / "nlhdual_test_config";
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "run.cfg");
    out << kMinimal << "[output]\ndir = results\n";
  }
  const RunConfig c = load_config(dir / "run.cfg");
  CHECK(c.points == 64);
  CHECK(c.output_dir == dir / "results");
  CHECK_THROWS_AS(load_config(dir / "missing.cfg"), ConfigError);
  std::filesystem::remove_all(dir);
}

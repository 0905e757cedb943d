// Copyright 2026 The nlhdual Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "nlh/grid_field.hpp"

namespace fs = std::filesystem;

namespace {

const char* kConfig = R"([grid]
N = 2
M = 32
L = 4
[problem]
p = 6
lambdas = 3, 6
seed = 3
[weight]
kind = two_balls
profile = smooth
plus_center = -1, 0
plus_radius = 0.9
minus_center = 0.9, 0
minus_radius = 0.4
minus_amplitude = 2
[output]
dir = out
)";

struct Workspace {
  fs::path dir;
  explicit Workspace(const std::string& name) : dir(fs::temp_directory_path() / ("nlhdual_cli_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Workspace() { fs::remove_all(dir); }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name) << text;
    return dir / name;
  }
};

int cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + NLHDUAL_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("check validates only") {
  Workspace ws("check");
  const fs::path good = ws.write("good.cfg", kConfig);
  CHECK(cli("check \"" + good.string() + "\"", ws.dir / "log") == 0);
  CHECK_FALSE(fs::exists(ws.dir / "out"));

  const fs::path bad = ws.write("bad.cfg", std::string(kConfig) + "gridd.M = 16\n");
  CHECK(cli("check \"" + bad.string() + "\"", ws.dir / "log") == 3);
  const std::string log = slurp(ws.dir / "log");
  CHECK(log.find("gridd.M") != std::string::npos);
  CHECK(log.find("line 19") != std::string::npos);

  CHECK(cli("check \"" + (ws.dir / "missing.cfg").string() + "\"", ws.dir / "log") == 3);
}

TEST_CASE("solve writes outputs and honors the seed override") {
  Workspace ws("solve");
  const fs::path cfg = ws.write("run.cfg", kConfig);
  REQUIRE(cli("solve \"" + cfg.string() + "\"", ws.dir / "log") == 0);
  for (const char* f : {"summary.csv", "constants.csv", "u_0.nlhf", "phi_1.nlhf", "psi_1.nlhf", "slice_0.csv"}) {
    CHECK(fs::exists(ws.dir / "out" / f));
  }
  const std::string first = slurp(ws.dir / "out" / "summary.csv");
  CHECK(first.rfind("lambda,converged,level,phi_norm,psi_norm,u_norm_p,res_integral,res_pde,iters,restarts\n", 0) == 0);

  REQUIRE(cli("solve --seed 3 \"" + cfg.string() + "\"", ws.dir / "log") == 0);
  CHECK(slurp(ws.dir / "out" / "summary.csv") == first);

  const std::string cold = std::string(kConfig) + "[mp]\nwarm_start = false\n";
  const fs::path cold_cfg = ws.write("cold.cfg", cold);
  REQUIRE(cli("solve \"" + cold_cfg.string() + "\"", ws.dir / "log") == 0);
  const std::string serial = slurp(ws.dir / "out" / "summary.csv");
  REQUIRE(cli("--workers 2 solve \"" + cold_cfg.string() + "\"", ws.dir / "log") == 0);
  CHECK(slurp(ws.dir / "out" / "summary.csv") == serial);
  REQUIRE(cli("solve --workers 2 \"" + cold_cfg.string() + "\"", ws.dir / "log") == 0);
  CHECK(slurp(ws.dir / "out" / "summary.csv") == serial);
  CHECK(cli("solve --workers 0 \"" + cold_cfg.string() + "\"", ws.dir / "log") != 0);
}

TEST_CASE("constants stage") {
  Workspace ws("constants");
  const fs::path cfg = ws.write("run.cfg", kConfig);
  CHECK(cli("constants \"" + cfg.string() + "\"", ws.dir / "log") == 0);
  CHECK(fs::exists(ws.dir / "out" / "constants.csv"));
  CHECK_FALSE(fs::exists(ws.dir / "out" / "u_0.nlhf"));
  CHECK(slurp(ws.dir / "log").find("lambda0") != std::string::npos);
}

TEST_CASE("positivity failure exits with 2") {
  Workspace ws("positivity");
  const nlh::Grid g(2, 64, 6.0);
  nlh::ScalarField q(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto x = g.position(i);
    if (std::hypot(x[0] + 1.1, x[1]) < 0.6 || std::hypot(x[0] - 1.1, x[1]) < 0.6) q[i] = -1.0;
    if (std::hypot(x[0], x[1] - 2.0) < 0.4) q[i] = 1.0;
  }
  nlh::write_nlhf(q, ws.dir / "q.nlhf");
  const fs::path cfg = ws.write("run.cfg",
                                "[grid]\nN = 2\nM = 64\nL = 6\n[problem]\np = 6\nlambdas = 10\n"
                                "[weight]\nkind = from_file\npath = q.nlhf\n[output]\ndir = out\n");
  CHECK(cli("solve \"" + cfg.string() + "\"", ws.dir / "log") == 2);
  CHECK(cli("constants \"" + cfg.string() + "\"", ws.dir / "log") == 2);
  CHECK(slurp(ws.dir / "log").find("positivity") != std::string::npos);
}

TEST_CASE("no converged lambda exits with 4") {
  Workspace ws("noconv");
  const fs::path cfg = ws.write("run.cfg", std::string(kConfig) + "[mp]\nmax_iters = 1\nrestarts = 0\npolish = false\n");
  CHECK(cli("solve \"" + cfg.string() + "\"", ws.dir / "log") == 4);
  CHECK(fs::exists(ws.dir / "out" / "summary.csv"));
}

TEST_CASE("usage errors") {
  Workspace ws("usage");
  CHECK(cli("", ws.dir / "log") != 0);
  CHECK(cli("frobnicate x.cfg", ws.dir / "log") != 0);
}

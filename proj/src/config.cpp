// Copyright 2026 The nlhdual Authors
// SPDX-License-Identifier: Apache-2.0

#include "nlh/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace nlh {

ConfigError::ConfigError(int line, const std::string& message)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"grid", {"N", "M", "L"}},
      {"problem", {"p", "strict", "lambdas", "lambda_min", "lambda_max", "lambda_count", "tol_inner", "tol_mp", "seed"}},
      {"weight",
       {"kind", "profile", "plus_center", "plus_radius", "plus_amplitude", "minus_center", "minus_radius",
        "minus_amplitude", "center", "ball_radius", "ball_amplitude", "ring_inner", "ring_outer", "ring_amplitude",
        "path"}},
      {"mp", {"nodes", "max_iters", "restarts", "warm_start", "polish"}},
      {"output", {"dir", "fields"}},
  };
  return keys;
}

const std::set<std::string> kTwoBallsKeys = {"plus_center", "plus_radius", "plus_amplitude",
                                             "minus_center", "minus_radius", "minus_amplitude"};
const std::set<std::string> kBallRingKeys = {"center",     "ball_radius", "ball_amplitude",
                                             "ring_inner", "ring_outer",  "ring_amplitude"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Entry {
  std::string value;
  int line;
};

double to_double(const Entry& e, const std::string& key) {
  const std::string v = trim(e.value);
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError(e.line, key + ": expected a finite number, got '" + v + "'");
  }
  return out;
}

long long to_integer(const Entry& e, const std::string& key) {
  const std::string v = trim(e.value);
  long long out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError(e.line, key + ": expected an integer, got '" + v + "'");
  }
  return out;
}

int to_int(const Entry& e, const std::string& key) {
  const long long v = to_integer(e, key);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ConfigError(e.line, key + ": integer out of range");
  }
  return static_cast<int>(v);
}

bool to_bool(const Entry& e, const std::string& key) {
  const std::string v = trim(e.value);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(e.line, key + ": expected true or false, got '" + v + "'");
}

std::vector<double> to_list(const Entry& e, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(e.value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double({item, e.line}, key));
  if (out.empty()) throw ConfigError(e.line, key + ": empty list");
  return out;
}

Profile to_profile(const Entry& e) {
  const std::string v = trim(e.value);
  if (v == "sharp") return Profile::sharp;
  if (v == "smooth") return Profile::smooth;
  throw ConfigError(e.line, "weight.profile: expected sharp or smooth, got '" + v + "'");
}

std::array<double, kMaxDim> to_point(const Entry& e, const std::string& key, int dim) {
  const auto v = to_list(e, key);
  if (static_cast<int>(v.size()) != dim) {
    throw ConfigError(e.line, key + ": expected " + std::to_string(dim) + " coordinates, got " +
                                  std::to_string(v.size()));
  }
  std::array<double, kMaxDim> out{};
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

}  // namespace

ExponentWindow exponent_window(int dim) {
  const double n = static_cast<double>(dim);
  const double lower = dim > 1 ? 2.0 * (n + 1.0) / (n - 1.0) : std::numeric_limits<double>::infinity();
  const double upper = dim > 2 ? 2.0 * n / (n - 2.0) : std::numeric_limits<double>::infinity();
  return {lower, upper};
}

void validate(const RunConfig& c) {
  if (c.dim < 2 || c.dim > kMaxDim) throw ConfigError(0, "grid.N must be between 2 and " + std::to_string(kMaxDim));
  if (c.points < 8 || (c.points & (c.points - 1)) != 0) throw ConfigError(0, "grid.M must be a power of two, at least 8");
  if (!(c.half_extent > 0.0)) throw ConfigError(0, "grid.L must be positive");
  if (!(c.p > 2.0)) throw ConfigError(0, "problem.p must exceed 2");
  if (c.strict) {
    if (c.dim < 3) throw ConfigError(0, "strict mode requires N >= 3");
    const auto w = exponent_window(c.dim);
    if (!(c.p >= w.lower && c.p < w.upper)) {
      std::ostringstream msg;
      msg << "strict mode: p = " << c.p << " lies outside the admissible window [" << w.lower << ", " << w.upper
          << ") for N = " << c.dim;
      throw ConfigError(0, msg.str());
    }
  }
  if (c.lambdas.empty()) throw ConfigError(0, "problem: no lambda values given");
  for (double l : c.lambdas) {
    if (!(l > 0.0)) throw ConfigError(0, "problem: every lambda must be positive");
  }
  if (c.tol_inner < 0.0) throw ConfigError(0, "problem.tol_inner must be >= 0");
  if (!(c.tol_mp > 0.0)) throw ConfigError(0, "problem.tol_mp must be positive");
  if (c.nodes < 9) throw ConfigError(0, "mp.nodes must be at least 9");
  if (c.max_iters < 1) throw ConfigError(0, "mp.max_iters must be positive");
  if (c.restarts < 0) throw ConfigError(0, "mp.restarts must be >= 0");
  if (c.output_dir.empty()) throw ConfigError(0, "output.dir must not be empty");
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  std::map<std::string, Entry> entries;  // "section.key" -> value
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  const auto& known = known_keys();
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(line_no, "malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      if (!known.count(section)) throw ConfigError(line_no, "unknown section '" + section + "'");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(line_no, "expected key = value, got '" + line + "'");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(line_no, "missing key before '='");
    std::string sec = section;
    if (const auto dot = key.find('.'); dot != std::string::npos) {
      sec = key.substr(0, dot);
      key = key.substr(dot + 1);
    }
    const std::string full = sec.empty() ? key : sec + "." + key;
    const auto it = known.find(sec);
    if (it == known.end() || !it->second.count(key)) throw ConfigError(line_no, "unknown key '" + full + "'");
    if (value.empty()) throw ConfigError(line_no, full + ": missing value");
    if (!entries.emplace(full, Entry{value, line_no}).second) {
      throw ConfigError(line_no, "duplicate key '" + full + "' (first set on line " +
                                     std::to_string(entries.at(full).line) + ")");
    }
  }

  RunConfig c;
  auto get = [&](const std::string& k) -> const Entry* {
    const auto it = entries.find(k);
    return it == entries.end() ? nullptr : &it->second;
  };
  auto require = [&](const std::string& k) -> const Entry& {
    const Entry* e = get(k);
    if (!e) throw ConfigError(0, "missing required key '" + k + "'");
    return *e;
  };
  auto positive = [&](const Entry& e, const std::string& k) {
    const double v = to_double(e, k);
    if (!(v > 0.0)) throw ConfigError(e.line, k + " must be positive");
    return v;
  };

  {
    const Entry& e = require("grid.N");
    c.dim = to_int(e, "grid.N");
    if (c.dim < 2 || c.dim > kMaxDim) throw ConfigError(e.line, "grid.N must be between 2 and " + std::to_string(kMaxDim));
  }
  {
    const Entry& e = require("grid.M");
    c.points = to_int(e, "grid.M");
    if (c.points < 8 || (c.points & (c.points - 1)) != 0) throw ConfigError(e.line, "grid.M must be a power of two, at least 8");
  }
  c.half_extent = positive(require("grid.L"), "grid.L");

  {
    const Entry& e = require("problem.p");
    c.p = to_double(e, "problem.p");
    if (!(c.p > 2.0)) throw ConfigError(e.line, "problem.p must exceed 2");
  }
  if (const Entry* e = get("problem.strict")) c.strict = to_bool(*e, "problem.strict");
  const Entry* list = get("problem.lambdas");
  const Entry* lmin = get("problem.lambda_min");
  const Entry* lmax = get("problem.lambda_max");
  const Entry* lcount = get("problem.lambda_count");
  if (list && (lmin || lmax || lcount)) {
    throw ConfigError(list->line, "problem.lambdas cannot be combined with lambda_min/lambda_max/lambda_count");
  }
  if (list) {
    c.lambdas = to_list(*list, "problem.lambdas");
    for (double l : c.lambdas) {
      if (!(l > 0.0)) throw ConfigError(list->line, "problem.lambdas: every lambda must be positive");
    }
  } else if (lmin || lmax || lcount) {
    if (!(lmin && lmax && lcount)) {
      throw ConfigError((lmin ? lmin : lmax ? lmax : lcount)->line,
                        "geometric lambda grid needs lambda_min, lambda_max and lambda_count");
    }
    const double a = positive(*lmin, "problem.lambda_min");
    const double b = positive(*lmax, "problem.lambda_max");
    const int n = to_int(*lcount, "problem.lambda_count");
    if (n < 1) throw ConfigError(lcount->line, "problem.lambda_count must be positive");
    if (b < a) throw ConfigError(lmax->line, "problem.lambda_max must be >= lambda_min");
    if (n == 1 && b != a) throw ConfigError(lcount->line, "problem.lambda_count = 1 needs lambda_min = lambda_max");
    for (int i = 0; i < n; ++i) {
      const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
      c.lambdas.push_back(i == n - 1 ? b : a * std::pow(b / a, t));
    }
  } else {
    throw ConfigError(0, "problem: give either lambdas or lambda_min/lambda_max/lambda_count");
  }
  if (const Entry* e = get("problem.tol_inner")) {
    c.tol_inner = to_double(*e, "problem.tol_inner");
    if (c.tol_inner < 0.0) throw ConfigError(e->line, "problem.tol_inner must be >= 0");
  }
  if (const Entry* e = get("problem.tol_mp")) c.tol_mp = positive(*e, "problem.tol_mp");
  if (const Entry* e = get("problem.seed")) {
    const long long s = to_integer(*e, "problem.seed");
    if (s < 0) throw ConfigError(e->line, "problem.seed must be >= 0");
    c.seed = static_cast<std::uint64_t>(s);
  }

  // Weight: the kind decides which parameter keys are allowed.
  const Entry& kind_entry = require("weight.kind");
  const std::string kind = trim(kind_entry.value);
  auto forbid = [&](const std::set<std::string>& keys, const std::string& what) {
    for (const auto& k : keys) {
      if (const Entry* e = get("weight." + k)) {
        throw ConfigError(e->line, "weight." + k + " is not a parameter of kind " + what);
      }
    }
  };
  auto opt_double = [&](const std::string& k, double& out) {
    if (const Entry* e = get("weight." + k)) out = to_double(*e, "weight." + k);
  };
  Profile profile = Profile::sharp;
  if (const Entry* e = get("weight.profile")) profile = to_profile(*e);
  if (kind == "two_balls") {
    forbid(kBallRingKeys, kind);
    if (const Entry* e = get("weight.path")) throw ConfigError(e->line, "weight.path is not a parameter of kind " + kind);
    TwoBalls w;
    w.profile = profile;
    w.plus_center = to_point(require("weight.plus_center"), "weight.plus_center", c.dim);
    opt_double("plus_radius", w.plus_radius);
    opt_double("plus_amplitude", w.plus_amplitude);
    if (const Entry* e = get("weight.minus_center")) w.minus_center = to_point(*e, "weight.minus_center", c.dim);
    opt_double("minus_radius", w.minus_radius);
    opt_double("minus_amplitude", w.minus_amplitude);
    c.weight = w;
  } else if (kind == "ball_ring") {
    forbid(kTwoBallsKeys, kind);
    if (const Entry* e = get("weight.path")) throw ConfigError(e->line, "weight.path is not a parameter of kind " + kind);
    BallRing w;
    w.profile = profile;
    if (const Entry* e = get("weight.center")) w.center = to_point(*e, "weight.center", c.dim);
    opt_double("ball_radius", w.ball_radius);
    opt_double("ball_amplitude", w.ball_amplitude);
    opt_double("ring_inner", w.ring_inner);
    opt_double("ring_outer", w.ring_outer);
    opt_double("ring_amplitude", w.ring_amplitude);
    c.weight = w;
  } else if (kind == "from_file") {
    forbid(kTwoBallsKeys, kind);
    forbid(kBallRingKeys, kind);
    if (const Entry* e = get("weight.profile")) throw ConfigError(e->line, "weight.profile does not apply to from_file");
    std::filesystem::path path = trim(require("weight.path").value);
    if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
    c.weight = FromFile{path};
  } else {
    throw ConfigError(kind_entry.line, "weight.kind: expected two_balls, ball_ring or from_file, got '" + kind + "'");
  }

  auto mp_int = [&](const std::string& k, int& out, int min) {
    if (const Entry* e = get("mp." + k)) {
      out = to_int(*e, "mp." + k);
      if (out < min) throw ConfigError(e->line, "mp." + k + " must be at least " + std::to_string(min));
    }
  };
  mp_int("nodes", c.nodes, 9);
  mp_int("max_iters", c.max_iters, 1);
  mp_int("restarts", c.restarts, 0);
  if (const Entry* e = get("mp.warm_start")) c.warm_start = to_bool(*e, "mp.warm_start");
  if (const Entry* e = get("mp.polish")) c.newton_polish = to_bool(*e, "mp.polish");

  if (const Entry* e = get("output.dir")) {
    c.output_dir = trim(e->value);
    if (c.output_dir.is_relative() && !base_dir.empty()) c.output_dir = base_dir / c.output_dir;
  }
  if (const Entry* e = get("output.fields")) c.write_fields = to_bool(*e, "output.fields");

  if (c.strict) {
    const int line = get("problem.strict")->line;
    if (c.dim < 3) throw ConfigError(line, "strict mode requires N >= 3");
    const auto w = exponent_window(c.dim);
    if (!(c.p >= w.lower && c.p < w.upper)) {
      std::ostringstream msg;
      msg << "strict mode: p = " << c.p << " lies outside the admissible window [" << w.lower << ", " << w.upper
          << ") for N = " << c.dim;
      throw ConfigError(line, msg.str());
    }
  }
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(0, "cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

}  // namespace nlh

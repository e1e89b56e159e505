// Copyright 2026 The csgd Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#pragma once

// Experiment configuration: flat key = value lines with suite., algo. and
// run. prefixes. '#' starts a comment.
//
//   suite.kind          quadratic | nonconvex
//   suite.file          path to a saved suite (overrides the generator keys)
//   suite.d, suite.n, suite.mu, suite.L, suite.zeta_star_sq, suite.sigma,
//   suite.reg, suite.seed
//   algo.name           dsgd | dqsgd | defsgd | diana | defsgd-bias |
//                       ecsgd-diana | dqsgd-linear-sync | defsgd-linear-sync
//   algo.gamma          number, or "cap" for the theorem's stepsize bound
//   algo.alpha          number, or "auto" (1/(1+omega), beta/(1+omega))
//   algo.beta, algo.quantizer, algo.compressor, algo.x0 (comma list)
//   run.T, run.seeds    (comma list, ranges a..b allowed), run.output,
//   run.metrics         (comma list of CSV columns), run.check_invariants,
//   run.class           strongly-convex | convex | nonconvex (for tune)

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "csgd/algorithms.hpp"
#include "csgd/compressors.hpp"
#include "csgd/problems.hpp"
#include "csgd/suite_io.hpp"
#include "csgd/tuning.hpp"

namespace csgd {

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {"t",           "f_gap",          "grad_norm_sq",
                                                "x_dist_sq",   "err_sq_mean",    "h_dist_sq_mean",
                                                "lyapunov",    "msg_size_estimate"};
  return cols;
}

struct SuiteSpec {
  std::string file;
  SuiteKind kind = SuiteKind::kQuadratic;
  Index d = 8;
  Index n = 4;
  double mu = 1.0;
  double L = 10.0;
  double zeta_star_sq = 0.0;
  double sigma = 0.0;
  double reg = -1.0;
  std::uint64_t seed = 0;
};

struct ExperimentConfig {
  std::map<std::string, std::string> entries;  // normalized raw values
  std::map<std::string, int> lines;            // source line of each key
  std::string origin = "<config>";
  std::string base_dir;  // relative suite.file paths resolve against it

  SuiteSpec suite;
  Algorithm algorithm = Algorithm::kDsgd;
  std::string gamma = "0";
  std::string alpha = "0";
  double beta = 1.0;
  std::string quantizer;
  std::string compressor;
  std::vector<double> x0;
  std::size_t T = 100;
  std::vector<std::uint64_t> seeds = {0};
  std::string output;
  std::vector<std::string> metrics = csv_columns();
  bool check_invariants = true;
  ObjectiveClass objective = ObjectiveClass::kStronglyConvex;
};

namespace detail {

inline ConfigError config_error(const ExperimentConfig& cfg, const std::string& key, const std::string& msg) {
  auto it = cfg.lines.find(key);
  std::string where = cfg.origin;
  if (it != cfg.lines.end()) where += ":" + std::to_string(it->second);
  return ConfigError(where + ": field '" + key + "': " + msg);
}

class ConfigParser {
 public:
  explicit ConfigParser(ExperimentConfig& cfg) : cfg_(cfg) {}

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw config_error(cfg_, key, msg);
  }

  double number(const std::string& key, const std::string& v) const {
    double out = 0.0;
    const char* b = v.data();
    const char* e = b + v.size();
    auto [p, ec] = std::from_chars(b, e, out);
    if (ec != std::errc() || p != e || !std::isfinite(out)) fail(key, "expected a number, got '" + v + "'");
    return out;
  }

  std::uint64_t count(const std::string& key, const std::string& v) const {
    std::uint64_t out = 0;
    const char* b = v.data();
    const char* e = b + v.size();
    auto [p, ec] = std::from_chars(b, e, out);
    if (ec != std::errc() || p != e) fail(key, "expected a nonnegative integer, got '" + v + "'");
    return out;
  }

  bool boolean(const std::string& key, const std::string& v) const {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(key, "expected true or false, got '" + v + "'");
  }

  static std::vector<std::string> split(const std::string& v, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(v);
    while (std::getline(in, cur, sep)) {
      std::string t = trim(cur);
      if (!t.empty()) out.push_back(t);
    }
    return out;
  }

  std::vector<std::uint64_t> seed_list(const std::string& key, const std::string& v) const {
    std::vector<std::uint64_t> out;
    for (const auto& item : split(v, ',')) {
      const auto dots = item.find("..");
      if (dots == std::string::npos) {
        out.push_back(count(key, item));
        continue;
      }
      const std::uint64_t a = count(key, trim(item.substr(0, dots)));
      const std::uint64_t b = count(key, trim(item.substr(dots + 2)));
      if (b < a || b - a > 100000) fail(key, "bad seed range '" + item + "'");
      for (std::uint64_t s = a; s <= b; ++s) out.push_back(s);
    }
    if (out.empty()) fail(key, "seed list is empty");
    return out;
  }

  void apply(const std::string& key, const std::string& v) {
    auto& c = cfg_;
    if (key == "suite.kind") {
      if (v == "quadratic") c.suite.kind = SuiteKind::kQuadratic;
      else if (v == "nonconvex") c.suite.kind = SuiteKind::kNonconvexRegularized;
      else fail(key, "expected quadratic or nonconvex");
    } else if (key == "suite.file") {
      const std::filesystem::path f(v);
      c.suite.file = f.is_relative() && !c.base_dir.empty() ? (std::filesystem::path(c.base_dir) / f).string() : v;
    } else if (key == "suite.d") {
      c.suite.d = static_cast<Index>(count(key, v));
    } else if (key == "suite.n") {
      c.suite.n = static_cast<Index>(count(key, v));
    } else if (key == "suite.mu") {
      c.suite.mu = number(key, v);
    } else if (key == "suite.L") {
      c.suite.L = number(key, v);
    } else if (key == "suite.zeta_star_sq") {
      c.suite.zeta_star_sq = number(key, v);
    } else if (key == "suite.sigma") {
      c.suite.sigma = number(key, v);
    } else if (key == "suite.reg") {
      c.suite.reg = number(key, v);
    } else if (key == "suite.seed") {
      c.suite.seed = count(key, v);
    } else if (key == "algo.name") {
      try {
        c.algorithm = parse_algorithm(v);
      } catch (const ConfigError& e) {
        fail(key, e.what());
      }
    } else if (key == "algo.gamma") {
      if (v != "cap") number(key, v);
      c.gamma = v;
    } else if (key == "algo.alpha") {
      if (v != "auto") number(key, v);
      c.alpha = v;
    } else if (key == "algo.beta") {
      c.beta = number(key, v);
    } else if (key == "algo.quantizer") {
      c.quantizer = v;
    } else if (key == "algo.compressor") {
      c.compressor = v;
    } else if (key == "algo.x0") {
      c.x0.clear();
      for (const auto& item : split(v, ',')) c.x0.push_back(number(key, item));
    } else if (key == "run.T") {
      c.T = static_cast<std::size_t>(count(key, v));
    } else if (key == "run.seeds") {
      c.seeds = seed_list(key, v);
    } else if (key == "run.output") {
      c.output = v;
    } else if (key == "run.metrics") {
      std::vector<std::string> m = split(v, ',');
      const auto& all = csv_columns();
      for (const auto& name : m)
        if (std::find(all.begin(), all.end(), name) == all.end()) fail(key, "unknown metric '" + name + "'");
      c.metrics.clear();
      for (const auto& name : all)
        if (name == "t" || std::find(m.begin(), m.end(), name) != m.end()) c.metrics.push_back(name);
    } else if (key == "run.check_invariants") {
      c.check_invariants = boolean(key, v);
    } else if (key == "run.class") {
      try {
        c.objective = parse_objective_class(v);
      } catch (const ConfigError& e) {
        fail(key, e.what());
      }
    } else {
      fail(key, "unknown key");
    }
  }

  void finish() {
    auto& c = cfg_;
    if (c.seeds.empty()) fail("run.seeds", "seed list is empty");
    if (!c.suite.file.empty() && !std::filesystem::exists(c.suite.file))
      fail("suite.file", "file '" + c.suite.file + "' does not exist");
    if (c.suite.file.empty()) {
      if (c.suite.d < 1) fail("suite.d", "must be >= 1");
      if (c.suite.n < 1) fail("suite.n", "must be >= 1");
      if (!(c.suite.L > 0.0)) fail("suite.L", "must be > 0");
      if (c.suite.mu < 0.0 || c.suite.mu > c.suite.L) fail("suite.mu", "must lie in [0, L]");
      if (c.suite.zeta_star_sq < 0.0) fail("suite.zeta_star_sq", "must be >= 0");
      if (c.suite.zeta_star_sq > 0.0 && c.suite.n < 2) fail("suite.zeta_star_sq", "needs suite.n >= 2");
    }
    if (c.suite.sigma < 0.0) fail("suite.sigma", "must be >= 0");
    if (!c.x0.empty() && c.suite.file.empty() && static_cast<Index>(c.x0.size()) != c.suite.d)
      fail("algo.x0", "has " + std::to_string(c.x0.size()) + " entries, expected suite.d");
    if (uses_quantizer(c.algorithm) && c.quantizer.empty()) fail("algo.quantizer", "required by " + to_string(c.algorithm));
    if (uses_compressor(c.algorithm) && c.compressor.empty())
      fail("algo.compressor", "required by " + to_string(c.algorithm));
  }

 private:
  ExperimentConfig& cfg_;
};

}  // namespace detail

// Re-derives the typed fields from cfg.entries.
inline void reparse(ExperimentConfig& cfg) {
  ExperimentConfig fresh;
  fresh.entries = cfg.entries;
  fresh.lines = cfg.lines;
  fresh.origin = cfg.origin;
  fresh.base_dir = cfg.base_dir;
  detail::ConfigParser p(fresh);
  for (const auto& [k, v] : fresh.entries) p.apply(k, v);
  p.finish();
  cfg = std::move(fresh);
}

inline ExperimentConfig parse_config(std::istream& in, const std::string& origin = "<config>",
                                     const std::string& base_dir = "") {
  ExperimentConfig cfg;
  cfg.origin = origin;
  cfg.base_dir = base_dir;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value', got '" + t + "'");
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string value = detail::trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    if (cfg.entries.count(key))
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": field '" + key + "': duplicate key");
    cfg.entries[key] = value;
    cfg.lines[key] = lineno;
  }
  reparse(cfg);
  return cfg;
}

inline ExperimentConfig parse_config_string(const std::string& text, const std::string& origin = "<config>") {
  std::istringstream in(text);
  return parse_config(in, origin);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  // Relative suite files resolve against the config's directory.
  return parse_config(in, path, std::filesystem::path(path).parent_path().string());
}

inline ExperimentConfig with_override(const ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  ExperimentConfig out = cfg;
  out.entries[key] = value;
  reparse(out);
  return out;
}

inline ProblemSuite build_suite(const ExperimentConfig& cfg) {
  const SuiteSpec& s = cfg.suite;
  try {
    if (!s.file.empty()) {
      ProblemSuite suite = load_suite(s.file);
      if (cfg.entries.count("suite.sigma")) suite.sigma = s.sigma;
      return suite;
    }
    const RngStream rng(s.seed, 0, 0, Channel::kGeneration);
    if (s.kind == SuiteKind::kQuadratic) {
      QuadraticSuiteParams p;
      p.d = s.d;
      p.n = s.n;
      p.mu = s.mu;
      p.L = s.L;
      p.zeta_star_sq = s.zeta_star_sq;
      p.sigma = s.sigma;
      return gen_quadratic_suite(p, rng);
    }
    NonconvexSuiteParams p;
    p.d = s.d;
    p.n = s.n;
    p.L = s.L;
    p.zeta_star_sq = s.zeta_star_sq;
    p.sigma = s.sigma;
    p.reg = s.reg;
    return gen_nonconvex_suite(p, rng);
  } catch (const ParameterError& e) {
    throw ConfigError(cfg.origin + ": suite: " + e.what());
  }
}

// Parameters of the theorem maps as measured on a concrete suite. Z is set
// to 1 and zeta^2 to the dissimilarity at the optimum.
inline SuiteParams suite_params(const ProblemSuite& s) {
  SuiteParams p;
  p.L = s.L;
  p.mu = s.mu;
  p.sigma = s.sigma;
  p.zeta = std::sqrt(s.zeta_star_sq);
  p.Z = 1.0;
  p.n = static_cast<double>(s.n);
  return p;
}

inline CompressorParams compressor_params(const AlgoConfig& a) {
  CompressorParams c;
  if (a.compressor && a.compressor->delta()) c.delta = *a.compressor->delta();
  if (a.quantizer && a.quantizer->omega()) c.omega = *a.quantizer->omega();
  c.alpha = a.alpha;
  c.beta = a.beta;
  return c;
}

// Builds the run configuration for one seed. "cap" resolves to the
// theorem's stepsize bound on this suite.
inline AlgoConfig build_algo(const ExperimentConfig& cfg, const ProblemSuite& suite, std::uint64_t seed) {
  AlgoConfig a;
  a.algorithm = cfg.algorithm;
  a.beta = cfg.beta;
  a.T = cfg.T;
  a.seed = seed;
  a.check_invariants = cfg.check_invariants;
  a.keep_iterates = false;
  auto op = [&cfg, &suite](const std::string& key, const std::string& spec) {
    try {
      return CompressorOp::parse(spec, suite.d);
    } catch (const ParameterError& e) {
      throw detail::config_error(cfg, key, e.what());
    }
  };
  if (!cfg.quantizer.empty()) a.quantizer = op("algo.quantizer", cfg.quantizer);
  if (!cfg.compressor.empty()) a.compressor = op("algo.compressor", cfg.compressor);
  if (!cfg.x0.empty()) {
    if (static_cast<Index>(cfg.x0.size()) != suite.d)
      throw detail::config_error(cfg, "algo.x0", "dimension does not match the suite");
    a.x0 = Eigen::Map<const Vector>(cfg.x0.data(), static_cast<Index>(cfg.x0.size()));
  }
  const double omega = a.quantizer && a.quantizer->omega() ? *a.quantizer->omega() : 0.0;
  if (cfg.alpha == "auto") {
    a.alpha = (cfg.algorithm == Algorithm::kDefsgdBias ? a.beta : 1.0) / (1.0 + omega);
  } else {
    a.alpha = std::stod(cfg.alpha);
  }
  if (cfg.gamma == "cap") {
    try {
      a.gamma = theorem_stepsize_cap(a.algorithm, suite_params(suite), compressor_params(a), cfg.objective);
    } catch (const ParameterError& e) {
      throw detail::config_error(cfg, "algo.gamma", e.what());
    }
  } else {
    a.gamma = std::stod(cfg.gamma);
  }
  validate(suite, a);
  return a;
}

}  // namespace csgd

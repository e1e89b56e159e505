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

// csgd command-line front end.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "csgd.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 2;
constexpr int kInvariant = 3;

std::vector<std::string> split_values(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) {
    const std::string v = csgd::detail::trim(item);
    if (!v.empty()) out.push_back(v);
  }
  return out;
}

int cmd_run(const std::string& path, const std::string& output) {
  csgd::ExperimentConfig cfg = csgd::load_config(path);
  if (!output.empty()) cfg = csgd::with_override(cfg, "run.output", output);
  const auto res = csgd::run_experiment(cfg, csgd::detail::default_threads());
  std::printf("algorithm %s gamma %.17g alpha %.17g\n", csgd::to_string(cfg.algorithm).c_str(), res.gamma,
              res.alpha);
  for (const auto& r : res.runs) {
    const auto& last = r.trace.back();
    std::printf("seed %llu T %zu f_gap %.17g", static_cast<unsigned long long>(r.seed), last.t, last.f_gap);
    if (!r.csv_file.empty()) std::printf(" csv %s", r.csv_file.c_str());
    std::printf("\n");
  }
  return kOk;
}

int cmd_sweep(const std::string& path, const std::string& axis, const std::string& values,
              const std::string& output) {
  csgd::ExperimentConfig cfg = csgd::load_config(path);
  if (!output.empty()) cfg = csgd::with_override(cfg, "run.output", output);
  const auto grid = csgd::sweep_grid(cfg, axis, split_values(values));
  const auto rep = csgd::compare_scaling(grid, axis);
  std::cout << csgd::format_report(rep);
  return kOk;
}

int cmd_verify(const std::string& spec, csgd::Index dim, std::size_t samples, std::uint64_t seed) {
  const csgd::CompressorOp op = csgd::CompressorOp::parse(spec, dim);
  const csgd::RngStream base(seed, 0, 0, csgd::Channel::kMonteCarlo);
  csgd::Vector x(dim);
  csgd::RngStream xs = base.substream(samples);
  for (csgd::Index j = 0; j < dim; ++j) x[j] = xs.normal();
  const auto est = csgd::estimate_moments(op, x, samples, base);
  std::printf("spec %s dim %lld samples %zu\n", op.to_string().c_str(), static_cast<long long>(dim), samples);
  std::printf("bias_norm %.6g\n", est.bias_norm);
  if (op.omega()) {
    std::printf("second_moment %.6g +- %.3g bound %.6g\n", *est.second_moment_ratio, *est.second_moment_stderr,
                1.0 + *op.omega());
  }
  if (op.delta()) {
    std::printf("contraction %.6g +- %.3g bound %.6g\n", *est.contraction_ratio, *est.contraction_stderr,
                1.0 - *op.delta());
  }
  return kOk;
}

int cmd_tune(const std::string& path, const std::string& cls_name) {
  csgd::ExperimentConfig cfg = csgd::load_config(path);
  const csgd::ObjectiveClass cls = cls_name.empty() ? cfg.objective : csgd::parse_objective_class(cls_name);
  if (cfg.gamma == "cap") cfg = csgd::with_override(cfg, "algo.gamma", "0");
  const csgd::ProblemSuite suite = csgd::build_suite(cfg);
  const csgd::AlgoConfig a = csgd::build_algo(cfg, suite, cfg.seeds.front());
  const csgd::Vector x0 = a.x0.size() ? a.x0 : csgd::Vector::Zero(suite.d);
  const double r0 = cls == csgd::ObjectiveClass::kNonconvex ? suite.value(x0) - suite.f_star
                                                            : (x0 - suite.x_star).squaredNorm();
  const auto t = csgd::tune_for(a.algorithm, csgd::suite_params(suite), csgd::compressor_params(a), cls, r0, cfg.T);
  std::printf("algorithm %s class %s T %zu\n", csgd::to_string(a.algorithm).c_str(), csgd::to_string(cls).c_str(),
              cfg.T);
  std::printf("gamma %.17g\ntau %.17g\nbranch %s\ncap %.17g\n", t.stepsize.gamma, t.stepsize.tau,
              csgd::to_string(t.stepsize.branch).c_str(), t.cap);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed SGD with compressed communication on heterogeneous data"};
  app.require_subcommand(1);

  std::string config, output, axis, values, spec, cls;
  long long dim = 0;
  std::size_t samples = 10000;
  std::uint64_t seed = 0;

  auto* run = app.add_subcommand("run", "run every seed of a config");
  run->add_option("config", config, "config file")->required();
  run->add_option("-o,--output", output, "CSV path, overrides run.output");

  auto* sweep = app.add_subcommand("sweep", "sweep one config key and report plateaus");
  sweep->add_option("config", config, "config file")->required();
  sweep->add_option("--axis", axis, "config key to vary")->required();
  sweep->add_option("--values", values, "comma-separated values")->required();
  sweep->add_option("-o,--output", output, "CSV path stem, overrides run.output");

  auto* verify = app.add_subcommand("verify-compressor", "Monte Carlo moments of a compressor");
  verify->add_option("spec", spec, "e.g. topk:2 or randk-unbiased:4")->required();
  verify->add_option("--dim", dim, "dimension")->required()->check(CLI::PositiveNumber);
  verify->add_option("--samples", samples, "sample count")->check(CLI::PositiveNumber);
  verify->add_option("--seed", seed, "seed");

  auto* tune = app.add_subcommand("tune", "tuned stepsize for a config");
  tune->add_option("config", config, "config file")->required();
  tune->add_option("--class", cls, "strongly-convex, convex or nonconvex");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*run) return cmd_run(config, output);
    if (*sweep) return cmd_sweep(config, axis, values, output);
    if (*verify) return cmd_verify(spec, static_cast<csgd::Index>(dim), samples, seed);
    if (*tune) return cmd_tune(config, cls);
  } catch (const csgd::InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return kInvariant;
  } catch (const csgd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  }
  return kOk;
}

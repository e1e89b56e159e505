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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"

namespace {

using namespace csgd;
using csgd::testing::first_divergence;
using csgd::testing::quadratic;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [fail: " << what << "]";
    }
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// --- 1 -----------------------------------------------------------------
Outcome compressor_moments() {
  Outcome out;
  const Index d = 16;
  const std::size_t samples = 100000;
  int bias_checks = 0;
  int bias_fail = 0;
  double worst_z = 0.0;
  for (const char* spec : {"identity", "randk-unbiased:1", "randk-unbiased:2", "randk-unbiased:4", "randk-unbiased:8"}) {
    const CompressorOp q = CompressorOp::parse(spec, d);
    const double omega = *q.omega();
    int ratio_fail = 0;
    for (std::uint64_t v = 0; v < 50; ++v) {
      RngStream gen(v, 0, 0, Channel::kMonteCarlo);
      Vector x(d);
      for (Index j = 0; j < d; ++j) x[j] = gen.normal();
      const auto est = estimate_moments(q, x, samples, RngStream(1000 + v, 0, 0, Channel::kQuantizer));
      for (Index j = 0; j < d; ++j) {
        ++bias_checks;
        const double err = std::abs(est.mean[j] - x[j]);
        const double se = est.mean_stderr[j];
        if (err > 4.0 * se) ++bias_fail;
        if (se > 0.0) worst_z = std::max(worst_z, err / se);
      }
      const double r = *est.second_moment_ratio;
      const double rel = r > 0.0 ? *est.second_moment_stderr / r : 0.0;
      if (!(r <= (1.0 + omega) * (1.0 + 4.0 * rel))) ++ratio_fail;
    }
    out.require(ratio_fail == 0, std::string(spec) + " second moment above (1+omega) on " +
                                     std::to_string(ratio_fail) + " vectors");
  }
  out.require(bias_fail == 0, std::to_string(bias_fail) + " components with bias above 4 stderr");
  int violations = 0;
  for (Index k : {1, 2, 4, 8, 15}) {
    for (std::uint64_t v = 0; v < 10000; ++v) {
      RngStream gen(v, static_cast<std::uint64_t>(k), 0, Channel::kMonteCarlo);
      Vector x(d);
      for (Index j = 0; j < d; ++j) x[j] = gen.normal();
      if (!((top_k(x, k) - x).squaredNorm() <= (1.0 - static_cast<double>(k) / d) * x.squaredNorm())) ++violations;
    }
  }
  out.require(violations == 0, std::to_string(violations) + " top-k contraction violations");
  out.detail << " bias checks=" << bias_checks << " max |bias|/stderr=" << num(worst_z)
             << " top-k violations=" << violations << "/50000";
  return out;
}

// --- 2 -----------------------------------------------------------------
Outcome exact_reductions() {
  Outcome out;
  const auto s = quadratic(4, 2, 1.0, 0.5, 3);
  AlgoConfig base;
  base.gamma = 0.02;
  base.T = 100;
  base.seed = 7;
  base.x0 = Vector::Ones(4);
  const CompressorOp id = CompressorOp::identity(4);
  const CompressorOp q2 = CompressorOp::parse("randk-unbiased:2", 4);
  const auto sgd = run_dsgd(s, base).iterates;
  auto dq = base;
  dq.algorithm = Algorithm::kDqsgd;
  dq.quantizer = q2;
  const auto dq_ref = run(s, dq).iterates;

  struct Case {
    std::string name;
    AlgoConfig cfg;
    const std::vector<Vector>* reference;
  };
  std::vector<Case> cases;
  auto with = [&base](Algorithm a) {
    auto c = base;
    c.algorithm = a;
    return c;
  };
  {
    auto c = with(Algorithm::kDqsgd);
    c.quantizer = id;
    cases.push_back({"dqsgd(omega=0)==dsgd", c, &sgd});
  }
  {
    auto c = with(Algorithm::kDefsgd);
    c.compressor = id;
    cases.push_back({"defsgd(delta=1)==dsgd", c, &sgd});
  }
  {
    auto c = with(Algorithm::kDiana);
    c.quantizer = q2;
    c.alpha = 0.0;
    cases.push_back({"diana(alpha=0)==dqsgd", c, &dq_ref});
  }
  {
    auto c = with(Algorithm::kDefsgdBias);
    c.compressor = id;
    c.quantizer = id;
    c.alpha = 1.0;
    c.beta = 1.0;
    cases.push_back({"defsgd-bias(omega=0,delta=1,alpha=1)==dsgd", c, &sgd});
    c.alpha = 0.0;
    cases.push_back({"defsgd-bias(omega=0,delta=1,alpha=0)==dsgd", c, &sgd});
  }
  {
    auto c = with(Algorithm::kEcsgdDiana);
    c.compressor = id;
    c.quantizer = q2;
    c.alpha = 0.5;
    cases.push_back({"ecsgd-diana(delta=1,alpha=1/2)==dsgd", c, &sgd});
    c.alpha = 0.0;
    cases.push_back({"ecsgd-diana(delta=1,alpha=0)==dsgd", c, &sgd});
  }
  {
    auto c = with(Algorithm::kDqsgdLinearSync);
    c.quantizer = id;
    cases.push_back({"dqsgd-linear-sync(identity)==dsgd", c, &sgd});
    auto e = with(Algorithm::kDefsgdLinearSync);
    e.compressor = id;
    cases.push_back({"defsgd-linear-sync(identity)==dsgd", e, &sgd});
  }
  int ok = 0;
  for (const auto& c : cases) {
    const auto tr = run(s, c.cfg).iterates;
    const auto div = first_divergence(tr, *c.reference);
    if (div) {
      const double gap = csgd::testing::max_relative_gap(tr, *c.reference);
      out.require(false, c.name + " differs from round " + std::to_string(*div) + ", max rel gap " + num(gap));
    } else {
      ++ok;
    }
  }
  out.detail << " bitwise pairs " << ok << "/" << cases.size() << " over T=100";
  return out;
}

// --- 3 -----------------------------------------------------------------
Outcome virtual_sequence() {
  Outcome out;
  const auto s = quadratic(8, 4, 1.0, 1.0, 4);
  double worst = 0.0;
  for (Algorithm a : {Algorithm::kDefsgd, Algorithm::kDefsgdBias, Algorithm::kEcsgdDiana}) {
    AlgoConfig c;
    c.algorithm = a;
    c.compressor = CompressorOp::parse("topk:1", 8);
    c.quantizer = CompressorOp::parse("randk-unbiased:1", 8);
    c.alpha = 1.0 / 8.0;
    c.T = 1000;
    c.seed = 11;
    c.x0 = Vector::Ones(8);
    c.keep_iterates = false;
    c.check_invariants = false;
    c.gamma = theorem_stepsize_cap(a, suite_params(s), compressor_params(c));
    double w = 0.0;
    for (const auto& row : run(s, c).trace) w = std::max(w, row.virtual_residual);
    out.require(w <= 1e-9, to_string(a) + " residual " + num(w));
    worst = std::max(worst, w);
  }
  out.detail << " max relative residual " << num(worst) << " over T=1000";
  return out;
}

// Setting shared by criteria 4 and 5.
ProblemSuite heterogeneous_suite(Index n = 4) { return quadratic(8, n, 1.0, 0.0, 1); }

double max_shift_error(const ProblemSuite& s, const Trajectory& tr) {
  double worst = 0.0;
  for (Index i = 0; i < s.n; ++i)
    worst = std::max(worst, (tr.workers[static_cast<std::size_t>(i)].h - s.grad_star[static_cast<std::size_t>(i)]).norm());
  return worst;
}

// --- 4 -----------------------------------------------------------------
Outcome bias_correction() {
  Outcome out;
  const auto s = heterogeneous_suite();
  for (Algorithm a : {Algorithm::kDiana, Algorithm::kDefsgdBias, Algorithm::kEcsgdDiana}) {
    AlgoConfig c;
    c.algorithm = a;
    c.quantizer = CompressorOp::parse("randk-unbiased:1", 8);
    if (a != Algorithm::kDiana) c.compressor = CompressorOp::parse("topk:1", 8);
    c.alpha = 1.0 / 8.0;
    c.beta = 1.0;
    c.T = 50000;
    c.seed = 1;
    c.keep_iterates = false;
    c.gamma = theorem_stepsize_cap(a, suite_params(s), compressor_params(c));
    const auto tr = run(s, c);
    const double F = tr.trace.back().f_gap;
    const double h = max_shift_error(s, tr);
    out.require(F <= 1e-10, to_string(a) + " F_T=" + num(F));
    out.require(h <= 1e-6, to_string(a) + " shift error " + num(h));
    out.detail << " " << to_string(a) << ": gamma=" << num(c.gamma) << " F_T=" << num(F) << " maxh=" << num(h) << ";";
  }
  return out;
}

// --- 5 -----------------------------------------------------------------
const std::string kPlateauSuite =
    "suite.d = 8\nsuite.n = 4\nsuite.mu = 1\nsuite.L = 10\nsuite.zeta_star_sq = 1\nsuite.sigma = 0\n"
    "suite.seed = 1\nrun.T = 50000\nalgo.gamma = cap\n";

Outcome heterogeneity_plateau() {
  Outcome out;
  const auto dq = parse_config_string(
      kPlateauSuite + "algo.name = dqsgd\nalgo.quantizer = randk-unbiased:1\nrun.seeds = 1..20\n", "plateau-dqsgd");
  const double g = run_experiment(with_override(with_override(dq, "run.T", "1"), "run.seeds", "1")).gamma;
  const auto grid = sweep_grid(dq, "algo.gamma", {detail::fmt17(g), detail::fmt17(g / 2), detail::fmt17(g / 4)});
  const auto rep = compare_scaling(grid, "algo.gamma");
  out.require(rep.rows[0].plateau.level >= 1e-6, "dqsgd plateau " + num(rep.rows[0].plateau.level));
  out.detail << " dqsgd plateaus";
  for (const auto& row : rep.rows) out.detail << " " << num(row.plateau.level);
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    const double r = 1.0 / rep.rows[i].ratio_to_previous->value;
    out.require(r >= 1.6 && r <= 2.4, "halving ratio " + num(r));
    out.detail << (i == 1 ? "; ratios " : " ") << num(r);
  }
  const auto ef =
      parse_config_string(kPlateauSuite + "algo.name = defsgd\nalgo.compressor = topk:1\nrun.seeds = 1\n", "plateau-defsgd");
  const auto res = run_experiment(ef);
  const auto runs = f_gap_runs(res);
  const Plateau p = seed_plateau(runs, default_plateau_tail(runs.front().size()));
  out.require(p.level >= 1e-6, "defsgd plateau " + num(p.level));
  out.detail << "; defsgd gamma=" << num(res.gamma) << " plateau " << num(p.level);
  return out;
}

// --- 6 -----------------------------------------------------------------
Plateau noisy_plateau(const ProblemSuite& s, AlgoConfig c, int seeds) {
  std::vector<std::vector<double>> runs(static_cast<std::size_t>(seeds));
  c.keep_iterates = false;
  detail::parallel_for(runs.size(), detail::default_threads(), [&](std::size_t k) {
    AlgoConfig ck = c;
    ck.seed = 1000 + k;
    runs[k] = f_gap_series(run(s, ck).trace);
  });
  return seed_plateau(runs, default_plateau_tail(c.T + 1));
}

bool ratio_in(const Ratio& r, double lo, double hi) {
  return r.value + 4.0 * r.stderr_ >= lo && r.value - 4.0 * r.stderr_ <= hi;
}

Outcome sigma_scaling() {
  Outcome out;
  const int seeds = 20;
  const auto s = quadratic(10, 4, 0.0, 1.0, 21, 1.0, 2.0);
  AlgoConfig q;
  q.algorithm = Algorithm::kDqsgd;
  q.gamma = 0.01;
  q.T = 20000;
  q.x0 = s.x_star;
  q.quantizer = CompressorOp::identity(10);
  const Plateau q0 = noisy_plateau(s, q, seeds);
  q.quantizer = CompressorOp::parse("randk-unbiased:1", 10);
  const Plateau q9 = noisy_plateau(s, q, seeds);
  const Ratio rq = *ratio(q9, q0);
  out.require(ratio_in(rq, 6.0, 14.0), "dqsgd omega ratio " + num(rq.value));

  const double delta = 0.1;
  AlgoConfig e;
  e.algorithm = Algorithm::kDefsgd;
  // Keeps the cubic term of the recursion at 5% of the quadratic one.
  e.gamma = 0.05 * delta / (12.0 * s.L * static_cast<double>(s.n) * (1.0 - delta));
  e.T = 100000;
  e.x0 = s.x_star;
  e.compressor = CompressorOp::identity(10);
  const Plateau e1 = noisy_plateau(s, e, seeds);
  e.compressor = CompressorOp::parse("topk:1", 10);
  const Plateau e01 = noisy_plateau(s, e, seeds);
  const Ratio re = *ratio(e01, e1);
  out.require(ratio_in(re, 0.5, 2.0), "defsgd delta ratio " + num(re.value));
  out.detail << " dqsgd omega 9 vs 0: " << num(rq.value) << " +- " << num(rq.stderr_) << "; defsgd delta 0.1 vs 1: "
             << num(re.value) << " +- " << num(re.stderr_) << " (gamma=" << num(e.gamma) << ", " << seeds << " seeds)";
  return out;
}

// --- 7 -----------------------------------------------------------------
Outcome linear_collapse() {
  Outcome out;
  const auto s = heterogeneous_suite(8);
  AlgoConfig c;
  c.algorithm = Algorithm::kDefsgdLinearSync;
  c.compressor = CompressorOp::parse("sketch:coord:2", 8);
  c.T = 1000;
  c.seed = 5;
  c.x0 = Vector::Zero(8);
  c.gamma = theorem_stepsize_cap(c.algorithm, suite_params(s), compressor_params(c));
  const auto tr = run_linear_sync(s, c);
  const auto ref = csgd::testing::single_node_ef(s, *c.compressor, c.gamma, c.T, c.seed, c.x0);
  const auto div = first_divergence(tr.iterates, ref);
  const double gap = csgd::testing::max_relative_gap(tr.iterates, ref);
  out.require(!div, "n=8 and single-node iterates differ from round " + (div ? std::to_string(*div) : "") +
                        ", max rel gap " + num(gap));
  out.detail << " max rel gap to single-node reference " << num(gap) << ";";
  for (const char* spec : {"sketch:coord:2", "topk:1"}) {
    auto l = c;
    l.compressor = CompressorOp::parse(spec, 8);
    l.gamma = theorem_stepsize_cap(l.algorithm, suite_params(s), compressor_params(l));
    l.T = 50000;
    l.keep_iterates = false;
    const double F = run_linear_sync(s, l).trace.back().f_gap;
    out.require(F <= 1e-10, std::string(spec) + " F_T=" + num(F));
    out.detail << " " << spec << " F_T=" << num(F);
  }
  return out;
}

// --- 8 -----------------------------------------------------------------
Outcome tuners() {
  Outcome out;
  RecursionConstants k;
  k.A = 1;
  k.E = 10;
  k.C = 1;
  k.r0 = 1;
  const auto t = tune_strongly_convex(k, 999);
  const double expect = std::log(1e6) / 1000.0;
  out.require(std::abs(t.gamma - expect) <= 1e-12, "strongly convex example " + num(t.gamma));
  RecursionConstants u;
  u.r0 = 1;
  u.C = 1;
  u.E = 1;
  const auto v = tune_sublinear(u, 99);
  out.require(std::abs(v.gamma - 0.1) <= 1e-12, "sublinear example " + num(v.gamma));
  RecursionConstants z;
  z.A = 1;
  z.E = 7;
  out.require(tune_strongly_convex(z, 10).gamma == 1.0 / 7.0, "noiseless example");

  RngStream rng(4, 0, 0, Channel::kMonteCarlo);
  int checked = 0;
  int over = 0;
  for (int i = 0; i < 100; ++i) {
    SuiteParams s;
    s.L = std::exp(4 * rng.uniform() - 1);
    s.mu = s.L * std::exp(-6 * rng.uniform());
    s.sigma = rng.uniform() < 0.2 ? 0.0 : std::exp(4 * rng.uniform() - 2);
    s.zeta = rng.uniform() < 0.2 ? 0.0 : std::exp(4 * rng.uniform() - 2);
    s.Z = 1.0 + 3.0 * rng.uniform();
    s.n = static_cast<double>(1 + rng.uniform_index(64));
    CompressorParams c;
    c.delta = 0.01 + 0.99 * rng.uniform();
    c.omega = rng.uniform() < 0.2 ? 0.0 : std::exp(5 * rng.uniform() - 1);
    c.beta = 0.05 + 0.95 * rng.uniform();
    c.alpha = c.beta / (1.0 + c.omega) * (0.01 + 0.99 * rng.uniform());
    const double r0 = std::exp(6 * rng.uniform() - 3);
    const std::size_t T = 1 + rng.uniform_index(100000);
    for (Algorithm a : {Algorithm::kDsgd, Algorithm::kDqsgd, Algorithm::kDefsgd, Algorithm::kDiana,
                        Algorithm::kDefsgdBias, Algorithm::kDqsgdLinearSync, Algorithm::kDefsgdLinearSync}) {
      for (auto cls : {ObjectiveClass::kStronglyConvex, ObjectiveClass::kConvex, ObjectiveClass::kNonconvex}) {
        const auto r = tune_for(a, s, c, cls, r0, T);
        ++checked;
        if (!(r.stepsize.gamma > 0.0 && r.stepsize.gamma <= r.cap)) ++over;
      }
    }
  }
  out.require(over == 0, std::to_string(over) + " tuned stepsizes above the cap");
  out.detail << " examples " << num(t.gamma) << ", " << num(v.gamma) << "; grid " << checked << " tunings, " << over
             << " above cap";
  return out;
}

// --- 9 -----------------------------------------------------------------
Outcome lyapunov_step() {
  Outcome out;
  const auto s = quadratic(8, 4, 1.0, 1.0, 5);
  const double delta = 1.0 / 8.0;
  const double omega = 7.0;
  const double L = s.L;
  const double n = static_cast<double>(s.n);
  const double s2 = s.sigma * s.sigma;
  for (double beta : {1.0, delta}) {
    AlgoConfig c;
    c.algorithm = Algorithm::kDefsgdBias;
    c.quantizer = CompressorOp::parse("randk-unbiased:1", 8);
    c.compressor = CompressorOp::parse("topk:1", 8);
    c.gamma = lyapunov_stepsize_cap(delta, L);
    c.beta = beta;
    c.alpha = beta / (1.0 + omega);
    c.seed = 9;
    c.x0 = Vector::Ones(8);
    c.keep_iterates = false;
    const double g = c.gamma;
    const double contraction = std::min({g * s.mu / 2.0, c.alpha / 2.0, delta / 4.0});
    for (int warm : {0, 200, 5000}) {
      Simulator sim(s, c);
      for (int t = 0; t < warm; ++t) sim.step();
      const TraceRow now = sim.metrics();
      const double rhs = (1.0 - contraction) * now.lyapunov - g * now.f_gap / 4.0 + g * g * s2 / n +
                         g * g * g * 4.0 * L * (1.0 - delta) * s2 / delta +
                         g * g * g * 32.0 * beta * L * (1.0 - delta) * s2 / (delta * delta);
      const int N = 10000;
      std::vector<double> next(N);
      detail::parallel_for(next.size(), detail::default_threads(), [&](std::size_t k) {
        Simulator cp = sim;
        cp.reseed(100000 + k);
        cp.step();
        next[k] = cp.metrics().lyapunov;
      });
      double mean = 0.0;
      for (double v : next) mean += v;
      mean /= N;
      double ss = 0.0;
      for (double v : next) ss += (v - mean) * (v - mean);
      const double se = std::sqrt(ss / (N - 1.0) / N);
      out.require(mean <= rhs + 4.0 * se, "beta=" + num(beta) + " warm-up " + std::to_string(warm) + ": mean " +
                                              num(mean) + " > bound " + num(rhs));
      out.detail << " beta=" << num(beta) << "/t=" << warm << ": slack " << num((rhs - mean) / se) << " se;";
    }
  }
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    std::function<Outcome()> fn;
  };
  const std::vector<Criterion> all{
      {1, "compressor moments", compressor_moments},
      {2, "exact reductions", exact_reductions},
      {3, "virtual-sequence identity", virtual_sequence},
      {4, "bias-correction convergence", bias_correction},
      {5, "heterogeneity plateau", heterogeneity_plateau},
      {6, "sigma-scaling split", sigma_scaling},
      {7, "linear-compressor collapse", linear_collapse},
      {8, "stepsize tuners", tuners},
      {9, "Lyapunov one-step check", lyapunov_step},
  };
  int failed = 0;
  for (const auto& c : all) {
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    if (!o.pass) ++failed;
    std::printf("criterion %d %-28s %s%s\n", c.id, c.title, o.pass ? "PASS" : "FAIL", o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
  return failed == 0 ? 0 : 1;
}

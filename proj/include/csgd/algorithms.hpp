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

// Simulated training schemes. Every scheme is a state machine over n
// workers and one server; workers run sequentially in index order and the
// server reduces their messages in that order, so a run is a pure function
// of (suite, config).
//
// Randomness per round t:
//   stochastic gradient of worker i   RngStream(seed, i, t, kNoise)
//   quantizer of worker i             RngStream(seed, i, t, kQuantizer)
//   compressor of worker i            RngStream(seed, i, t, kCompressor)
//   synchronized operator             RngStream::synchronized(seed, t, ...)

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "csgd/compressors.hpp"
#include "csgd/problems.hpp"
#include "csgd/rng.hpp"
#include "csgd/trace.hpp"
#include "csgd/types.hpp"

namespace csgd {

enum class Algorithm {
  kDsgd,              // plain distributed SGD, the reduction target
  kDqsgd,             // quantized updates
  kDefsgd,            // error feedback
  kDiana,             // quantized gradient differences with shifts
  kDefsgdBias,        // error feedback with bias correction
  kEcsgdDiana,        // error feedback with DIANA shifts (compensated input)
  kDqsgdLinearSync,   // quantized, one shared linear quantizer per round
  kDefsgdLinearSync,  // error feedback, one shared linear compressor per round
};

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kDsgd: return "dsgd";
    case Algorithm::kDqsgd: return "dqsgd";
    case Algorithm::kDefsgd: return "defsgd";
    case Algorithm::kDiana: return "diana";
    case Algorithm::kDefsgdBias: return "defsgd-bias";
    case Algorithm::kEcsgdDiana: return "ecsgd-diana";
    case Algorithm::kDqsgdLinearSync: return "dqsgd-linear-sync";
    case Algorithm::kDefsgdLinearSync: return "defsgd-linear-sync";
  }
  return "?";
}

inline Algorithm parse_algorithm(const std::string& name) {
  for (Algorithm a : {Algorithm::kDsgd, Algorithm::kDqsgd, Algorithm::kDefsgd, Algorithm::kDiana,
                      Algorithm::kDefsgdBias, Algorithm::kEcsgdDiana, Algorithm::kDqsgdLinearSync,
                      Algorithm::kDefsgdLinearSync})
    if (to_string(a) == name) return a;
  throw ConfigError("unknown algorithm '" + name + "'");
}

inline bool uses_error_feedback(Algorithm a) {
  return a == Algorithm::kDefsgd || a == Algorithm::kDefsgdBias || a == Algorithm::kEcsgdDiana ||
         a == Algorithm::kDefsgdLinearSync;
}

inline bool uses_shifts(Algorithm a) {
  return a == Algorithm::kDiana || a == Algorithm::kDefsgdBias || a == Algorithm::kEcsgdDiana;
}

inline bool uses_quantizer(Algorithm a) {
  return a == Algorithm::kDqsgd || a == Algorithm::kDiana || a == Algorithm::kDefsgdBias ||
         a == Algorithm::kEcsgdDiana || a == Algorithm::kDqsgdLinearSync;
}

inline bool uses_compressor(Algorithm a) {
  return a == Algorithm::kDefsgd || a == Algorithm::kDefsgdBias || a == Algorithm::kEcsgdDiana ||
         a == Algorithm::kDefsgdLinearSync;
}

inline bool is_linear_sync(Algorithm a) {
  return a == Algorithm::kDqsgdLinearSync || a == Algorithm::kDefsgdLinearSync;
}

struct AlgoConfig {
  Algorithm algorithm = Algorithm::kDsgd;
  double gamma = 0.0;
  double alpha = 0.0;  // shift stepsize (DIANA family)
  double beta = 1.0;   // bias-correction parameter (error feedback + shifts)
  std::optional<CompressorOp> quantizer;
  std::optional<CompressorOp> compressor;
  std::size_t T = 0;
  std::uint64_t seed = 0;
  Vector x0;  // empty means the origin
  bool keep_iterates = true;
  bool check_invariants = true;
};

// Tolerances of the per-round invariant checks.
inline constexpr double kVirtualSequenceTol = 1e-9;
inline constexpr double kShiftAverageTol = 1e-12;

inline void validate(const ProblemSuite& suite, const AlgoConfig& cfg) {
  const Algorithm a = cfg.algorithm;
  const std::string name = to_string(a);
  auto fail = [&name](const std::string& what) { throw ConfigError(name + ": " + what); };
  if (!(cfg.gamma >= 0.0) || !std::isfinite(cfg.gamma)) fail("gamma must be a finite value >= 0");
  if (cfg.x0.size() != 0 && cfg.x0.size() != suite.d) fail("x0 has the wrong dimension");
  if (uses_quantizer(a)) {
    if (!cfg.quantizer) fail("a quantizer is required");
    if (!cfg.quantizer->is_quantizer()) fail("'" + cfg.quantizer->to_string() + "' is not an omega-quantizer");
    if (cfg.quantizer->dim() != suite.d) fail("quantizer dimension does not match the suite");
  }
  if (uses_compressor(a)) {
    if (!cfg.compressor) fail("a compressor is required");
    if (!cfg.compressor->is_compressor())
      fail("'" + cfg.compressor->to_string() + "' is not a delta-compressor");
    if (cfg.compressor->dim() != suite.d) fail("compressor dimension does not match the suite");
  }
  if (is_linear_sync(a)) {
    const CompressorOp& op = a == Algorithm::kDqsgdLinearSync ? *cfg.quantizer : *cfg.compressor;
    if (!op.linear()) fail("synchronized schemes need a linear operator");
  }
  // Relative slack so that alpha = 1/(1+omega) computed elsewhere passes.
  auto le = [](double x, double bound) { return x <= bound * (1.0 + 1e-12); };
  if (uses_shifts(a)) {
    if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) fail("alpha must lie in [0, 1]");
    const double omega = *cfg.quantizer->omega();
    if (a == Algorithm::kDefsgdBias) {
      if (!(cfg.beta > 0.0 && cfg.beta <= 1.0)) fail("beta must lie in (0, 1]");
      if (!le(cfg.alpha, cfg.beta / (1.0 + omega))) fail("alpha must satisfy alpha <= beta / (1 + omega)");
    } else if (!le(cfg.alpha, 1.0 / (1.0 + omega))) {
      fail("alpha must satisfy alpha <= 1 / (1 + omega)");
    }
  }
}

struct WorkerState {
  Vector e;  // error memory
  Vector h;  // local shift
};

struct ServerState {
  Vector x;
  Vector h;        // server shift
  Vector x_tilde;  // virtual sequence
  std::size_t t = 0;
};

// Coefficients of Psi = X + a E + b H for the scheme's Lyapunov function;
// X is measured on the virtual sequence for error-feedback schemes.
struct LyapunovWeights {
  bool virtual_x = false;
  double a = 0.0;
  double b = 0.0;
};

inline LyapunovWeights lyapunov_weights(const ProblemSuite& suite, const AlgoConfig& cfg) {
  LyapunovWeights w;
  const double g = cfg.gamma;
  const double L = suite.L;
  const double n = static_cast<double>(suite.n);
  switch (cfg.algorithm) {
    case Algorithm::kDsgd:
    case Algorithm::kDqsgd:
    case Algorithm::kDqsgdLinearSync:
      break;
    case Algorithm::kDefsgd:
    case Algorithm::kDefsgdLinearSync:
      w.virtual_x = true;
      w.a = 12.0 * g * g * g * L / *cfg.compressor->delta();
      break;
    case Algorithm::kDiana: {
      const double omega = *cfg.quantizer->omega();
      if (cfg.alpha > 0.0) w.b = 4.0 * g * g * omega / (cfg.alpha * n);
      break;
    }
    case Algorithm::kDefsgdBias:
    case Algorithm::kEcsgdDiana: {
      const double delta = *cfg.compressor->delta();
      w.virtual_x = true;
      w.a = 12.0 * g * g * g * L / delta;
      if (cfg.alpha > 0.0) w.b = 8.0 * w.a * (1.0 - delta) / (cfg.alpha * delta);
      break;
    }
  }
  return w;
}

namespace detail {

// Heuristic bit count for one message: p indices of ceil(log2 d) bits plus
// one 64-bit float per transmitted value.
inline double message_bits(const LinearMap& m) {
  const double d = static_cast<double>(m.dim());
  const double index_bits = m.form() == LinearMap::Form::kCoordinates && d > 1 ? std::ceil(std::log2(d)) : 0.0;
  return static_cast<double>(m.nnz()) * (index_bits + 64.0);
}

}  // namespace detail

// Step-by-step simulator. Holds a reference to the suite, which must
// outlive it.
class Simulator {
 public:
  Simulator(const ProblemSuite& suite, AlgoConfig cfg) : suite_(&suite), cfg_(std::move(cfg)) {
    validate(suite, cfg_);
    const Index d = suite.d;
    server_.x = cfg_.x0.size() ? cfg_.x0 : Vector::Zero(d);
    server_.h = Vector::Zero(d);
    server_.x_tilde = server_.x;
    workers_.assign(static_cast<std::size_t>(suite.n), WorkerState{Vector::Zero(d), Vector::Zero(d)});
    scale_ = cfg_.gamma / static_cast<double>(suite.n);
    weights_ = lyapunov_weights(suite, cfg_);
  }

  const ProblemSuite& suite() const { return *suite_; }
  const AlgoConfig& config() const { return cfg_; }
  const ServerState& server() const { return server_; }
  const std::vector<WorkerState>& workers() const { return workers_; }
  double last_message_bits() const { return last_bits_; }

  // Draws all further randomness from a different master seed; used to
  // resample a step from a frozen state.
  void reseed(std::uint64_t seed) { cfg_.seed = seed; }

  void set_state(ServerState server, std::vector<WorkerState> workers) {
    detail::require(workers.size() == workers_.size(), "set_state: worker count mismatch");
    server_ = std::move(server);
    workers_ = std::move(workers);
  }

  void step() {
    const std::size_t t = server_.t;
    const Index n = suite_->n;
    const Index d = suite_->d;
    std::vector<Vector> g(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
      RngStream noise(cfg_.seed, static_cast<std::uint64_t>(i), t, Channel::kNoise);
      g[static_cast<std::size_t>(i)] = oracle_stochastic(*suite_, i, server_.x, noise);
    }
    Vector gsum = Vector::Zero(d);
    for (const auto& gi : g) gsum += gi;

    switch (cfg_.algorithm) {
      case Algorithm::kDsgd: step_dsgd(g); break;
      case Algorithm::kDqsgd: step_dqsgd(g, t); break;
      case Algorithm::kDefsgd: step_defsgd(g, t); break;
      case Algorithm::kDiana: step_diana(g, t); break;
      case Algorithm::kDefsgdBias: step_defsgd_bias(g, t); break;
      case Algorithm::kEcsgdDiana: step_ecsgd_diana(g, t); break;
      case Algorithm::kDqsgdLinearSync: step_dqsgd_sync(g, t); break;
      case Algorithm::kDefsgdLinearSync: step_defsgd_sync(g, t); break;
    }
    server_.x_tilde = server_.x_tilde - scale_ * gsum;
    server_.t = t + 1;
  }

  TraceRow metrics() const {
    const ProblemSuite& s = *suite_;
    const double n = static_cast<double>(s.n);
    TraceRow row;
    row.t = server_.t;
    row.f_gap = s.value(server_.x) - s.f_star;
    row.grad_norm_sq = s.gradient(server_.x).squaredNorm();
    row.x_dist_sq = (server_.x_tilde - s.x_star).squaredNorm();
    Vector esum = Vector::Zero(s.d);
    Vector hsum = Vector::Zero(s.d);
    double e2 = 0.0;
    double h2 = 0.0;
    for (Index i = 0; i < s.n; ++i) {
      const auto& w = workers_[static_cast<std::size_t>(i)];
      esum += w.e;
      hsum += w.h;
      e2 += w.e.squaredNorm();
      h2 += (w.h - s.grad_star[static_cast<std::size_t>(i)]).squaredNorm();
    }
    row.err_sq_mean = e2 / n;
    row.h_dist_sq_mean = h2 / n;
    const double xdist = weights_.virtual_x ? row.x_dist_sq : (server_.x - s.x_star).squaredNorm();
    row.lyapunov = xdist + weights_.a * row.err_sq_mean + weights_.b * row.h_dist_sq_mean;
    const Vector gap = (server_.x - server_.x_tilde) - scale_ * esum;
    row.virtual_residual = gap.norm() / (1.0 + server_.x.norm());
    row.shift_residual = (server_.h - hsum / n).norm() / std::max(1.0, server_.h.norm());
    return row;
  }

  // Throws InvariantViolation when a per-round identity fails.
  void check(const TraceRow& row) const {
    const Algorithm a = cfg_.algorithm;
    const bool finite = std::isfinite(row.f_gap) && std::isfinite(row.grad_norm_sq) &&
                        std::isfinite(row.x_dist_sq) && std::isfinite(row.err_sq_mean) &&
                        std::isfinite(row.h_dist_sq_mean) && std::isfinite(row.lyapunov);
    if (!finite)
      throw InvariantViolation(to_string(a) + ": non-finite metrics at round " + std::to_string(row.t));
    if (uses_error_feedback(a) && !(row.virtual_residual <= kVirtualSequenceTol))
      throw InvariantViolation(to_string(a) + ": virtual-sequence identity violated at round " +
                               std::to_string(row.t));
    if ((a == Algorithm::kDiana || a == Algorithm::kDefsgdBias || a == Algorithm::kEcsgdDiana) &&
        !(row.shift_residual <= kShiftAverageTol))
      throw InvariantViolation(to_string(a) + ": server shift differs from the worker average at round " +
                               std::to_string(row.t));
    if (suite_->kind == SuiteKind::kQuadratic && row.f_gap < -1e-12 * std::max(1.0, std::abs(suite_->f_star)))
      throw InvariantViolation(to_string(a) + ": negative suboptimality at round " + std::to_string(row.t));
  }

 private:
  RngStream worker_stream(Index i, std::size_t t, Channel c) const {
    return RngStream(cfg_.seed, static_cast<std::uint64_t>(i), t, c);
  }

  void server_step(const Vector& sum) { server_.x = server_.x - scale_ * sum; }

  void step_dsgd(const std::vector<Vector>& g) {
    Vector s = Vector::Zero(suite_->d);
    for (const auto& gi : g) s += gi;
    server_step(s);
    last_bits_ = 64.0 * static_cast<double>(suite_->d);
  }

  void step_dqsgd(const std::vector<Vector>& g, std::size_t t) {
    Vector s = Vector::Zero(suite_->d);
    double bits = 0.0;
    for (Index i = 0; i < suite_->n; ++i) {
      RngStream r = worker_stream(i, t, Channel::kQuantizer);
      const Vector& gi = g[static_cast<std::size_t>(i)];
      const LinearMap m = cfg_.quantizer->draw(gi, r);
      s += m.apply(gi);
      bits += detail::message_bits(m);
    }
    server_step(s);
    last_bits_ = bits / static_cast<double>(suite_->n);
  }

  void step_defsgd(const std::vector<Vector>& g, std::size_t t) {
    Vector s = Vector::Zero(suite_->d);
    double bits = 0.0;
    for (Index i = 0; i < suite_->n; ++i) {
      auto& w = workers_[static_cast<std::size_t>(i)];
      RngStream r = worker_stream(i, t, Channel::kCompressor);
      const Vector v = w.e + g[static_cast<std::size_t>(i)];
      const LinearMap m = cfg_.compressor->draw(v, r);
      const Vector sent = m.apply(v);
      w.e = v - sent;
      s += sent;
      bits += detail::message_bits(m);
    }
    server_step(s);
    last_bits_ = bits / static_cast<double>(suite_->n);
  }

  void step_diana(const std::vector<Vector>& g, std::size_t t) {
    const Index d = suite_->d;
    Vector s = Vector::Zero(d);
    double bits = 0.0;
    for (Index i = 0; i < suite_->n; ++i) {
      auto& w = workers_[static_cast<std::size_t>(i)];
      RngStream r = worker_stream(i, t, Channel::kQuantizer);
      const Vector diff = g[static_cast<std::size_t>(i)] - w.h;
      const LinearMap m = cfg_.quantizer->draw(diff, r);
      const Vector delta = m.apply(diff);
      w.h = w.h + cfg_.alpha * delta;
      s += delta;
      bits += detail::message_bits(m);
    }
    server_.x = server_.x - cfg_.gamma * server_.h - scale_ * s;
    server_.h = server_.h + (cfg_.alpha / static_cast<double>(suite_->n)) * s;
    last_bits_ = bits / static_cast<double>(suite_->n);
  }

  void step_defsgd_bias(const std::vector<Vector>& g, std::size_t t) {
    const Index d = suite_->d;
    Vector s_hat = Vector::Zero(d);
    Vector s_q = Vector::Zero(d);
    double bits = 0.0;
    for (Index i = 0; i < suite_->n; ++i) {
      auto& w = workers_[static_cast<std::size_t>(i)];
      const Vector& gi = g[static_cast<std::size_t>(i)];
      RngStream rc = worker_stream(i, t, Channel::kCompressor);
      RngStream rq = worker_stream(i, t, Channel::kQuantizer);
      const Vector v = w.e + gi - w.h;
      const LinearMap mc = cfg_.compressor->draw(v, rc);
      const Vector sent = mc.apply(v);
      const Vector diff = gi - w.h;
      const LinearMap mq = cfg_.quantizer->draw(diff, rq);
      const Vector delta = mq.apply(diff);
      w.e = v - sent;
      w.h = w.h + cfg_.alpha * delta;
      s_hat += sent;
      s_q += delta;
      bits += detail::message_bits(mc) + detail::message_bits(mq);
    }
    server_.x = server_.x - cfg_.gamma * server_.h - scale_ * s_hat;
    server_.h = server_.h + (cfg_.alpha / static_cast<double>(suite_->n)) * s_q;
    last_bits_ = bits / static_cast<double>(suite_->n);
  }

  void step_ecsgd_diana(const std::vector<Vector>& g, std::size_t t) {
    const Index d = suite_->d;
    Vector s_hat = Vector::Zero(d);
    double bits = 0.0;
    for (Index i = 0; i < suite_->n; ++i) {
      auto& w = workers_[static_cast<std::size_t>(i)];
      const Vector& gi = g[static_cast<std::size_t>(i)];
      RngStream rc = worker_stream(i, t, Channel::kCompressor);
      RngStream rq = worker_stream(i, t, Channel::kQuantizer);
      const Vector v = w.e + gi - w.h + server_.h;
      const LinearMap mc = cfg_.compressor->draw(v, rc);
      const Vector sent = mc.apply(v);
      const Vector diff = gi - w.h;
      const LinearMap mq = cfg_.quantizer->draw(diff, rq);
      const Vector delta = mq.apply(diff);
      w.e = v - sent;
      w.h = w.h + cfg_.alpha * delta;
      s_hat += sent;
      bits += detail::message_bits(mc) + detail::message_bits(mq);
    }
    server_step(s_hat);
    Vector hsum = Vector::Zero(d);
    for (const auto& w : workers_) hsum += w.h;
    server_.h = hsum / static_cast<double>(suite_->n);
    last_bits_ = bits / static_cast<double>(suite_->n);
  }

  // One linear map per round, shared by all workers. Top-k picks its
  // support from the average of the workers' inputs.
  LinearMap shared_map(const CompressorOp& op, const std::vector<Vector>& inputs, std::size_t t,
                       Channel channel) const {
    RngStream r = RngStream::synchronized(cfg_.seed, t, channel);
    Vector mean = Vector::Zero(suite_->d);
    for (const auto& v : inputs) mean += v;
    mean /= static_cast<double>(inputs.size());
    return op.draw(mean, r);
  }

  void step_dqsgd_sync(const std::vector<Vector>& g, std::size_t t) {
    const LinearMap m = shared_map(*cfg_.quantizer, g, t, Channel::kQuantizer);
    Vector s = Vector::Zero(suite_->d);
    for (const auto& gi : g) s += m.apply(gi);
    server_step(s);
    last_bits_ = detail::message_bits(m);
  }

  void step_defsgd_sync(const std::vector<Vector>& g, std::size_t t) {
    const Index n = suite_->n;
    std::vector<Vector> v(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i)
      v[static_cast<std::size_t>(i)] = workers_[static_cast<std::size_t>(i)].e + g[static_cast<std::size_t>(i)];
    const LinearMap m = shared_map(*cfg_.compressor, v, t, Channel::kCompressor);
    Vector s = Vector::Zero(suite_->d);
    for (Index i = 0; i < n; ++i) {
      const Vector& vi = v[static_cast<std::size_t>(i)];
      const Vector sent = m.apply(vi);
      workers_[static_cast<std::size_t>(i)].e = vi - sent;
      s += sent;
    }
    server_step(s);
    last_bits_ = detail::message_bits(m);
  }

  const ProblemSuite* suite_;
  AlgoConfig cfg_;
  ServerState server_;
  std::vector<WorkerState> workers_;
  LyapunovWeights weights_;
  double scale_ = 0.0;
  double last_bits_ = 0.0;
};

struct Trajectory {
  std::vector<Vector> iterates;  // x_0 ... x_T (empty unless keep_iterates)
  Trace trace;                   // T + 1 rows
  std::vector<WorkerState> workers;
  ServerState server;
};

inline Trajectory run(const ProblemSuite& suite, const AlgoConfig& cfg) {
  Simulator sim(suite, cfg);
  Trajectory traj;
  traj.trace.reserve(cfg.T + 1);
  if (cfg.keep_iterates) traj.iterates.reserve(cfg.T + 1);
  for (std::size_t t = 0; t <= cfg.T; ++t) {
    TraceRow row = sim.metrics();
    if (cfg.check_invariants) sim.check(row);
    if (cfg.keep_iterates) traj.iterates.push_back(sim.server().x);
    if (t < cfg.T) {
      sim.step();
      row.msg_size_estimate = sim.last_message_bits();
    }
    traj.trace.push_back(row);
  }
  traj.workers = sim.workers();
  traj.server = sim.server();
  return traj;
}

namespace detail {

inline Trajectory run_as(const ProblemSuite& suite, AlgoConfig cfg, std::initializer_list<Algorithm> allowed) {
  if (std::find(allowed.begin(), allowed.end(), cfg.algorithm) == allowed.end())
    cfg.algorithm = *allowed.begin();
  return run(suite, cfg);
}

}  // namespace detail

inline Trajectory run_dsgd(const ProblemSuite& s, const AlgoConfig& c) {
  return detail::run_as(s, c, {Algorithm::kDsgd});
}
inline Trajectory run_dqsgd(const ProblemSuite& s, const AlgoConfig& c) {
  return detail::run_as(s, c, {Algorithm::kDqsgd});
}
inline Trajectory run_defsgd(const ProblemSuite& s, const AlgoConfig& c) {
  return detail::run_as(s, c, {Algorithm::kDefsgd});
}
inline Trajectory run_diana(const ProblemSuite& s, const AlgoConfig& c) {
  return detail::run_as(s, c, {Algorithm::kDiana});
}
inline Trajectory run_defsgd_bias(const ProblemSuite& s, const AlgoConfig& c) {
  return detail::run_as(s, c, {Algorithm::kDefsgdBias});
}
inline Trajectory run_ecsgd_diana(const ProblemSuite& s, const AlgoConfig& c) {
  return detail::run_as(s, c, {Algorithm::kEcsgdDiana});
}
// Runs the synchronized variant; the error-feedback one unless the config
// already names the quantized one.
inline Trajectory run_linear_sync(const ProblemSuite& s, const AlgoConfig& c) {
  return detail::run_as(s, c, {Algorithm::kDefsgdLinearSync, Algorithm::kDqsgdLinearSync});
}

// ---------------------------------------------------------------------------
// Output selection.
// ---------------------------------------------------------------------------
struct OutputWeighting {
  enum class Kind { kStronglyConvex, kUniform };
  Kind kind = Kind::kUniform;
  double c = 0.0;  // contraction, strongly convex weighting only

  static OutputWeighting strongly_convex(double c) { return {Kind::kStronglyConvex, c}; }
  static OutputWeighting uniform() { return {Kind::kUniform, 0.0}; }
};

// Normalized weights over the candidates x_0 ... x_{T-1}; w_t is
// proportional to (1 - c)^{-t}.
inline std::vector<double> output_weights(std::size_t T, OutputWeighting w) {
  detail::require(T >= 1, "select_output: need at least one candidate");
  if (w.kind == OutputWeighting::Kind::kStronglyConvex)
    detail::require(w.c > 0.0 && w.c < 1.0, "select_output: c must lie in (0, 1)");
  std::vector<double> out(T, 1.0);
  if (w.kind == OutputWeighting::Kind::kStronglyConvex) {
    // Scaled by (1 - c)^{T-1} so the largest weight is 1.
    const double q = 1.0 - w.c;
    for (std::size_t t = 0; t < T; ++t) out[t] = std::pow(q, static_cast<double>(T - 1 - t));
  }
  double total = 0.0;
  for (double v : out) total += v;
  for (double& v : out) v /= total;
  return out;
}

struct SelectedOutput {
  std::size_t index = 0;
  Vector sample;            // x_index, drawn with the weights
  Vector weighted_average;  // sum_t w_t x_t
};

inline SelectedOutput select_output(const std::vector<Vector>& iterates, std::size_t T, OutputWeighting w,
                                    RngStream rng) {
  detail::require(iterates.size() >= T, "select_output: trajectory has fewer than T iterates");
  const std::vector<double> weights = output_weights(T, w);
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t pick = T - 1;
  for (std::size_t t = 0; t < T; ++t) {
    acc += weights[t];
    if (u < acc) {
      pick = t;
      break;
    }
  }
  SelectedOutput out;
  out.index = pick;
  out.sample = iterates[pick];
  out.weighted_average = Vector::Zero(iterates.front().size());
  for (std::size_t t = 0; t < T; ++t) out.weighted_average += weights[t] * iterates[t];
  return out;
}

// Candidates are x_0 ... x_{T-1} of a T-round trajectory.
inline SelectedOutput select_output(const Trajectory& traj, OutputWeighting w, RngStream rng) {
  detail::require(!traj.iterates.empty(), "select_output: trajectory kept no iterates");
  const std::size_t T = std::max<std::size_t>(1, traj.iterates.size() - 1);
  return select_output(traj.iterates, T, w, rng);
}

}  // namespace csgd

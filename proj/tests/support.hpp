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

// Shared helpers for the test binaries.
#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "csgd.hpp"

namespace csgd::testing {

inline ProblemSuite quadratic(Index d, Index n, double zeta_star_sq, double sigma, std::uint64_t seed,
                              double mu = 1.0, double L = 10.0) {
  QuadraticSuiteParams p;
  p.d = d;
  p.n = n;
  p.mu = mu;
  p.L = L;
  p.zeta_star_sq = zeta_star_sq;
  p.sigma = sigma;
  return gen_quadratic_suite(p, RngStream(seed, 0, 0, Channel::kGeneration));
}

// First round at which the iterates differ in any bit, if any.
inline std::optional<std::size_t> first_divergence(const std::vector<Vector>& a, const std::vector<Vector>& b) {
  if (a.size() != b.size()) return 0;
  for (std::size_t t = 0; t < a.size(); ++t)
    if (!bitwise_equal(a[t], b[t])) return t;
  return std::nullopt;
}

// Single-node error feedback on the averaged stochastic gradient. Noise and
// the per-round operator come from the same streams the shared-compressor
// scheme uses.
inline std::vector<Vector> single_node_ef(const ProblemSuite& s, const CompressorOp& op, double gamma,
                                          std::size_t T, std::uint64_t seed, const Vector& x0) {
  std::vector<Vector> xs;
  xs.reserve(T + 1);
  Vector x = x0;
  Vector e = Vector::Zero(s.d);
  xs.push_back(x);
  for (std::size_t t = 0; t < T; ++t) {
    Vector g = Vector::Zero(s.d);
    for (Index i = 0; i < s.n; ++i) {
      RngStream noise(seed, static_cast<std::uint64_t>(i), t, Channel::kNoise);
      g += oracle_stochastic(s, i, x, noise);
    }
    g /= static_cast<double>(s.n);
    const Vector v = e + g;
    RngStream r = RngStream::synchronized(seed, t, Channel::kCompressor);
    const LinearMap m = op.draw(v, r);
    const Vector sent = m.apply(v);
    e = v - sent;
    x = x - gamma * sent;
    xs.push_back(x);
  }
  return xs;
}

inline double max_relative_gap(const std::vector<Vector>& a, const std::vector<Vector>& b) {
  double worst = 0.0;
  for (std::size_t t = 0; t < std::min(a.size(), b.size()); ++t)
    worst = std::max(worst, (a[t] - b[t]).norm() / std::max(1e-300, b[t].norm()));
  return worst;
}

}  // namespace csgd::testing

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

#include <cstddef>
#include <vector>

namespace csgd {

// Metrics of one round, evaluated on the state at the start of round t.
struct TraceRow {
  std::size_t t = 0;
  double f_gap = 0.0;          // f(x_t) - f_*
  double grad_norm_sq = 0.0;   // |grad f(x_t)|^2
  double x_dist_sq = 0.0;      // |x~_t - x_*|^2 (virtual sequence)
  double err_sq_mean = 0.0;    // (1/n) sum |e_t^i|^2
  double h_dist_sq_mean = 0.0; // (1/n) sum |h_t^i - grad f_i(x_*)|^2
  double lyapunov = 0.0;
  double msg_size_estimate = 0.0;  // bits per worker, heuristic
  // Invariant residuals (not exported to CSV).
  double virtual_residual = 0.0;   // |(x - x~) - (gamma/n) sum e_i| / (1 + |x|)
  double shift_residual = 0.0;     // |h - (1/n) sum h_i| / max(1, |h|)
};

using Trace = std::vector<TraceRow>;

}  // namespace csgd

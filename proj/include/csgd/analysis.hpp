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

// Rate and plateau estimates on metric series.

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "csgd/trace.hpp"
#include "csgd/types.hpp"

namespace csgd {

inline constexpr double kConvergedThreshold = 1e-12;

// Half-open round range [begin, end).
struct FitWindow {
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct RateReport {
  double rho = 1.0;       // per-round contraction exp(slope)
  double slope = 0.0;     // least-squares slope of log F
  double residual = 0.0;  // RMS residual of the log fit
  FitWindow window;
  double plateau_level = 0.0;
  double plateau_stderr = 0.0;
};

struct Plateau {
  double level = 0.0;
  double stderr_ = 0.0;
  std::size_t count = 0;
};

inline std::vector<double> f_gap_series(const Trace& trace) {
  std::vector<double> out;
  out.reserve(trace.size());
  for (const auto& r : trace) out.push_back(r.f_gap);
  return out;
}

// Rounds [10, first round with F < 1e-12), clipped to the series.
inline FitWindow default_rate_window(const std::vector<double>& F) {
  FitWindow w;
  w.begin = std::min<std::size_t>(10, F.size());
  w.end = F.size();
  for (std::size_t t = w.begin; t < F.size(); ++t) {
    if (F[t] < kConvergedThreshold) {
      w.end = t;
      break;
    }
  }
  return w;
}

inline std::size_t default_plateau_tail(std::size_t length) { return std::max<std::size_t>(1, length / 10); }

// Mean and standard error of the last `tail` values.
inline Plateau detect_plateau(const std::vector<double>& F, std::size_t tail) {
  detail::require(tail >= 1 && tail <= F.size(), "detect_plateau: tail must lie in [1, length]");
  Plateau p;
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t k = 0;
  for (std::size_t t = F.size() - tail; t < F.size(); ++t) {
    ++k;
    const double delta = F[t] - mean;
    mean += delta / static_cast<double>(k);
    m2 += delta * (F[t] - mean);
  }
  p.level = mean;
  p.count = k;
  p.stderr_ = k > 1 ? std::sqrt(m2 / static_cast<double>(k - 1) / static_cast<double>(k)) : 0.0;
  return p;
}

inline Plateau detect_plateau(const Trace& trace, std::size_t tail) { return detect_plateau(f_gap_series(trace), tail); }

inline RateReport fit_linear_rate(const std::vector<double>& F, FitWindow w) {
  detail::require(w.begin <= w.end && w.end <= F.size(), "fit_linear_rate: window outside the series");
  if (w.end - w.begin < 2) throw NotInLinearRegime("fit_linear_rate: window holds fewer than two rounds");
  double st = 0.0;
  double sy = 0.0;
  for (std::size_t t = w.begin; t < w.end; ++t) {
    if (!(F[t] > 0.0) || !std::isfinite(F[t]))
      throw NotInLinearRegime("fit_linear_rate: nonpositive value at round " + std::to_string(t));
    st += static_cast<double>(t);
    sy += std::log(F[t]);
  }
  const double m = static_cast<double>(w.end - w.begin);
  const double tbar = st / m;
  const double ybar = sy / m;
  double stt = 0.0;
  double sty = 0.0;
  for (std::size_t t = w.begin; t < w.end; ++t) {
    const double dt = static_cast<double>(t) - tbar;
    stt += dt * dt;
    sty += dt * (std::log(F[t]) - ybar);
  }
  RateReport r;
  r.window = w;
  r.slope = sty / stt;
  r.rho = std::exp(r.slope);
  double ss = 0.0;
  for (std::size_t t = w.begin; t < w.end; ++t) {
    const double e = std::log(F[t]) - (ybar + r.slope * (static_cast<double>(t) - tbar));
    ss += e * e;
  }
  r.residual = std::sqrt(ss / m);
  const Plateau p = detect_plateau(F, default_plateau_tail(F.size()));
  r.plateau_level = p.level;
  r.plateau_stderr = p.stderr_;
  return r;
}

inline RateReport fit_linear_rate(const std::vector<double>& F) { return fit_linear_rate(F, default_rate_window(F)); }
inline RateReport fit_linear_rate(const Trace& trace, FitWindow w) { return fit_linear_rate(f_gap_series(trace), w); }
inline RateReport fit_linear_rate(const Trace& trace) { return fit_linear_rate(f_gap_series(trace)); }

// Per-round mean and standard error across seeds.
struct SeriesStats {
  std::vector<double> mean;
  std::vector<double> stderr_;
};

inline SeriesStats seed_average(const std::vector<std::vector<double>>& runs) {
  detail::require(!runs.empty(), "seed_average: no runs");
  const std::size_t len = runs.front().size();
  for (const auto& r : runs) detail::require(r.size() == len, "seed_average: runs differ in length");
  SeriesStats s;
  s.mean.assign(len, 0.0);
  s.stderr_.assign(len, 0.0);
  const double k = static_cast<double>(runs.size());
  for (std::size_t t = 0; t < len; ++t) {
    double mean = 0.0;
    for (const auto& r : runs) mean += r[t];
    mean /= k;
    double ss = 0.0;
    for (const auto& r : runs) ss += (r[t] - mean) * (r[t] - mean);
    s.mean[t] = mean;
    s.stderr_[t] = runs.size() > 1 ? std::sqrt(ss / (k - 1.0) / k) : 0.0;
  }
  return s;
}

// Plateau over independent seeds: per-seed tail means, then their mean and
// standard error. With a single seed the within-run error is reported.
inline Plateau seed_plateau(const std::vector<std::vector<double>>& runs, std::size_t tail) {
  detail::require(!runs.empty(), "seed_plateau: no runs");
  if (runs.size() == 1) return detect_plateau(runs.front(), tail);
  std::vector<double> levels;
  levels.reserve(runs.size());
  for (const auto& r : runs) levels.push_back(detect_plateau(r, tail).level);
  return detect_plateau(levels, levels.size());
}

// Ratio a/b with a first-order standard error.
struct Ratio {
  double value = 0.0;
  double stderr_ = 0.0;
};

inline std::optional<Ratio> ratio(const Plateau& a, const Plateau& b) {
  if (!(b.level > 0.0)) return std::nullopt;
  Ratio r;
  r.value = a.level / b.level;
  const double ra = a.level != 0.0 ? a.stderr_ / a.level : 0.0;
  const double rb = b.stderr_ / b.level;
  r.stderr_ = std::abs(r.value) * std::sqrt(ra * ra + rb * rb);
  return r;
}

}  // namespace csgd

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

// Experiment orchestration: multi-seed runs, CSV export and sweeps.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "csgd/algorithms.hpp"
#include "csgd/analysis.hpp"
#include "csgd/config.hpp"
#include "csgd/problems.hpp"

namespace csgd {

namespace detail {

inline double column(const TraceRow& r, const std::string& name) {
  if (name == "t") return static_cast<double>(r.t);
  if (name == "f_gap") return r.f_gap;
  if (name == "grad_norm_sq") return r.grad_norm_sq;
  if (name == "x_dist_sq") return r.x_dist_sq;
  if (name == "err_sq_mean") return r.err_sq_mean;
  if (name == "h_dist_sq_mean") return r.h_dist_sq_mean;
  if (name == "lyapunov") return r.lyapunov;
  if (name == "msg_size_estimate") return r.msg_size_estimate;
  throw ParameterError("unknown trace column '" + name + "'");
}

// Runs jobs 0..count-1 on up to `threads` workers; results land by index.
template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned k = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  for (unsigned j = 0; j < k; ++j) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

inline unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

}  // namespace detail

// CSV with a header row; t as an integer, other columns with 17 significant
// digits. msg_size_estimate is a heuristic bit count, not an encoding.
inline void write_csv(std::ostream& out, const Trace& trace, const std::vector<std::string>& columns) {
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << '\n';
  char buf[40];
  for (const auto& row : trace) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out << ',';
      if (columns[c] == "t") {
        out << row.t;
      } else {
        std::snprintf(buf, sizeof buf, "%.17g", detail::column(row, columns[c]));
        out << buf;
      }
    }
    out << '\n';
  }
}

inline std::string csv_string(const Trace& trace, const std::vector<std::string>& columns = csv_columns()) {
  std::ostringstream out;
  write_csv(out, trace, columns);
  return out.str();
}

// Writes through a temporary file and renames it into place.
inline void write_file_atomic(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write '" + tmp + "'");
    out << content;
    if (!out) throw Error("write failed for '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

// CSV path for one seed: run.output itself for a single seed, otherwise
// <stem>_seed<s>.csv next to it.
inline std::string csv_path(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (cfg.output.empty()) return {};
  if (cfg.seeds.size() == 1) return cfg.output;
  std::filesystem::path p(cfg.output);
  const std::string stem = p.extension() == ".csv" ? p.stem().string() : p.filename().string();
  return (p.parent_path() / (stem + "_seed" + std::to_string(seed) + ".csv")).string();
}

struct SeedRun {
  std::uint64_t seed = 0;
  Trace trace;
  std::string csv_file;  // empty when nothing was written
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<SeedRun> runs;  // in seed-list order
  double gamma = 0.0;
  double alpha = 0.0;
};

inline ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned threads = 1) {
  const ProblemSuite suite = build_suite(cfg);
  ExperimentResult res;
  res.config = cfg;
  const AlgoConfig probe = build_algo(cfg, suite, cfg.seeds.front());
  res.gamma = probe.gamma;
  res.alpha = probe.alpha;
  res.runs.resize(cfg.seeds.size());
  detail::parallel_for(cfg.seeds.size(), threads, [&](std::size_t i) {
    const std::uint64_t seed = cfg.seeds[i];
    const AlgoConfig a = build_algo(cfg, suite, seed);
    SeedRun r;
    r.seed = seed;
    r.trace = run(suite, a).trace;
    r.csv_file = csv_path(cfg, seed);
    if (!r.csv_file.empty()) write_file_atomic(r.csv_file, csv_string(r.trace, cfg.metrics));
    res.runs[i] = std::move(r);
  });
  return res;
}

inline std::vector<std::vector<double>> f_gap_runs(const ExperimentResult& r) {
  std::vector<std::vector<double>> out;
  for (const auto& s : r.runs) out.push_back(f_gap_series(s.trace));
  return out;
}

// Copies of cfg with `axis` set to each value; outputs get an axis suffix.
inline std::vector<ExperimentConfig> sweep_grid(const ExperimentConfig& cfg, const std::string& axis,
                                                const std::vector<std::string>& values) {
  detail::require<ConfigError>(!values.empty(), "sweep: value list is empty");
  std::vector<ExperimentConfig> grid;
  for (const auto& v : values) {
    ExperimentConfig c = with_override(cfg, axis, v);
    if (!cfg.output.empty()) {
      std::filesystem::path p(cfg.output);
      const std::string stem = p.extension() == ".csv" ? p.stem().string() : p.filename().string();
      std::string tag = axis + "=" + v;
      std::replace(tag.begin(), tag.end(), '/', '_');
      std::replace(tag.begin(), tag.end(), ':', '_');
      c = with_override(c, "run.output", (p.parent_path() / (stem + "_" + tag + ".csv")).string());
    }
    grid.push_back(std::move(c));
  }
  return grid;
}

struct ScalingRow {
  std::string axis_value;
  double gamma = 0.0;
  Plateau plateau;
  std::optional<RateReport> rate;
  std::optional<Ratio> ratio_to_previous;  // plateau of this row / previous row
};

struct ScalingReport {
  std::string axis;
  std::vector<ScalingRow> rows;
};

// Throws ConfigError unless the configs agree on every key except the axis
// (and the output path).
inline void check_single_axis(const std::vector<ExperimentConfig>& grid, const std::string& axis) {
  detail::require<ConfigError>(grid.size() >= 2, "compare_scaling: need at least two configs");
  auto strip = [&axis](std::map<std::string, std::string> m) {
    m.erase(axis);
    m.erase("run.output");
    return m;
  };
  const auto ref = strip(grid.front().entries);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const auto other = strip(grid[i].entries);
    if (other == ref) continue;
    std::string key;
    for (const auto& [k, v] : ref)
      if (!other.count(k) || other.at(k) != v) key = k;
    for (const auto& [k, v] : other)
      if (!ref.count(k)) key = k;
    throw ConfigError("compare_scaling: config " + std::to_string(i) + " differs from config 0 in '" + key +
                      "', not only along '" + axis + "'");
  }
}

inline ScalingReport compare_scaling(const std::vector<ExperimentConfig>& grid, const std::string& axis,
                                     unsigned threads = detail::default_threads()) {
  check_single_axis(grid, axis);
  std::vector<ExperimentResult> results(grid.size());
  // Cells are (config, seed) pairs; each config's seeds run inside its cell
  // sequentially, configs run concurrently.
  detail::parallel_for(grid.size(), threads, [&](std::size_t i) { results[i] = run_experiment(grid[i]); });
  ScalingReport rep;
  rep.axis = axis;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    ScalingRow row;
    auto it = grid[i].entries.find(axis);
    row.axis_value = it != grid[i].entries.end() ? it->second : "";
    row.gamma = results[i].gamma;
    const auto runs = f_gap_runs(results[i]);
    row.plateau = seed_plateau(runs, default_plateau_tail(runs.front().size()));
    try {
      row.rate = fit_linear_rate(seed_average(runs).mean);
    } catch (const NotInLinearRegime&) {
    }
    if (i > 0) row.ratio_to_previous = ratio(row.plateau, rep.rows.back().plateau);
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

inline std::string format_report(const ScalingReport& rep) {
  std::ostringstream out;
  char buf[256];
  out << rep.axis << ",gamma,plateau,plateau_stderr,rho,ratio,ratio_stderr\n";
  for (const auto& r : rep.rows) {
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,", r.axis_value.c_str(), r.gamma, r.plateau.level,
                  r.plateau.stderr_);
    out << buf;
    if (r.rate) {
      std::snprintf(buf, sizeof buf, "%.17g", r.rate->rho);
      out << buf;
    }
    out << ',';
    if (r.ratio_to_previous) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g", r.ratio_to_previous->value, r.ratio_to_previous->stderr_);
      out << buf;
    } else {
      out << ',';
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace csgd

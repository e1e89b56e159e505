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

// Constant stepsizes from the summation lemmas, and the per-theorem maps
// from problem/compressor parameters to the lemma constants.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "csgd/algorithms.hpp"
#include "csgd/types.hpp"

namespace csgd {

// Constants of the recursion
//   r_{t+1} <= (1 - min{gamma A, F}) r_t - B gamma s_t + C gamma^2 + D gamma^3,
// valid for 0 < gamma <= 1/E. A = 0 encodes the non-contracting recursion.
struct RecursionConstants {
  double A = 0.0;
  double B = 1.0;
  double C = 0.0;
  double D = 0.0;
  double E = 0.0;
  double F = 1.0;
  double r0 = 0.0;

  void validate() const {
    const double v[] = {A, B, C, D, E, F, r0};
    for (double x : v) detail::require(std::isfinite(x) && x >= 0.0, "recursion constants must be finite and >= 0");
    detail::require(B > 0.0, "recursion constant B must be > 0");
    detail::require(F > 0.0 && F <= 1.0, "recursion constant F must lie in (0, 1]");
  }
};

enum class TuneBranch {
  kNoiseless,    // C = D = 0, gamma = 1/E
  kMaxStepsize,  // the 1/E cap is active
  kLogTau,       // gamma = ln(tau) / (A (T+1))
  kSquareRoot,   // gamma = (r0 / (C (T+1)))^{1/2}
  kCubeRoot,     // gamma = (r0 / (D (T+1)))^{1/3}
};

inline std::string to_string(TuneBranch b) {
  switch (b) {
    case TuneBranch::kNoiseless: return "noiseless";
    case TuneBranch::kMaxStepsize: return "max-stepsize";
    case TuneBranch::kLogTau: return "log-tau";
    case TuneBranch::kSquareRoot: return "square-root";
    case TuneBranch::kCubeRoot: return "cube-root";
  }
  return "?";
}

struct TunedStepsize {
  double gamma = 0.0;
  double tau = std::numbers::e;  // 0 when the branch has no log factor
  TuneBranch branch = TuneBranch::kNoiseless;
};

inline TunedStepsize tune_strongly_convex(const RecursionConstants& k, std::size_t T) {
  k.validate();
  detail::require(T >= 1, "tune_strongly_convex: T must be >= 1");
  detail::require(k.A > 0.0, "tune_strongly_convex: A must be > 0");
  TunedStepsize out;
  if (k.C == 0.0 && k.D == 0.0) {
    detail::require(k.E > 0.0, "tune_strongly_convex: noiseless recursion needs E > 0");
    out.gamma = 1.0 / k.E;
    out.tau = 0.0;
    out.branch = TuneBranch::kNoiseless;
    return out;
  }
  const double T1 = static_cast<double>(T) + 1.0;
  double inner = std::numeric_limits<double>::infinity();
  if (k.C > 0.0) inner = std::min(inner, k.A * k.A * k.r0 * T1 * T1 / k.C);
  if (k.D > 0.0) inner = std::min(inner, k.A * k.A * k.A * k.r0 * T1 * T1 * T1 / k.D);
  out.tau = std::max(std::numbers::e, inner);
  const double g = std::log(out.tau) / (k.A * T1);
  if (k.E > 0.0 && 1.0 / k.E <= g) {
    out.gamma = 1.0 / k.E;
    out.branch = TuneBranch::kMaxStepsize;
  } else {
    out.gamma = g;
    out.branch = TuneBranch::kLogTau;
  }
  return out;
}

inline TunedStepsize tune_sublinear(const RecursionConstants& k, std::size_t T) {
  k.validate();
  detail::require(T >= 1, "tune_sublinear: T must be >= 1");
  TunedStepsize out;
  out.tau = 0.0;
  if (k.C == 0.0 && k.D == 0.0) {
    detail::require(k.E > 0.0, "tune_sublinear: noiseless recursion needs E > 0");
    out.gamma = 1.0 / k.E;
    out.branch = TuneBranch::kNoiseless;
    return out;
  }
  detail::require(k.r0 > 0.0, "tune_sublinear: r0 must be > 0 when C or D is nonzero");
  const double T1 = static_cast<double>(T) + 1.0;
  out.gamma = std::numeric_limits<double>::infinity();
  if (k.E > 0.0) {
    out.gamma = 1.0 / k.E;
    out.branch = TuneBranch::kMaxStepsize;
  }
  if (k.C > 0.0) {
    const double g = std::sqrt(k.r0 / (k.C * T1));
    if (g < out.gamma) {
      out.gamma = g;
      out.branch = TuneBranch::kSquareRoot;
    }
  }
  if (k.D > 0.0) {
    const double g = std::cbrt(k.r0 / (k.D * T1));
    if (g < out.gamma) {
      out.gamma = g;
      out.branch = TuneBranch::kCubeRoot;
    }
  }
  return out;
}

// Right-hand side of the strongly convex summation bound at stepsize gamma:
// (r0/gamma) exp(-min{gamma A, F}(T+1)) + gamma C + gamma^2 D.
inline double strongly_convex_bound(const RecursionConstants& k, std::size_t T, double gamma) {
  const double T1 = static_cast<double>(T) + 1.0;
  return k.r0 / gamma * std::exp(-std::min(gamma * k.A, k.F) * T1) + gamma * k.C + gamma * gamma * k.D;
}

// Right-hand side of the sublinear summation bound at stepsize gamma:
// r0 / (gamma (T+1)) + gamma C + gamma^2 D.
inline double sublinear_bound(const RecursionConstants& k, std::size_t T, double gamma) {
  const double T1 = static_cast<double>(T) + 1.0;
  return k.r0 / (gamma * T1) + gamma * k.C + gamma * gamma * k.D;
}

// ---------------------------------------------------------------------------
// Theorem maps.
// ---------------------------------------------------------------------------
enum class ObjectiveClass { kStronglyConvex, kConvex, kNonconvex };

inline std::string to_string(ObjectiveClass c) {
  switch (c) {
    case ObjectiveClass::kStronglyConvex: return "strongly-convex";
    case ObjectiveClass::kConvex: return "convex";
    case ObjectiveClass::kNonconvex: return "nonconvex";
  }
  return "?";
}

inline ObjectiveClass parse_objective_class(const std::string& s) {
  if (s == "strongly-convex") return ObjectiveClass::kStronglyConvex;
  if (s == "convex") return ObjectiveClass::kConvex;
  if (s == "nonconvex" || s == "smooth-nonconvex") return ObjectiveClass::kNonconvex;
  throw ConfigError("unknown objective class '" + s + "'");
}

struct SuiteParams {
  double L = 1.0;
  double mu = 0.0;
  double sigma = 0.0;  // noise standard deviation
  double zeta = 0.0;   // dissimilarity, additive part
  double Z = 1.0;      // dissimilarity, multiplicative part (>= 1)
  double n = 1.0;
};

struct CompressorParams {
  double delta = 1.0;
  double omega = 0.0;
  double alpha = 0.0;
  double beta = 1.0;
};

namespace detail {

inline void check_params(const SuiteParams& s, const CompressorParams& c, ObjectiveClass cls) {
  require(s.L > 0.0 && std::isfinite(s.L), "theorem constants: L must be > 0");
  require(s.mu >= 0.0 && s.mu <= s.L, "theorem constants: mu must lie in [0, L]");
  require(cls != ObjectiveClass::kStronglyConvex || s.mu > 0.0,
          "theorem constants: strongly convex class needs mu > 0");
  require(s.sigma >= 0.0 && s.zeta >= 0.0, "theorem constants: sigma and zeta must be >= 0");
  require(s.Z >= 1.0, "theorem constants: Z must be >= 1");
  require(s.n >= 1.0, "theorem constants: n must be >= 1");
  require(c.delta > 0.0 && c.delta <= 1.0, "theorem constants: delta must lie in (0, 1]");
  require(c.omega >= 0.0, "theorem constants: omega must be >= 0");
  require(c.beta > 0.0 && c.beta <= 1.0, "theorem constants: beta must lie in (0, 1]");
  require(c.alpha >= 0.0 && c.alpha <= 1.0, "theorem constants: alpha must lie in [0, 1]");
}

}  // namespace detail

// Lemma constants (A..F) for the algorithm's theorem; r0 is left at zero
// for the caller to fill in. Throws Unavailable when no theorem covers the
// (algorithm, class) pair.
inline RecursionConstants theorem_constants(Algorithm algo, const SuiteParams& s, const CompressorParams& c,
                                            ObjectiveClass cls) {
  detail::check_params(s, c, cls);
  const double L = s.L;
  const double n = s.n;
  const double s2 = s.sigma * s.sigma;
  const double z2 = s.zeta * s.zeta;
  const double Z = s.Z;
  const double Z2 = Z * Z;
  const double dl = c.delta;
  const double om = c.omega;
  const bool sc = cls == ObjectiveClass::kStronglyConvex;
  const bool nonconvex = cls == ObjectiveClass::kNonconvex;
  RecursionConstants k;
  switch (algo) {
    case Algorithm::kDsgd:
    case Algorithm::kDqsgd: {
      const double w = algo == Algorithm::kDsgd ? 0.0 : om;
      if (nonconvex) {
        k.B = 0.5;
        k.C = L * (s2 * (1.0 + w) + z2 * w) / (2.0 * n);
      } else {
        k.A = sc ? s.mu : 0.0;
        k.B = 1.0;
        k.C = (s2 * (1.0 + w) + z2 * w) / n;
      }
      k.E = 2.0 * L * (1.0 + Z2 * w / n);
      k.F = 1.0;
      return k;
    }
    case Algorithm::kDqsgdLinearSync: {
      if (nonconvex) {
        k.B = 0.5;
        k.C = L * s2 * (1.0 + om) / (2.0 * n);
      } else {
        k.A = sc ? s.mu : 0.0;
        k.B = 1.0;
        k.C = s2 * (1.0 + om) / n;
      }
      k.E = 2.0 * L * (1.0 + om);
      k.F = 1.0;
      return k;
    }
    case Algorithm::kDefsgd: {
      if (nonconvex) {
        k.B = 1.0 / 8.0;
        k.C = L * s2 / (2.0 * n);
        k.D = (1.0 - dl) * (2.0 * L * L * z2 / (dl * dl) + L * L * s2 / dl);
        k.E = 4.0 * L * (1.0 + Z) / dl;
      } else {
        k.A = sc ? s.mu / 2.0 : 0.0;
        k.B = 0.25;
        k.C = s2 / n;
        k.D = (1.0 - dl) * (24.0 * L * z2 / (dl * dl) + 12.0 * L * s2 / dl);
        k.E = 14.0 * L * (1.0 + Z / dl);
      }
      k.F = dl / 4.0;
      return k;
    }
    case Algorithm::kDefsgdLinearSync: {
      if (nonconvex) {
        k.B = 1.0 / 8.0;
        k.C = L * s2 / (2.0 * n);
        k.D = (1.0 - dl) * L * L * s2 / (n * dl);
        k.E = 8.0 * L / dl;
      } else {
        k.A = sc ? s.mu / 2.0 : 0.0;
        k.B = 0.25;
        k.C = s2 / n;
        k.D = (1.0 - dl) * 12.0 * L * s2 / (n * dl);
        k.E = 14.0 * L * (1.0 + 1.0 / dl);
      }
      k.F = dl / 4.0;
      return k;
    }
    case Algorithm::kDiana: {
      const double alpha = c.alpha > 0.0 ? c.alpha : 1.0 / (1.0 + om);
      if (nonconvex) {
        k.B = 0.25;
        k.C = L * (s2 * (2.0 + om) + 2.0 * z2 * om) / (2.0 * n);
        k.E = 2.0 * L * (1.0 + 2.0 * Z2 * om / n);
      } else {
        k.A = sc ? s.mu : 0.0;
        k.B = 0.5;
        k.C = 5.0 * (1.0 + om) * s2 / n;
        k.E = 2.0 * L * (1.0 + 8.0 * om / n);
      }
      k.F = std::min(1.0, alpha / 2.0);
      return k;
    }
    case Algorithm::kDefsgdBias: {
      if (nonconvex) {
        k.B = 1.0 / 8.0;
        k.C = L * s2 / (2.0 * n);
        k.D = 8.0 * L * L * (1.0 - dl) * (dl * s2 + z2) / (dl * dl);
        k.E = 2.0 * L * (1.0 + 4.0 * Z);
        k.F = dl / 4.0;
        return k;
      }
      const double alpha = c.alpha > 0.0 ? c.alpha : c.beta / (1.0 + om);
      k.A = sc ? s.mu / 2.0 : 0.0;
      k.B = 0.25;
      k.C = s2 / n;
      k.D = 12.0 * L * (1.0 - dl) * s2 / dl + 96.0 * c.beta * L * (1.0 - dl) * s2 / (dl * dl);
      k.E = 34.0 * L / dl;
      k.F = std::min(alpha / 2.0, dl / 4.0);
      return k;
    }
    case Algorithm::kEcsgdDiana:
      throw Unavailable("theorem constants: no theorem covers ecsgd-diana");
  }
  throw Unavailable("theorem constants: unknown algorithm");
}

// The stepsize bound stated by the algorithm's theorem (strongly convex and
// convex classes) or by its descent lemma (nonconvex class).
inline double theorem_stepsize_cap(Algorithm algo, const SuiteParams& s, const CompressorParams& c,
                                   ObjectiveClass cls = ObjectiveClass::kStronglyConvex) {
  detail::check_params(s, c, cls);
  const double L = s.L;
  const double Z2 = s.Z * s.Z;
  if (cls == ObjectiveClass::kNonconvex) {
    switch (algo) {
      case Algorithm::kDsgd: return 1.0 / (2.0 * L);
      case Algorithm::kDqsgd: return 1.0 / (2.0 * L * (1.0 + Z2 * c.omega / s.n));
      case Algorithm::kDqsgdLinearSync: return 1.0 / (2.0 * L * (1.0 + c.omega));
      case Algorithm::kDefsgd: return c.delta / (4.0 * L * (1.0 + s.Z));
      case Algorithm::kDefsgdLinearSync: return c.delta / (8.0 * L);
      case Algorithm::kDiana: return 1.0 / (2.0 * L * (1.0 + 2.0 * Z2 * c.omega / s.n));
      case Algorithm::kDefsgdBias:
      case Algorithm::kEcsgdDiana: return 1.0 / (2.0 * L * (1.0 + 4.0 * s.Z));
    }
    return 0.0;
  }
  switch (algo) {
    case Algorithm::kDsgd: return 1.0 / (2.0 * L);
    case Algorithm::kDqsgd: return 1.0 / (2.0 * L * (1.0 + Z2 * c.omega / s.n));
    case Algorithm::kDqsgdLinearSync: return 1.0 / (2.0 * L * (1.0 + c.omega));
    case Algorithm::kDefsgd: return 1.0 / (14.0 * L * (1.0 + s.Z / c.delta));
    case Algorithm::kDefsgdLinearSync: return 1.0 / (14.0 * L * (1.0 + 1.0 / c.delta));
    case Algorithm::kDiana: return 1.0 / (2.0 * L * (1.0 + 2.0 * c.omega / s.n));
    case Algorithm::kDefsgdBias:
    case Algorithm::kEcsgdDiana: return c.delta / (32.0 * L);
  }
  return 0.0;
}

// Stepsize bound required by the one-step Lyapunov inequality of the
// bias-corrected error-feedback scheme.
inline double lyapunov_stepsize_cap(double delta, double L) { return delta / (34.0 * L); }

// Contraction c of the theorem's output weighting (1 - c)^{-t}.
inline double output_contraction(Algorithm algo, double gamma, double mu, const CompressorParams& c) {
  switch (algo) {
    case Algorithm::kDsgd:
    case Algorithm::kDqsgd:
    case Algorithm::kDqsgdLinearSync: return mu * gamma;
    case Algorithm::kDefsgd:
    case Algorithm::kDefsgdLinearSync: return std::min(mu * gamma / 2.0, c.delta / 4.0);
    case Algorithm::kDiana: return std::min(mu * gamma, c.alpha / 2.0);
    case Algorithm::kDefsgdBias:
    case Algorithm::kEcsgdDiana: return std::min({gamma * mu / 2.0, c.alpha / 2.0, c.delta / 4.0});
  }
  return 0.0;
}

struct TuneResult {
  RecursionConstants constants;
  TunedStepsize stepsize;
  double cap = 0.0;
};

// Tunes gamma for the algorithm's theorem and reports the stated cap next
// to it. Where 1/E and the cap are the same expression rounded in a
// different order, a gamma within a few ulps above the cap is set to it.
inline TuneResult tune_for(Algorithm algo, const SuiteParams& s, const CompressorParams& c, ObjectiveClass cls,
                           double r0, std::size_t T) {
  TuneResult out;
  out.constants = theorem_constants(algo, s, c, cls);
  out.constants.r0 = r0;
  out.stepsize = cls == ObjectiveClass::kStronglyConvex ? tune_strongly_convex(out.constants, T)
                                                        : tune_sublinear(out.constants, T);
  out.cap = theorem_stepsize_cap(algo, s, c, cls);
  constexpr double kUlpSlack = 4.0 * std::numeric_limits<double>::epsilon();
  if (out.stepsize.gamma > out.cap && out.stepsize.gamma <= out.cap * (1.0 + kUlpSlack))
    out.stepsize.gamma = out.cap;
  return out;
}

}  // namespace csgd

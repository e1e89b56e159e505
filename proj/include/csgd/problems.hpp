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

// Synthetic heterogeneous objectives.
//
// Node i holds f_i(x) = 1/2 x^T A_i x - b_i^T x + c * sum_j x_j^2 / (1 + x_j^2)
// (c = 0 for the quadratic kind). Generated suites share one Hessian across
// nodes; heterogeneity enters only through zero-sum offsets of b_i, which
// makes zeta_*^2 exactly controllable.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "csgd/rng.hpp"
#include "csgd/types.hpp"

namespace csgd {

enum class SuiteKind { kQuadratic, kNonconvexRegularized };

inline std::string to_string(SuiteKind k) {
  return k == SuiteKind::kQuadratic ? "quadratic" : "nonconvex";
}

struct QuadraticNode {
  Matrix A;
  Vector b;
};

struct ProblemSuite {
  SuiteKind kind = SuiteKind::kQuadratic;
  std::vector<QuadraticNode> nodes;
  Index d = 0;
  Index n = 0;
  double L = 0.0;
  double mu = 0.0;
  double sigma = 0.0;
  double reg = 0.0;  // weight c of the bounded nonconvex regularizer
  Vector x_star;
  double f_star = 0.0;
  double zeta_star_sq = 0.0;

  // Derived, cached at construction.
  Matrix mean_A;
  Vector mean_b;
  std::vector<Vector> grad_star;  // grad f_i(x_star)

  double node_value(Index i, const Vector& x) const {
    const auto& nd = nodes[static_cast<std::size_t>(i)];
    return 0.5 * x.dot(nd.A * x) - nd.b.dot(x) + regularizer_value(x);
  }

  Vector node_gradient(Index i, const Vector& x) const {
    const auto& nd = nodes[static_cast<std::size_t>(i)];
    Vector g = nd.A * x - nd.b;
    if (reg != 0.0) g += regularizer_gradient(x);
    return g;
  }

  double value(const Vector& x) const {
    return 0.5 * x.dot(mean_A * x) - mean_b.dot(x) + regularizer_value(x);
  }

  Vector gradient(const Vector& x) const {
    Vector g = mean_A * x - mean_b;
    if (reg != 0.0) g += regularizer_gradient(x);
    return g;
  }

  double regularizer_value(const Vector& x) const {
    if (reg == 0.0) return 0.0;
    double s = 0.0;
    for (Index j = 0; j < x.size(); ++j) {
      const double u2 = x[j] * x[j];
      s += u2 / (1.0 + u2);
    }
    return reg * s;
  }

  Vector regularizer_gradient(const Vector& x) const {
    Vector g(x.size());
    for (Index j = 0; j < x.size(); ++j) {
      const double q = 1.0 + x[j] * x[j];
      g[j] = reg * 2.0 * x[j] / (q * q);
    }
    return g;
  }

  // Hessian of the regularizer's coordinate term lies in [-c/2, 2c].
  static constexpr double kRegCurvatureMax = 2.0;
  static constexpr double kRegCurvatureMin = -0.5;
};

namespace detail {

inline Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

inline void validate_node(const QuadraticNode& nd, Index d) {
  require(nd.A.rows() == d && nd.A.cols() == d, "suite: node Hessian has wrong shape");
  require(nd.b.size() == d, "suite: node offset has wrong length");
}

}  // namespace detail

// Unique minimizer of a quadratic suite (or of its quadratic part, for a
// singular but consistent mean Hessian the minimum-norm minimizer).
inline std::pair<Vector, double> solve_optimum(const ProblemSuite& suite) {
  detail::require(suite.kind == SuiteKind::kQuadratic, "solve_optimum: quadratic suites only");
  const Matrix& A = suite.mean_A;
  const Vector& b = suite.mean_b;
  Eigen::SelfAdjointEigenSolver<Matrix> es(A);
  const Vector& lam = es.eigenvalues();
  const Matrix& U = es.eigenvectors();
  const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
  const double tol = 1e-12 * scale;
  const double bnorm = std::max(1.0, b.norm());
  auto solve = [&](const Vector& rhs) {
    Vector coeff = U.transpose() * rhs;
    for (Index j = 0; j < lam.size(); ++j) {
      if (lam[j] > tol) {
        coeff[j] /= lam[j];
      } else {
        if (lam[j] < -tol) throw NoUniqueOptimum("solve_optimum: mean Hessian is indefinite");
        if (std::abs(coeff[j]) > 1e-10 * bnorm)
          throw NoUniqueOptimum("solve_optimum: singular mean Hessian with inconsistent offsets");
        coeff[j] = 0.0;
      }
    }
    return Vector(U * coeff);
  };
  Vector x = solve(b);
  // One round of iterative refinement.
  const Vector r = b - A * x;
  x += solve(r);
  return {x, suite.value(x)};
}

// Fills the derived fields (means, x_star, f_star, zeta_*^2, grad_star).
// `L`/`mu` are taken from the arguments when given (generators know them
// exactly) and from an eigensolve otherwise.
inline void finalize_suite(ProblemSuite& s, std::optional<double> L = std::nullopt,
                           std::optional<double> mu = std::nullopt);

inline ProblemSuite make_suite(SuiteKind kind, std::vector<QuadraticNode> nodes, double sigma,
                               double reg = 0.0) {
  detail::require(!nodes.empty(), "suite: need at least one node");
  detail::require(sigma >= 0.0, "suite: sigma must be >= 0");
  detail::require(kind == SuiteKind::kNonconvexRegularized || reg == 0.0,
                  "suite: quadratic kind has no regularizer");
  ProblemSuite s;
  s.kind = kind;
  s.d = nodes.front().A.rows();
  detail::require(s.d >= 1, "suite: dimension must be >= 1");
  for (const auto& nd : nodes) detail::validate_node(nd, s.d);
  s.n = static_cast<Index>(nodes.size());
  s.nodes = std::move(nodes);
  s.sigma = sigma;
  s.reg = reg;
  finalize_suite(s);
  return s;
}

namespace detail {

// Stationary point of a nonconvex suite: gradient descent from the
// quadratic part's minimizer, then Newton polishing.
inline Vector find_stationary_point(const ProblemSuite& s, const Vector& start) {
  Vector x = start;
  const double step = 1.0 / std::max(s.L, 1e-300);
  const double tol = 1e-12 * std::max(1.0, s.mean_b.norm());
  for (int it = 0; it < 200000; ++it) {
    const Vector g = s.gradient(x);
    if (g.norm() <= tol) return x;
    x -= step * g;
    if (it % 64 == 63) {
      // Newton polish when the local Hessian is positive definite.
      Matrix H = s.mean_A;
      for (Index j = 0; j < x.size(); ++j) {
        const double u2 = x[j] * x[j];
        const double q = 1.0 + u2;
        H(j, j) += s.reg * (2.0 - 6.0 * u2) / (q * q * q);
      }
      Eigen::LLT<Matrix> llt(H);
      if (llt.info() == Eigen::Success) {
        Vector y = x;
        for (int k = 0; k < 5; ++k) y -= llt.solve(s.gradient(y));
        if (s.gradient(y).norm() <= tol) return y;
      }
    }
  }
  const Vector g = s.gradient(x);
  require<InvariantViolation>(g.norm() <= 1e-8 * std::max(1.0, s.mean_b.norm()),
                              "nonconvex suite: no stationary point found");
  return x;
}

}  // namespace detail

inline void finalize_suite(ProblemSuite& s, std::optional<double> L, std::optional<double> mu) {
  s.mean_A = Matrix::Zero(s.d, s.d);
  s.mean_b = Vector::Zero(s.d);
  for (const auto& nd : s.nodes) {
    s.mean_A += nd.A;
    s.mean_b += nd.b;
  }
  s.mean_A /= static_cast<double>(s.n);
  s.mean_b /= static_cast<double>(s.n);

  if (L && mu) {
    s.L = *L;
    s.mu = *mu;
  } else {
    // Per-node smoothness bounds the average as well.
    double lmax = 0.0;
    for (const auto& nd : s.nodes) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(nd.A, Eigen::EigenvaluesOnly);
      lmax = std::max(lmax, es.eigenvalues().maxCoeff());
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(s.mean_A, Eigen::EigenvaluesOnly);
    double lmin = es.eigenvalues().minCoeff();
    if (s.kind == SuiteKind::kNonconvexRegularized) {
      lmax += ProblemSuite::kRegCurvatureMax * s.reg;
      lmin += ProblemSuite::kRegCurvatureMin * s.reg;
    }
    s.L = lmax;
    s.mu = std::max(0.0, lmin);
  }

  if (s.kind == SuiteKind::kQuadratic) {
    auto [x, f] = solve_optimum(s);
    s.x_star = std::move(x);
    s.f_star = f;
  } else {
    ProblemSuite quad = s;
    quad.kind = SuiteKind::kQuadratic;
    quad.reg = 0.0;
    Vector start = Vector::Zero(s.d);
    try {
      start = solve_optimum(quad).first;
    } catch (const NoUniqueOptimum&) {
    }
    s.x_star = detail::find_stationary_point(s, start);
    s.f_star = s.value(s.x_star);
  }
  s.grad_star.clear();
  double z = 0.0;
  for (Index i = 0; i < s.n; ++i) {
    s.grad_star.push_back(s.node_gradient(i, s.x_star));
    z += s.grad_star.back().squaredNorm();
  }
  s.zeta_star_sq = z / static_cast<double>(s.n);
}

namespace detail {

// Random orthogonal matrix (QR of a Gaussian matrix, signs fixed by R).
inline Matrix random_orthogonal(Index d, RngStream& rng) {
  Matrix g(d, d);
  for (Index c = 0; c < d; ++c)
    for (Index r = 0; r < d; ++r) g(r, c) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix& r = qr.matrixQR();
  for (Index c = 0; c < d; ++c)
    if (r(c, c) < 0) q.col(c) = -q.col(c);
  return q;
}

// Spectrum with both endpoints attained and the interior uniform.
inline Vector spread_spectrum(Index d, double lo, double hi, RngStream& rng) {
  Vector lam(d);
  if (d == 1) {
    lam[0] = hi;
    return lam;
  }
  lam[0] = lo;
  lam[d - 1] = hi;
  for (Index j = 1; j + 1 < d; ++j) lam[j] = lo + (hi - lo) * rng.uniform();
  std::sort(lam.data(), lam.data() + d);
  return lam;
}

// n zero-sum offsets with (1/n) sum |o_i|^2 == target.
inline std::vector<Vector> zero_sum_offsets(Index d, Index n, double target, RngStream& rng) {
  std::vector<Vector> off(static_cast<std::size_t>(n), Vector::Zero(d));
  if (target == 0.0) return off;
  require(n >= 2, "suite: a single node cannot have positive dissimilarity");
  Vector mean = Vector::Zero(d);
  for (auto& o : off) {
    for (Index j = 0; j < d; ++j) o[j] = rng.normal();
    mean += o;
  }
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (auto& o : off) {
    o -= mean;
    ss += o.squaredNorm();
  }
  const double scale = std::sqrt(target * static_cast<double>(n) / ss);
  for (auto& o : off) o *= scale;
  return off;
}

}  // namespace detail

struct QuadraticSuiteParams {
  Index d = 8;
  Index n = 4;
  double mu = 1.0;
  double L = 10.0;
  double zeta_star_sq = 0.0;  // target for (1/n) sum |grad f_i(x_*)|^2
  double sigma = 0.0;
};

inline ProblemSuite gen_quadratic_suite(const QuadraticSuiteParams& p, RngStream seed) {
  detail::require(p.d >= 1 && p.n >= 1, "gen_quadratic_suite: need d >= 1 and n >= 1");
  detail::require(p.L > 0.0, "gen_quadratic_suite: L must be > 0");
  detail::require(p.mu >= 0.0 && p.mu <= p.L, "gen_quadratic_suite: need 0 <= mu <= L");
  detail::require(p.zeta_star_sq >= 0.0, "gen_quadratic_suite: zeta target must be >= 0");
  detail::require(p.sigma >= 0.0, "gen_quadratic_suite: sigma must be >= 0");
  detail::require(p.d > 1 || p.mu == p.L, "gen_quadratic_suite: d = 1 requires mu == L");
  RngStream& rng = seed;
  const Matrix q = detail::random_orthogonal(p.d, rng);
  const Vector lam = detail::spread_spectrum(p.d, p.mu, p.L, rng);
  const Matrix A = detail::symmetrize(q * lam.asDiagonal() * q.transpose());
  Vector center(p.d);
  for (Index j = 0; j < p.d; ++j) center[j] = rng.normal();
  const Vector b0 = A * center;
  const auto off = detail::zero_sum_offsets(p.d, p.n, p.zeta_star_sq, rng);
  std::vector<QuadraticNode> nodes;
  for (Index i = 0; i < p.n; ++i) nodes.push_back({A, b0 + off[static_cast<std::size_t>(i)]});

  ProblemSuite s;
  s.kind = SuiteKind::kQuadratic;
  s.d = p.d;
  s.n = p.n;
  s.nodes = std::move(nodes);
  s.sigma = p.sigma;
  finalize_suite(s, p.L, p.mu);
  return s;
}

struct NonconvexSuiteParams {
  Index d = 8;
  Index n = 4;
  double L = 10.0;
  double zeta_star_sq = 0.0;
  double sigma = 0.0;
  // Regularizer weight; negative selects the default L / 8.
  double reg = -1.0;
};

// Quadratic part with spectrum [0, L - 2c] plus the bounded regularizer, so
// every f_i stays L-smooth while f has directions of negative curvature.
inline ProblemSuite gen_nonconvex_suite(const NonconvexSuiteParams& p, RngStream seed) {
  detail::require(p.d >= 1 && p.n >= 1, "gen_nonconvex_suite: need d >= 1 and n >= 1");
  detail::require(p.L > 0.0, "gen_nonconvex_suite: L must be > 0");
  detail::require(p.zeta_star_sq >= 0.0, "gen_nonconvex_suite: zeta target must be >= 0");
  detail::require(p.sigma >= 0.0, "gen_nonconvex_suite: sigma must be >= 0");
  const double c = p.reg < 0.0 ? p.L / 8.0 : p.reg;
  detail::require(ProblemSuite::kRegCurvatureMax * c <= p.L,
                  "gen_nonconvex_suite: regularizer weight too large for L");
  RngStream& rng = seed;
  const Matrix q = detail::random_orthogonal(p.d, rng);
  const double top = p.L - ProblemSuite::kRegCurvatureMax * c;
  Vector lam = detail::spread_spectrum(p.d, 0.0, top, rng);
  if (p.d == 1) lam[0] = top;
  const Matrix A = detail::symmetrize(q * lam.asDiagonal() * q.transpose());
  Vector center(p.d);
  for (Index j = 0; j < p.d; ++j) center[j] = rng.normal();
  const Vector b0 = A * center;
  const auto off = detail::zero_sum_offsets(p.d, p.n, p.zeta_star_sq, rng);
  std::vector<QuadraticNode> nodes;
  for (Index i = 0; i < p.n; ++i) nodes.push_back({A, b0 + off[static_cast<std::size_t>(i)]});

  ProblemSuite s;
  s.kind = c == 0.0 ? SuiteKind::kQuadratic : SuiteKind::kNonconvexRegularized;
  s.d = p.d;
  s.n = p.n;
  s.nodes = std::move(nodes);
  s.sigma = p.sigma;
  s.reg = c;
  if (c == 0.0) {
    finalize_suite(s, top, 0.0);
  } else {
    finalize_suite(s, p.L, 0.0);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Oracles.
// ---------------------------------------------------------------------------
struct OracleResult {
  double value = 0.0;
  Vector gradient;
};

inline OracleResult oracle_exact(const ProblemSuite& s, Index i, const Vector& x) {
  detail::require(i >= 0 && i < s.n, "oracle: node index out of range");
  detail::require(x.size() == s.d, "oracle: dimension mismatch");
  return {s.node_value(i, x), s.node_gradient(i, x)};
}

// grad f_i(x) + xi with xi ~ N(0, (sigma^2 / d) I), so E|xi|^2 = sigma^2.
inline Vector oracle_stochastic(const ProblemSuite& s, Index i, const Vector& x, RngStream& rng) {
  detail::require(i >= 0 && i < s.n, "oracle: node index out of range");
  detail::require(x.size() == s.d, "oracle: dimension mismatch");
  Vector g = s.node_gradient(i, x);
  if (s.sigma == 0.0) return g;
  const double sd = s.sigma / std::sqrt(static_cast<double>(s.d));
  for (Index j = 0; j < s.d; ++j) g[j] += sd * rng.normal();
  return g;
}

// ---------------------------------------------------------------------------
// Dissimilarity certificate.
// ---------------------------------------------------------------------------
struct DissimilarityReport {
  double zeta_sq = 0.0;       // best-fit pair
  double Z_sq = 1.0;
  double zeta_sq_unit = 0.0;  // smallest zeta^2 with Z^2 fixed to 1
  double zeta_star_sq = 0.0;
  std::size_t sample_points = 0;
};

// Z^2 grid {1, 1.25, ..., 16}; for each the minimal feasible zeta^2, and the
// pair with the smallest zeta^2 (ties to smaller Z^2).
inline DissimilarityReport measure_dissimilarity(const ProblemSuite& s, const std::vector<Vector>& points) {
  detail::require(!points.empty(), "measure_dissimilarity: need at least one point");
  std::vector<std::pair<double, double>> rows;  // (mean node |grad|^2, |grad f|^2)
  rows.reserve(points.size());
  for (const auto& x : points) {
    detail::require(x.size() == s.d, "measure_dissimilarity: dimension mismatch");
    double lhs = 0.0;
    for (Index i = 0; i < s.n; ++i) lhs += s.node_gradient(i, x).squaredNorm();
    lhs /= static_cast<double>(s.n);
    rows.emplace_back(lhs, s.gradient(x).squaredNorm());
  }
  auto zeta_for = [&rows](double z2) {
    double z = 0.0;
    for (const auto& [lhs, g2] : rows) z = std::max(z, lhs - z2 * g2);
    return z;
  };
  DissimilarityReport rep;
  rep.sample_points = points.size();
  rep.zeta_star_sq = s.zeta_star_sq;
  rep.zeta_sq_unit = zeta_for(1.0);
  rep.zeta_sq = rep.zeta_sq_unit;
  rep.Z_sq = 1.0;
  for (int k = 1; k <= 60; ++k) {
    const double z2 = 1.0 + 0.25 * k;
    const double z = zeta_for(z2);
    if (z < rep.zeta_sq) {
      rep.zeta_sq = z;
      rep.Z_sq = z2;
    }
  }
  return rep;
}

}  // namespace csgd

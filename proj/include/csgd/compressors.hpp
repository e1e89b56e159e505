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

// Compression operators.
//
// Two families are modelled:
//   * delta-compressors, possibly biased, with E|C(x) - x|^2 <= (1 - delta)|x|^2
//   * omega-quantizers, unbiased, with E|Q(x)|^2 <= (1 + omega)|x|^2
//
// Every operator, for a fixed draw of its internal randomness, acts as a
// linear map restricted to a support (top-k after the support is chosen,
// rand-k, coordinate sketches) or as a dense projector (Gaussian sketches).
// `LinearMap` is that materialized instance; synchronized schemes draw one
// per round and apply it on every worker.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "csgd/rng.hpp"
#include "csgd/types.hpp"

namespace csgd {

enum class CompressorKind {
  kIdentity,
  kTopK,
  kRandKBiased,
  kRandKUnbiased,
  kSketch,
  kRescaledQuantizer,
};

enum class SketchFamily { kCoordinate, kGaussian };

// Which of (delta, omega) governs an operator.
enum class Governing { kDelta, kOmega, kBoth };

// Rank threshold used when validating sketch bases.
inline constexpr double kSketchRankThreshold = 1e-8;

// ---------------------------------------------------------------------------
// Linear map for one fixed draw of randomness.
// ---------------------------------------------------------------------------
class LinearMap {
 public:
  enum class Form { kIdentity, kCoordinates, kDense };

  static LinearMap identity(Index dim) {
    LinearMap m;
    m.form_ = Form::kIdentity;
    m.dim_ = dim;
    return m;
  }

  // Keeps `support` (any order; stored sorted) and multiplies it by `scale`.
  static LinearMap coordinates(Index dim, std::vector<Index> support, double scale = 1.0) {
    LinearMap m;
    m.form_ = Form::kCoordinates;
    m.dim_ = dim;
    std::sort(support.begin(), support.end());
    m.support_ = std::move(support);
    m.scale_ = scale;
    return m;
  }

  static LinearMap dense(Matrix projector, double scale = 1.0) {
    LinearMap m;
    m.form_ = Form::kDense;
    m.dim_ = projector.rows();
    m.dense_ = std::make_shared<const Matrix>(std::move(projector));
    m.scale_ = scale;
    return m;
  }

  // Post-multiplies the map by a scalar (used for rescaled quantizers).
  LinearMap then_scale(double factor) const {
    LinearMap m = *this;
    m.post_scale_ = post_scale_ * factor;
    m.has_post_scale_ = true;
    return m;
  }

  Vector apply(const Vector& x) const {
    detail::require(x.size() == dim_, "LinearMap: dimension mismatch");
    Vector out;
    switch (form_) {
      case Form::kIdentity:
        out = x;
        break;
      case Form::kCoordinates:
        out = Vector::Zero(dim_);
        if (scale_ == 1.0) {
          for (Index j : support_) out[j] = x[j];
        } else {
          for (Index j : support_) out[j] = x[j] * scale_;
        }
        break;
      case Form::kDense:
        out = (*dense_) * x;
        if (scale_ != 1.0) out *= scale_;
        break;
    }
    if (has_post_scale_) out *= post_scale_;
    return out;
  }

  Form form() const { return form_; }
  Index dim() const { return dim_; }
  const std::vector<Index>& support() const { return support_; }
  double scale() const { return scale_; }

  // Number of transmitted coordinates (dense maps count as full vectors).
  Index nnz() const {
    if (form_ == Form::kCoordinates) return static_cast<Index>(support_.size());
    return dim_;
  }

 private:
  Form form_ = Form::kIdentity;
  Index dim_ = 0;
  std::vector<Index> support_;
  double scale_ = 1.0;
  std::shared_ptr<const Matrix> dense_;
  double post_scale_ = 1.0;
  bool has_post_scale_ = false;
};

// ---------------------------------------------------------------------------
// Sketch basis: V in R^{d x p} of full column rank and its projector.
// ---------------------------------------------------------------------------
class SketchBasis {
 public:
  // Validates rank with a rank-revealing QR (threshold kSketchRankThreshold
  // relative to the largest pivot) and precomputes V (V^T V)^{-1} V^T.
  static SketchBasis from_matrix(Matrix v) {
    detail::require(v.rows() >= 1 && v.cols() >= 1, "SketchBasis: empty matrix");
    detail::require(v.cols() <= v.rows(), "SketchBasis: rank p must satisfy p <= d");
    Eigen::ColPivHouseholderQR<Matrix> qr(v);
    qr.setThreshold(kSketchRankThreshold);
    detail::require(qr.rank() == v.cols(), "SketchBasis: V is rank deficient");
    const Index d = v.rows();
    const Index p = v.cols();
    Matrix q = qr.householderQ() * Matrix::Identity(d, p);
    Matrix proj = q * q.transpose();
    proj = (0.5 * (proj + proj.transpose())).eval();
    SketchBasis b;
    b.v_ = std::move(v);
    b.projector_ = std::move(proj);
    return b;
  }

  // Span of the given standard unit vectors.
  static SketchBasis coordinates(Index dim, const std::vector<Index>& indices) {
    detail::require(!indices.empty(), "SketchBasis: need at least one coordinate");
    Matrix v = Matrix::Zero(dim, static_cast<Index>(indices.size()));
    for (std::size_t c = 0; c < indices.size(); ++c) {
      detail::require(indices[c] >= 0 && indices[c] < dim, "SketchBasis: index out of range");
      v(indices[c], static_cast<Index>(c)) = 1.0;
    }
    return from_matrix(std::move(v));
  }

  Index dim() const { return v_.rows(); }
  Index rank() const { return v_.cols(); }
  const Matrix& v() const { return v_; }
  const Matrix& projector() const { return projector_; }

 private:
  Matrix v_;
  Matrix projector_;
};

// ---------------------------------------------------------------------------
// Free-standing operators.
// ---------------------------------------------------------------------------

// Indices of the k largest |x_j|; ties go to the lower index.
inline std::vector<Index> top_k_support(const Vector& x, Index k) {
  const Index d = x.size();
  detail::require(k >= 1 && k <= d, "top_k: k must satisfy 1 <= k <= d");
  std::vector<Index> idx(static_cast<std::size_t>(d));
  std::iota(idx.begin(), idx.end(), Index{0});
  auto before = [&x](Index a, Index b) {
    const double ma = std::abs(x[a]);
    const double mb = std::abs(x[b]);
    if (ma != mb) return ma > mb;
    return a < b;
  };
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), before);
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

// Uniform k-subset of {0..d-1} via a partial Fisher-Yates shuffle.
inline std::vector<Index> random_subset(Index d, Index k, RngStream& rng) {
  detail::require(k >= 1 && k <= d, "rand_k: k must satisfy 1 <= k <= d");
  std::vector<Index> idx(static_cast<std::size_t>(d));
  std::iota(idx.begin(), idx.end(), Index{0});
  for (Index i = 0; i < k; ++i) {
    const auto j = i + static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(d - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

inline Vector top_k(const Vector& x, Index k) {
  return LinearMap::coordinates(x.size(), top_k_support(x, k)).apply(x);
}

inline Vector rand_k_biased(const Vector& x, Index k, RngStream& rng) {
  return LinearMap::coordinates(x.size(), random_subset(x.size(), k, rng)).apply(x);
}

inline Vector rand_k_unbiased(const Vector& x, Index k, RngStream& rng) {
  const double scale = static_cast<double>(x.size()) / static_cast<double>(k);
  return LinearMap::coordinates(x.size(), random_subset(x.size(), k, rng), scale).apply(x);
}

inline Vector sketch(const Vector& x, const SketchBasis& basis) {
  detail::require(x.size() == basis.dim(), "sketch: dimension mismatch");
  return basis.projector() * x;
}

// Orthogonal projector onto the span of a d x p standard Gaussian matrix.
inline Matrix gaussian_projector(Index d, Index p, RngStream& rng) {
  Matrix v(d, p);
  for (Index c = 0; c < p; ++c)
    for (Index r = 0; r < d; ++r) v(r, c) = rng.normal();
  return SketchBasis::from_matrix(std::move(v)).projector();
}

// ---------------------------------------------------------------------------
// CompressorOp: a tagged operator bound to a dimension.
// ---------------------------------------------------------------------------
class CompressorOp {
 public:
  static CompressorOp identity(Index dim) {
    detail::require(dim >= 1, "compressor: dimension must be >= 1");
    CompressorOp op;
    op.kind_ = CompressorKind::kIdentity;
    op.dim_ = dim;
    op.k_ = dim;
    op.delta_ = 1.0;
    op.omega_ = 0.0;
    return op;
  }

  static CompressorOp top_k(Index dim, Index k) {
    CompressorOp op = sparse(CompressorKind::kTopK, dim, k);
    op.delta_ = static_cast<double>(k) / static_cast<double>(dim);
    return op;
  }

  static CompressorOp rand_k_biased(Index dim, Index k) {
    CompressorOp op = sparse(CompressorKind::kRandKBiased, dim, k);
    op.delta_ = static_cast<double>(k) / static_cast<double>(dim);
    return op;
  }

  static CompressorOp rand_k_unbiased(Index dim, Index k) {
    CompressorOp op = sparse(CompressorKind::kRandKUnbiased, dim, k);
    op.omega_ = static_cast<double>(dim) / static_cast<double>(k) - 1.0;
    return op;
  }

  // Random p-dimensional subspace drawn per application.
  static CompressorOp random_sketch(Index dim, Index p, SketchFamily family) {
    CompressorOp op = sparse(CompressorKind::kSketch, dim, p);
    op.family_ = family;
    op.delta_ = static_cast<double>(p) / static_cast<double>(dim);
    return op;
  }

  // x -> Q(x) / (1 + omega), a delta = 1/(1 + omega) compressor.
  static CompressorOp rescale_to_compressor(const CompressorOp& q) {
    detail::require(q.is_quantizer(), "rescale_to_compressor: operand is not an omega-quantizer");
    CompressorOp op;
    op.kind_ = CompressorKind::kRescaledQuantizer;
    op.dim_ = q.dim_;
    op.k_ = q.k_;
    op.delta_ = 1.0 / (1.0 + *q.omega_);
    op.inner_ = std::make_shared<const CompressorOp>(q);
    return op;
  }

  // Parses "identity", "topk:K", "randk:K", "randk-unbiased:K",
  // "sketch:coord:P", "sketch:gauss:P" and "rescaled(<quantizer>)".
  static CompressorOp parse(std::string_view spec, Index dim);

  CompressorKind kind() const { return kind_; }
  Index dim() const { return dim_; }
  Index k() const { return k_; }
  SketchFamily sketch_family() const { return family_; }
  std::optional<double> delta() const { return delta_; }
  std::optional<double> omega() const { return omega_; }
  const CompressorOp* inner() const { return inner_.get(); }

  Governing governing() const {
    if (kind_ == CompressorKind::kIdentity) return Governing::kBoth;
    return omega_ ? Governing::kOmega : Governing::kDelta;
  }
  bool is_quantizer() const { return omega_.has_value(); }
  bool is_compressor() const { return delta_.has_value(); }

  // Linear for fixed internal randomness. True for every kind provided here
  // (top-k once its support is fixed).
  bool linear() const { return true; }

  // Materializes the operator for input `x` with randomness from `rng`.
  LinearMap draw(const Vector& x, RngStream& rng) const {
    detail::require(x.size() == dim_, "compressor: dimension mismatch");
    switch (kind_) {
      case CompressorKind::kIdentity:
        return LinearMap::identity(dim_);
      case CompressorKind::kTopK:
        return LinearMap::coordinates(dim_, top_k_support(x, k_));
      case CompressorKind::kRandKBiased:
        return LinearMap::coordinates(dim_, random_subset(dim_, k_, rng));
      case CompressorKind::kRandKUnbiased:
        return LinearMap::coordinates(dim_, random_subset(dim_, k_, rng),
                                      static_cast<double>(dim_) / static_cast<double>(k_));
      case CompressorKind::kSketch:
        if (family_ == SketchFamily::kCoordinate)
          return LinearMap::coordinates(dim_, random_subset(dim_, k_, rng));
        return LinearMap::dense(gaussian_projector(dim_, k_, rng));
      case CompressorKind::kRescaledQuantizer:
        return inner_->draw(x, rng).then_scale(1.0 / (1.0 + *inner_->omega_));
    }
    throw ParameterError("compressor: unknown kind");
  }

  Vector apply(const Vector& x, RngStream& rng) const { return draw(x, rng).apply(x); }
  Vector operator()(const Vector& x, RngStream& rng) const { return apply(x, rng); }

  std::string to_string() const {
    switch (kind_) {
      case CompressorKind::kIdentity:
        return "identity";
      case CompressorKind::kTopK:
        return "topk:" + std::to_string(k_);
      case CompressorKind::kRandKBiased:
        return "randk:" + std::to_string(k_);
      case CompressorKind::kRandKUnbiased:
        return "randk-unbiased:" + std::to_string(k_);
      case CompressorKind::kSketch:
        return std::string("sketch:") + (family_ == SketchFamily::kCoordinate ? "coord:" : "gauss:") +
               std::to_string(k_);
      case CompressorKind::kRescaledQuantizer:
        return "rescaled(" + inner_->to_string() + ")";
    }
    return "?";
  }

 private:
  static CompressorOp sparse(CompressorKind kind, Index dim, Index k) {
    detail::require(dim >= 1, "compressor: dimension must be >= 1");
    detail::require(k >= 1 && k <= dim, "compressor: k must satisfy 1 <= k <= d");
    CompressorOp op;
    op.kind_ = kind;
    op.dim_ = dim;
    op.k_ = k;
    return op;
  }

  CompressorKind kind_ = CompressorKind::kIdentity;
  Index dim_ = 0;
  Index k_ = 0;
  SketchFamily family_ = SketchFamily::kCoordinate;
  std::optional<double> delta_;
  std::optional<double> omega_;
  std::shared_ptr<const CompressorOp> inner_;
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline Index parse_count(std::string_view text, std::string_view spec) {
  const std::string t = trim(text);
  if (t.empty() || !std::all_of(t.begin(), t.end(), [](unsigned char c) { return std::isdigit(c); }))
    throw ParameterError("compressor spec '" + std::string(spec) + "': expected a positive integer, got '" +
                         t + "'");
  return static_cast<Index>(std::stoll(t));
}

}  // namespace detail

inline CompressorOp CompressorOp::parse(std::string_view raw, Index dim) {
  const std::string spec = detail::trim(raw);
  const std::string_view s = spec;
  if (s == "identity" || s == "none") return identity(dim);
  if (s.rfind("rescaled(", 0) == 0) {
    if (s.back() != ')') throw ParameterError("compressor spec '" + spec + "': missing ')'");
    return rescale_to_compressor(parse(s.substr(9, s.size() - 10), dim));
  }
  const auto colon = s.find(':');
  if (colon == std::string_view::npos)
    throw ParameterError("compressor spec '" + spec + "': unknown operator");
  const std::string_view head = s.substr(0, colon);
  const std::string_view rest = s.substr(colon + 1);
  if (head == "topk") return top_k(dim, detail::parse_count(rest, s));
  if (head == "randk" || head == "randk-biased") return rand_k_biased(dim, detail::parse_count(rest, s));
  if (head == "randk-unbiased") return rand_k_unbiased(dim, detail::parse_count(rest, s));
  if (head == "sketch") {
    const auto c2 = rest.find(':');
    if (c2 == std::string_view::npos)
      throw ParameterError("compressor spec '" + spec + "': expected sketch:<coord|gauss>:<p>");
    const std::string_view fam = rest.substr(0, c2);
    const Index p = detail::parse_count(rest.substr(c2 + 1), s);
    if (fam == "coord") return random_sketch(dim, p, SketchFamily::kCoordinate);
    if (fam == "gauss") return random_sketch(dim, p, SketchFamily::kGaussian);
    throw ParameterError("compressor spec '" + spec + "': unknown sketch family");
  }
  throw ParameterError("compressor spec '" + spec + "': unknown operator");
}

inline CompressorOp rescale_to_compressor(const CompressorOp& q) {
  return CompressorOp::rescale_to_compressor(q);
}

// ---------------------------------------------------------------------------
// Monte Carlo moment oracle.
// ---------------------------------------------------------------------------
struct MomentEstimate {
  std::size_t samples = 0;
  Vector mean;         // sample mean of op(x)
  Vector mean_stderr;  // componentwise standard error of `mean`
  double bias_norm = 0.0;
  // Ratios are undefined for x = 0 and left empty.
  std::optional<double> second_moment_ratio;
  std::optional<double> second_moment_stderr;
  std::optional<double> contraction_ratio;
  std::optional<double> contraction_stderr;
};

// `op` is any callable (const Vector&, RngStream&) -> Vector. Sample s uses
// rng.substream(s), so estimates are reproducible and order independent.
template <class Op>
MomentEstimate estimate_moments(Op&& op, const Vector& x, std::size_t samples, const RngStream& rng) {
  detail::require(samples >= 1, "estimate_moments: samples must be >= 1");
  const Index d = x.size();
  const double xx = x.squaredNorm();
  Vector mean = Vector::Zero(d);
  Vector m2 = Vector::Zero(d);
  double sm_mean = 0.0, sm_m2 = 0.0;
  double ct_mean = 0.0, ct_m2 = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    RngStream r = rng.substream(s);
    const Vector y = op(x, r);
    const double n = static_cast<double>(s + 1);
    const Vector dy = y - mean;
    mean += dy / n;
    m2 += dy.cwiseProduct(y - mean);
    if (xx > 0.0) {
      const double a = y.squaredNorm() / xx;
      const double da = a - sm_mean;
      sm_mean += da / n;
      sm_m2 += da * (a - sm_mean);
      const double c = (y - x).squaredNorm() / xx;
      const double dc = c - ct_mean;
      ct_mean += dc / n;
      ct_m2 += dc * (c - ct_mean);
    }
  }
  const double n = static_cast<double>(samples);
  const double denom = samples > 1 ? n - 1.0 : 1.0;
  MomentEstimate est;
  est.samples = samples;
  est.mean = mean;
  est.mean_stderr = (m2 / denom / n).cwiseSqrt();
  est.bias_norm = (mean - x).norm();
  if (xx > 0.0) {
    est.second_moment_ratio = sm_mean;
    est.second_moment_stderr = std::sqrt(sm_m2 / denom / n);
    est.contraction_ratio = ct_mean;
    est.contraction_stderr = std::sqrt(ct_m2 / denom / n);
  }
  return est;
}

inline MomentEstimate estimate_moments(const CompressorOp& op, const Vector& x, std::size_t samples,
                                       const RngStream& rng) {
  return estimate_moments([&op](const Vector& v, RngStream& r) { return op.apply(v, r); }, x, samples,
                          rng);
}

}  // namespace csgd

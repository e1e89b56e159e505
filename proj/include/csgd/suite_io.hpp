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

// Plain-text suite files. Layout:
//
//   csgd-suite 1
//   kind quadratic|nonconvex
//   dims <n> <d>
//   smoothness <L>
//   strong_convexity <mu>
//   sigma <sigma>
//   reg <c>
//   node <i>
//   A <d> <d>
//   <d rows of d values, row-major>
//   b <d>
//   <d values>
//   ... (one node block per node)
//   end
//
// All reals are written with 17 significant digits so reading a file back
// reproduces every bit.

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "csgd/problems.hpp"

namespace csgd {

namespace detail {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class SuiteReader {
 public:
  explicit SuiteReader(std::istream& in) : in_(in) {}

  void expect(const std::string& word) {
    const std::string got = token();
    if (got != word) fail("expected '" + word + "', got '" + got + "'");
  }

  std::string token() {
    std::string t;
    if (!(in_ >> t)) fail("unexpected end of file");
    return t;
  }

  double real() {
    const std::string t = token();
    try {
      std::size_t pos = 0;
      const double v = std::stod(t, &pos);
      if (pos != t.size()) fail("malformed number '" + t + "'");
      return v;
    } catch (const std::logic_error&) {
      fail("malformed number '" + t + "'");
    }
    return 0.0;
  }

  Index count() {
    const double v = real();
    if (v < 0 || v != static_cast<double>(static_cast<Index>(v))) fail("expected a count");
    return static_cast<Index>(v);
  }

  [[noreturn]] void fail(const std::string& what) {
    throw ParameterError("suite file: " + what);
  }

 private:
  std::istream& in_;
};

}  // namespace detail

inline void write_suite(std::ostream& out, const ProblemSuite& s) {
  using detail::fmt17;
  out << "csgd-suite 1\n";
  out << "kind " << to_string(s.kind) << "\n";
  out << "dims " << s.n << " " << s.d << "\n";
  out << "smoothness " << fmt17(s.L) << "\n";
  out << "strong_convexity " << fmt17(s.mu) << "\n";
  out << "sigma " << fmt17(s.sigma) << "\n";
  out << "reg " << fmt17(s.reg) << "\n";
  for (Index i = 0; i < s.n; ++i) {
    const auto& nd = s.nodes[static_cast<std::size_t>(i)];
    out << "node " << i << "\n";
    out << "A " << s.d << " " << s.d << "\n";
    for (Index r = 0; r < s.d; ++r) {
      for (Index c = 0; c < s.d; ++c) out << (c ? " " : "") << fmt17(nd.A(r, c));
      out << "\n";
    }
    out << "b " << s.d << "\n";
    for (Index c = 0; c < s.d; ++c) out << (c ? " " : "") << fmt17(nd.b[c]);
    out << "\n";
  }
  out << "end\n";
}

// Reads a suite and recomputes the derived fields. The declared L and mu
// must agree with an eigensolve of the stored matrices to 1e-8 relative.
inline ProblemSuite read_suite(std::istream& in) {
  detail::SuiteReader rd(in);
  rd.expect("csgd-suite");
  if (rd.count() != 1) rd.fail("unsupported version");
  rd.expect("kind");
  const std::string kind = rd.token();
  SuiteKind k;
  if (kind == "quadratic") {
    k = SuiteKind::kQuadratic;
  } else if (kind == "nonconvex") {
    k = SuiteKind::kNonconvexRegularized;
  } else {
    rd.fail("unknown kind '" + kind + "'");
  }
  rd.expect("dims");
  const Index n = rd.count();
  const Index d = rd.count();
  if (n < 1 || d < 1) rd.fail("dims must be positive");
  rd.expect("smoothness");
  const double L = rd.real();
  rd.expect("strong_convexity");
  const double mu = rd.real();
  rd.expect("sigma");
  const double sigma = rd.real();
  rd.expect("reg");
  const double reg = rd.real();
  std::vector<QuadraticNode> nodes;
  for (Index i = 0; i < n; ++i) {
    rd.expect("node");
    if (rd.count() != i) rd.fail("node blocks out of order");
    rd.expect("A");
    if (rd.count() != d || rd.count() != d) rd.fail("matrix shape does not match dims");
    QuadraticNode nd{Matrix(d, d), Vector(d)};
    for (Index r = 0; r < d; ++r)
      for (Index c = 0; c < d; ++c) nd.A(r, c) = rd.real();
    rd.expect("b");
    if (rd.count() != d) rd.fail("vector length does not match dims");
    for (Index c = 0; c < d; ++c) nd.b[c] = rd.real();
    nodes.push_back(std::move(nd));
  }
  rd.expect("end");

  ProblemSuite check = make_suite(k, nodes, sigma, reg);
  auto close = [](double a, double b) { return std::abs(a - b) <= 1e-8 * std::max(1.0, std::abs(b)); };
  if (!close(L, check.L)) rd.fail("declared smoothness disagrees with the stored matrices");
  if (k == SuiteKind::kQuadratic && !close(mu, check.mu))
    rd.fail("declared strong convexity disagrees with the stored matrices");

  ProblemSuite s;
  s.kind = k;
  s.d = d;
  s.n = n;
  s.nodes = std::move(nodes);
  s.sigma = sigma;
  s.reg = reg;
  finalize_suite(s, L, mu);
  return s;
}

inline void save_suite(const std::string& path, const ProblemSuite& s) {
  std::ofstream out(path);
  if (!out) throw ParameterError("cannot open '" + path + "' for writing");
  write_suite(out, s);
}

inline ProblemSuite load_suite(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open suite file '" + path + "'");
  return read_suite(in);
}

}  // namespace csgd

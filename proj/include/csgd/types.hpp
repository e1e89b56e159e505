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

#include <Eigen/Dense>

#include <cstddef>
#include <cstring>
#include <stdexcept>
#include <string>

namespace csgd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Base class for every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside an operation's documented domain.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Algorithm/experiment configuration inconsistent with the chosen scheme.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A runtime-checked identity or bound did not hold.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

class NoUniqueOptimum : public Error {
 public:
  using Error::Error;
};

class NotInLinearRegime : public Error {
 public:
  using Error::Error;
};

// The requested theorem mapping does not exist for this algorithm/class.
class Unavailable : public Error {
 public:
  using Error::Error;
};

namespace detail {

template <class E = ParameterError>
inline void require(bool ok, const std::string& what) {
  if (!ok) throw E(what);
}

}  // namespace detail

// Bitwise comparison of two vectors (sizes and every coefficient identical,
// including the sign of zero).
inline bool bitwise_equal(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) return false;
  for (Index j = 0; j < a.size(); ++j) {
    const double x = a[j];
    const double y = b[j];
    if (std::memcmp(&x, &y, sizeof(double)) != 0) return false;
  }
  return true;
}

}  // namespace csgd

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

#include <cmath>
#include <cstdint>
#include <limits>

namespace csgd {

// Independent randomness channels consumed within one (worker, round) cell.
enum class Channel : std::uint64_t {
  kNoise = 1,
  kQuantizer = 2,
  kCompressor = 3,
  kGeneration = 4,
  kOutput = 5,
  kMonteCarlo = 6,
  kInit = 7,
};

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// SplitMix64 finalizer.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Counter-based random stream. The output sequence is a pure function of
// (master_seed, worker, round, channel), so any cell can be regenerated
// without replaying the others.
class RngStream {
 public:
  // Worker index used by the synchronized mode: every worker derives the
  // same stream from the round index alone.
  static constexpr std::uint64_t kShared = std::numeric_limits<std::uint64_t>::max();

  RngStream() : RngStream(0, 0, 0, Channel::kGeneration) {}

  RngStream(std::uint64_t master_seed, std::uint64_t worker, std::uint64_t round,
            Channel channel)
      : master_seed_(master_seed), worker_(worker), round_(round), channel_(channel) {
    using detail::mix64;
    std::uint64_t k = mix64(master_seed ^ 0x6A09E667F3BCC909ULL);
    k = mix64(k + (worker + 1) * detail::kGolden);
    k = mix64(k ^ ((round + 1) * 0xD1B54A32D192ED03ULL));
    k = mix64(k + static_cast<std::uint64_t>(channel) * 0x8CB92BA72F3D8DD7ULL);
    key_ = k;
  }

  static RngStream per_worker(std::uint64_t seed, std::uint64_t worker, std::uint64_t round,
                              Channel channel) {
    return RngStream(seed, worker, round, channel);
  }

  static RngStream synchronized(std::uint64_t seed, std::uint64_t round, Channel channel) {
    return RngStream(seed, kShared, round, channel);
  }

  // A child stream; used to give each Monte Carlo sample its own stream.
  RngStream substream(std::uint64_t index) const {
    RngStream s = *this;
    s.key_ = detail::mix64(key_ ^ detail::mix64(index + 0x243F6A8885A308D3ULL));
    s.counter_ = 0;
    s.has_spare_ = false;
    return s;
  }

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t worker() const { return worker_; }
  std::uint64_t round() const { return round_; }
  Channel channel() const { return channel_; }
  bool is_synchronized() const { return worker_ == kShared; }

  std::uint64_t next_u64() {
    ++counter_;
    return detail::mix64(key_ + counter_ * detail::kGolden);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound); unbiased (Lemire's multiply-and-reject).
  std::uint64_t uniform_index(std::uint64_t bound) {
    if (bound <= 1) return 0;
    __uint128_t m = static_cast<__uint128_t>(next_u64()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<__uint128_t>(next_u64()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Standard normal via the polar Box-Muller method (portable, unlike
  // std::normal_distribution).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

 private:
  std::uint64_t master_seed_ = 0;
  std::uint64_t worker_ = 0;
  std::uint64_t round_ = 0;
  Channel channel_ = Channel::kGeneration;
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace csgd

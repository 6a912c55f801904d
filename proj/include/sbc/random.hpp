// Copyright 2026 The SBC Authors
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

#ifndef SBC_RANDOM_HPP
#define SBC_RANDOM_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

/**
 * \file
 * \brief Counter-based random streams.
 *
 * Every stream is addressed by (master seed, replication index, purpose tag).
 * The seed is the Philox key; the replication index and tag occupy the two
 * high words of the 128-bit counter, so distinct streams never share a block
 * and the draws for one replication do not depend on which thread runs it or
 * in what order.
 */

namespace sbc {

/// Purpose of a stream within one replication.
enum class StreamTag : std::uint32_t {
  kPrior = 1,
  kData = 2,
  kChain = 3,
  kVi = 4,
  kChainRerun = 5,
};

/// The Philox4x32-10 block function.
inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u;
  constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

/// A single-owner random stream. Satisfies UniformRandomBitGenerator.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t master_seed, std::uint32_t replication, StreamTag tag)
      : key_{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32)},
        replication_{replication},
        tag_{tag} {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (buffered_ == 0) {
      const std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(block_),
                                             static_cast<std::uint32_t>(block_ >> 32), replication_,
                                             static_cast<std::uint32_t>(tag_)};
      block_out_ = philox4x32_10(ctr, key_);
      ++block_;
      buffered_ = 2;
    }
    const std::size_t offset = buffered_ == 2 ? 0 : 2;
    --buffered_;
    return (std::uint64_t{block_out_[offset + 1]} << 32) | block_out_[offset];
  }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

  /// Standard normal by Box-Muller; the second variate of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// Identifier recorded as provenance: replication in the high half, tag in the low.
  [[nodiscard]] std::uint64_t stream_id() const {
    return (std::uint64_t{replication_} << 32) | static_cast<std::uint32_t>(tag_);
  }

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint32_t replication_;
  StreamTag tag_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> block_out_{};
  int buffered_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace sbc

#endif

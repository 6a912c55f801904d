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

#include <sbc/random.hpp>

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

namespace {

using sbc::RandomStream;
using sbc::StreamTag;

// Known-answer vectors published with the Random123 reference implementation.
TEST(Philox, KnownAnswerZero) {
  const auto out = sbc::philox4x32_10({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out, (std::array<std::uint32_t, 4>{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
}

TEST(Philox, KnownAnswerAllOnes) {
  const auto out = sbc::philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff});
  EXPECT_EQ(out, (std::array<std::uint32_t, 4>{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
}

TEST(Philox, KnownAnswerPiDigits) {
  const auto out = sbc::philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0});
  EXPECT_EQ(out, (std::array<std::uint32_t, 4>{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(RandomStream, SameAddressSameSequence) {
  RandomStream a{42, 7, StreamTag::kData};
  RandomStream b{42, 7, StreamTag::kData};
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
}

TEST(RandomStream, DistinctAddressesDiffer) {
  std::set<std::uint64_t> firsts;
  for (std::uint64_t seed : {1ull, 2ull, (1ull << 32) + 1}) {
    for (std::uint32_t rep : {0u, 1u, 4096u}) {
      for (auto tag : {StreamTag::kPrior, StreamTag::kData, StreamTag::kChain, StreamTag::kVi, StreamTag::kChainRerun}) {
        RandomStream s{seed, rep, tag};
        firsts.insert(s());
      }
    }
  }
  EXPECT_EQ(firsts.size(), 3u * 3u * 5u);
}

TEST(RandomStream, FirstWordsComeFromFirstPhiloxBlock) {
  RandomStream s{0x0000000500000003ull, 9, StreamTag::kChain};
  const auto block = sbc::philox4x32_10({0, 0, 9, 3}, {3, 5});
  EXPECT_EQ(s(), (std::uint64_t{block[1]} << 32) | block[0]);
  EXPECT_EQ(s(), (std::uint64_t{block[3]} << 32) | block[2]);
  const auto next = sbc::philox4x32_10({1, 0, 9, 3}, {3, 5});
  EXPECT_EQ(s(), (std::uint64_t{next[1]} << 32) | next[0]);
}

TEST(RandomStream, StreamIdEncodesReplicationAndTag) {
  RandomStream s{1, 12, StreamTag::kVi};
  EXPECT_EQ(s.stream_id(), (std::uint64_t{12} << 32) | 4u);
}

TEST(RandomStream, UniformIsOpenUnitIntervalWithCorrectMean) {
  RandomStream s{2018, 0, StreamTag::kPrior};
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  // Five standard errors of a uniform mean.
  EXPECT_NEAR(sum / n, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(RandomStream, NormalMomentsAndTail) {
  RandomStream s{99, 3, StreamTag::kData};
  const int n = 100000;
  double sum = 0.0;
  double sum2 = 0.0;
  int below = 0;
  for (int i = 0; i < n; ++i) {
    const double z = s.normal();
    sum += z;
    sum2 += z * z;
    below += z < 1.959963984540054 ? 1 : 0;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(sum2 / n - mean * mean, 1.0, 5.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(static_cast<double>(below) / n, 0.975, 5.0 * std::sqrt(0.975 * 0.025 / n));
}

TEST(RandomStream, ScaledNormal) {
  RandomStream a{5, 0, StreamTag::kPrior};
  RandomStream b{5, 0, StreamTag::kPrior};
  for (int i = 0; i < 10; ++i) EXPECT_DOUBLE_EQ(a.normal(3.0, 2.0), 3.0 + 2.0 * b.normal());
}

}  // namespace

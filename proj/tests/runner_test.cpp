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

#include <sbc/runner.hpp>

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <set>
#include <vector>

namespace {

using sbc::ErrorCode;
using sbc::RunConfig;

template <typename F>
void expect_error(ErrorCode code, F&& f) {
  try {
    f();
    FAIL() << "expected " << sbc::to_string(code);
  } catch (const sbc::Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

RunConfig exact_config(std::int64_t N) {
  RunConfig c;
  c.N = N;
  c.L = 99;
  c.master_seed = 314;
  return c;
}

TEST(Validate, RejectsInconsistentConfigs) {
  auto c = exact_config(10);
  c.model = sbc::LinRegSpec{};
  expect_error(ErrorCode::kConfigError, [&] { sbc::validate(c); });

  c = exact_config(10);
  c.thinning = sbc::Thinning::kAlgorithm2;
  expect_error(ErrorCode::kConfigError, [&] { sbc::validate(c); });

  c = exact_config(0);
  expect_error(ErrorCode::kConfigError, [&] { sbc::validate(c); });

  c = exact_config(10);
  c.corruption = {sbc::CorruptionKind::kShift, 1.0, "sigma"};
  expect_error(ErrorCode::kConfigError, [&] { sbc::validate(c); });

  c = exact_config(10);
  c.sampler.kind = sbc::SamplerKind::kHmc;
  c.thinning = sbc::Thinning::kAlgorithm2;
  c.initial_chain_length = 50;
  expect_error(ErrorCode::kConfigError, [&] { sbc::validate(c); });

  c = exact_config(10);
  c.model = sbc::NormalNormalSpec{0.0, -1.0, 1.0, 1};
  expect_error(ErrorCode::kInvalidSpec, [&] { sbc::validate(c); });
}

TEST(RunSbc, OneRecordPerQuantityAndReplication) {
  const auto a = sbc::run_sbc(exact_config(1));
  ASSERT_EQ(a.records.size(), 1u);
  EXPECT_EQ(a.quantities, (std::vector<std::string>{"mu"}));
  EXPECT_EQ(a.records[0].L, 99);
  EXPECT_FALSE(a.records[0].ess);
  EXPECT_EQ(a.diagnostics.size(), 1u);
  EXPECT_FALSE(a.started_at.empty());
}

TEST(RunSbc, RanksInRangeAndOrdered) {
  auto c = exact_config(200);
  c.model = sbc::NormalNormalSpec{1.0, 2.0, 0.5, 3};
  const auto a = sbc::run_sbc(c);
  ASSERT_EQ(a.records.size(), 200u);
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].replication_index, static_cast<std::int64_t>(i));
    EXPECT_GE(a.records[i].rank, 0);
    EXPECT_LE(a.records[i].rank, 99);
  }
  EXPECT_EQ(a.ranks("mu").size(), 200u);
  expect_error(ErrorCode::kUnknownQuantity, [&] { (void)a.ranks("beta"); });
}

TEST(RunSbc, WorkerCountDoesNotChangeResults) {
  auto c = exact_config(64);
  c.model = sbc::EightSchoolsSpec{};
  c.sampler.kind = sbc::SamplerKind::kHmc;
  c.sampler.warmup = 50;
  c.L = 15;
  const auto one = sbc::run_sbc(c);
  c.worker_count_hint = 8;
  const auto eight = sbc::run_sbc(c);
  EXPECT_EQ(one.records, eight.records);
  EXPECT_EQ(one.diagnostics, eight.diagnostics);
}

// Replication i only reads streams addressed by i, so prefixes of longer runs agree.
TEST(RunSbc, ReplicationsAreIndependentOfN) {
  auto c = exact_config(10);
  const auto small = sbc::run_sbc(c);
  c.N = 25;
  const auto large = sbc::run_sbc(c);
  for (std::size_t i = 0; i < small.records.size(); ++i) EXPECT_EQ(small.records[i], large.records[i]);
}

TEST(RunSbc, SeedChangesRanks) {
  auto c = exact_config(50);
  const auto a = sbc::run_sbc(c);
  c.master_seed = 315;
  EXPECT_NE(a.ranks("mu"), sbc::run_sbc(c).ranks("mu"));
}

TEST(RunSbc, EntryPointsCheckThinningMode) {
  auto c = exact_config(5);
  expect_error(ErrorCode::kConfigError, [&] { (void)sbc::run_sbc_mcmc(c); });
  c.sampler.kind = sbc::SamplerKind::kRwMetropolis;
  c.thinning = sbc::Thinning::kAlgorithm2;
  expect_error(ErrorCode::kConfigError, [&] { (void)sbc::run_sbc(c); });
}

TEST(RunSbcMcmc, RecordsEssAndChainLengths) {
  auto c = exact_config(6);
  c.sampler.kind = sbc::SamplerKind::kRwMetropolis;
  c.sampler.step_size = 0.05;
  c.sampler.warmup = 0;
  c.thinning = sbc::Thinning::kAlgorithm2;
  const auto a = sbc::execute(c);
  ASSERT_EQ(a.diagnostics.size(), 6u);
  for (const auto& d : a.diagnostics) {
    ASSERT_TRUE(d.n_eff);
    EXPECT_GE(d.raw_chain_length, 990);
    EXPECT_EQ(d.rerun, d.raw_chain_length > 990);
    EXPECT_EQ(d.still_short, *d.n_eff < 99.0);
  }
  for (const auto& r : a.records) EXPECT_TRUE(r.ess);
}

TEST(RunSbcMcmc, CapLimitsRerunLength) {
  auto c = exact_config(3);
  c.sampler.kind = sbc::SamplerKind::kRwMetropolis;
  c.sampler.step_size = 0.001;
  c.sampler.warmup = 0;
  c.thinning = sbc::Thinning::kAlgorithm2;
  c.max_chain_length = 2000;
  const auto a = sbc::execute(c);
  for (const auto& d : a.diagnostics) {
    EXPECT_TRUE(d.cap_hit);
    EXPECT_EQ(d.raw_chain_length, 2000);
    EXPECT_TRUE(d.still_short);
  }
}

// An absurd VI learning rate overflows the noise scale and every fit diverges.
TEST(Failures, AbortWhenTooManyReplicationsFail) {
  RunConfig c;
  c.model = sbc::LinRegSpec{};
  c.sampler.kind = sbc::SamplerKind::kMeanfieldVi;
  c.sampler.vi_learning_rate = 1e6;
  c.sampler.vi_iterations = 50;
  c.N = 20;
  c.L = 9;
  expect_error(ErrorCode::kFailureRateExceeded, [&] { (void)sbc::run_sbc(c); });

  c.max_failure_fraction = 1.0;
  const auto a = sbc::run_sbc(c);
  EXPECT_EQ(a.failures.size() + a.diagnostics.size(), 20u);
  EXPECT_GT(a.failures.size(), 0u);
  for (const auto& f : a.failures) EXPECT_NE(f.reason.find("Diverged"), std::string::npos);
}

TEST(MakeModel, DispatchesOnSpec) {
  EXPECT_EQ(sbc::make_model(sbc::NormalNormalSpec{})->name(), "normal-normal");
  EXPECT_EQ(sbc::make_model(sbc::LinRegSpec{})->name(), "linear-regression");
  EXPECT_EQ(sbc::make_model(sbc::EightSchoolsSpec{})->name(), "eight-schools");
}

}  // namespace

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

#include <sbc/ess.hpp>

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numeric>
#include <vector>

namespace {

using sbc::ErrorCode;
using sbc::testing::ar1;

template <typename F>
void expect_error(ErrorCode code, F&& f) {
  try {
    f();
    FAIL() << "expected " << sbc::to_string(code);
  } catch (const sbc::Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

// Direct O(n * lags) autocorrelation with the overall-variance normalization.
std::vector<double> direct_autocorrelation(const std::vector<double>& x, std::size_t max_lag) {
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  std::vector<double> out(max_lag + 1);
  double c0 = 0.0;
  for (double v : x) c0 += (v - m) * (v - m);
  for (std::size_t lag = 0; lag <= max_lag; ++lag) {
    double c = 0.0;
    for (std::size_t t = 0; t + lag < x.size(); ++t) c += (x[t] - m) * (x[t + lag] - m);
    out[lag] = c / c0;
  }
  return out;
}

sbc::PosteriorDraws draws_from_columns(const std::vector<std::vector<double>>& columns) {
  sbc::PosteriorDraws d;
  sbc::Names names;
  for (std::size_t c = 0; c < columns.size(); ++c) names.push_back("q" + std::to_string(c));
  d.names = std::make_shared<const sbc::Names>(names);
  for (std::size_t i = 0; i < columns[0].size(); ++i) {
    for (const auto& col : columns) d.values.push_back(col[i]);
  }
  d.chain_length_raw = columns[0].size();
  return d;
}

std::vector<sbc::Quantity> coordinates(std::size_t n) {
  std::vector<sbc::Quantity> q;
  for (std::size_t c = 0; c < n; ++c) q.push_back(sbc::Quantity::coordinate("q" + std::to_string(c), c));
  return q;
}

TEST(Autocorrelation, FftMatchesDirectComputation) {
  for (std::size_t n : {4u, 5u, 17u, 100u, 1000u, 4097u}) {
    const auto x = ar1(0.7, n, n);
    const std::size_t lags = std::min<std::size_t>(n - 1, 50);
    const auto fast = sbc::autocorrelation(x, lags);
    const auto slow = direct_autocorrelation(x, lags);
    ASSERT_EQ(fast.size(), lags + 1);
    for (std::size_t k = 0; k <= lags; ++k) EXPECT_NEAR(fast[k], slow[k], 1e-10) << "n " << n << " lag " << k;
  }
}

TEST(Autocorrelation, IidSeriesIsNearlyUncorrelated) {
  const auto x = ar1(0.0, 100000, 1);
  EXPECT_LT(std::abs(sbc::autocorrelation(x, 1)[1]), 0.02);
}

TEST(Autocorrelation, AlternatingSeriesIsAntiCorrelated) {
  std::vector<double> x(1000);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = i % 2 == 0 ? 1.0 : -1.0;
  EXPECT_NEAR(sbc::autocorrelation(x, 1)[1], -1.0, 2.0 / 1000.0);
}

TEST(Autocorrelation, Ar1LagOne) {
  EXPECT_NEAR(sbc::autocorrelation(ar1(0.9, 100000, 2), 1)[1], 0.9, 0.02);
}

TEST(Autocorrelation, Errors) {
  expect_error(ErrorCode::kTooShort, [] { (void)sbc::autocorrelation(std::vector<double>{1, 2, 3}, 1); });
  expect_error(ErrorCode::kZeroVariance, [] { (void)sbc::autocorrelation(std::vector<double>(10, 0.1), 1); });
}

TEST(EffectiveSampleSize, IidSeries) {
  const auto est = sbc::effective_sample_size(ar1(0.0, 100000, 3));
  EXPECT_NEAR(est.n_eff, 100000.0, 10000.0);
  EXPECT_EQ(est.n_samples, 100000);
  EXPECT_EQ(est.rho.front(), 1.0);
}

// For AR(1) the sum 1 + 2 sum_{m>=1} phi^m equals (1 + phi) / (1 - phi).
TEST(EffectiveSampleSize, Ar1GeometricSeries) {
  const double n = 100000.0;
  EXPECT_NEAR(sbc::effective_sample_size(ar1(0.5, 100000, 4)).n_eff, n / 3.0, 0.15 * n / 3.0);
  EXPECT_NEAR(sbc::effective_sample_size(ar1(0.9, 100000, 5)).n_eff, n / 19.0, 0.20 * n / 19.0);
}

TEST(EffectiveSampleSize, AffineInvariant) {
  const auto x = ar1(0.8, 5000, 6);
  std::vector<double> y;
  for (double v : x) y.push_back(-3.5 * v + 1e3);
  EXPECT_NEAR(sbc::effective_sample_size(x).n_eff, sbc::effective_sample_size(y).n_eff,
              1e-8 * sbc::effective_sample_size(x).n_eff);
}

TEST(EffectiveSampleSize, AntitheticChainIsCappedAtTwiceItsLength) {
  std::vector<double> x(1000);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = i % 2 == 0 ? 1.0 : -1.0;
  EXPECT_LE(sbc::effective_sample_size(x).n_eff, 2.0 * 1000.0 + 1e-9);
}

TEST(RequiredChainLength, Cases) {
  const auto grow = sbc::required_chain_length(1000, 100, 50.0);
  EXPECT_EQ(grow.length, 2000);
  EXPECT_TRUE(grow.rerun);
  EXPECT_FALSE(grow.cap_hit);
  const auto keep = sbc::required_chain_length(1000, 100, 200.0);
  EXPECT_EQ(keep.length, 1000);
  EXPECT_FALSE(keep.rerun);
  const auto capped = sbc::required_chain_length(1000, 100, 0.5, 100000);
  EXPECT_EQ(capped.length, 100000);
  EXPECT_TRUE(capped.cap_hit);
}

TEST(ThinTo, StrideAndIdentity) {
  std::vector<double> x(1000);
  std::iota(x.begin(), x.end(), 0.0);
  const auto thin = sbc::thin_to(draws_from_columns({x}), 100);
  ASSERT_EQ(thin.size(), 100u);
  EXPECT_TRUE(thin.thinned);
  EXPECT_EQ(thin.chain_length_raw, 1000u);
  for (std::size_t i = 0; i < 100; ++i) EXPECT_EQ(thin.values[i], 10.0 * static_cast<double>(i));

  std::vector<double> y(100);
  std::iota(y.begin(), y.end(), 0.0);
  EXPECT_EQ(sbc::thin_to(draws_from_columns({y}), 100).values, y);

  std::vector<double> z(105);
  std::iota(z.begin(), z.end(), 0.0);
  const auto odd = sbc::thin_to(draws_from_columns({z}), 100).values;
  for (std::size_t i = 1; i < odd.size(); ++i) EXPECT_GT(odd[i], odd[i - 1]);

  expect_error(ErrorCode::kTooShort, [&] { (void)sbc::thin_to(draws_from_columns({y}), 101); });
}

TEST(MinEss, SingleQuantityMatchesDirectEstimate) {
  const auto x = ar1(0.6, 20000, 7);
  const auto q = coordinates(1);
  EXPECT_DOUBLE_EQ(sbc::min_ess_across_quantities(draws_from_columns({x}), q),
                   sbc::effective_sample_size(x).n_eff);
}

TEST(MinEss, TakesTheSlowestQuantity) {
  const auto fast = ar1(0.0, 100000, 8);
  const auto slow = ar1(0.9, 100000, 9);
  const auto q = coordinates(2);
  const double m = sbc::min_ess_across_quantities(draws_from_columns({fast, slow}), q);
  EXPECT_DOUBLE_EQ(m, sbc::effective_sample_size(slow).n_eff);
  EXPECT_NEAR(m, 100000.0 / 19.0, 0.2 * 100000.0 / 19.0);
}

TEST(MinEss, SkipsConstantQuantities) {
  const auto x = ar1(0.3, 5000, 10);
  const std::vector<double> flat(5000, 2.0);
  const auto q = coordinates(2);
  EXPECT_DOUBLE_EQ(sbc::min_ess_across_quantities(draws_from_columns({flat, x}), q),
                   sbc::effective_sample_size(x).n_eff);
  expect_error(ErrorCode::kAllConstant,
               [&] { (void)sbc::min_ess_across_quantities(draws_from_columns({flat, flat}), q); });
}

}  // namespace

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

#ifndef SBC_RANK_STATS_HPP
#define SBC_RANK_STATS_HPP

#include <sbc/detail/math.hpp>
#include <sbc/error.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

/**
 * \file
 * \brief Rank statistics and the uniformity diagnostics built on them.
 *
 * Under exact inference the rank of the prior draw among L posterior draws is
 * uniform on {0, ..., L}. Everything here tests or visualizes that property.
 */

namespace sbc {

/// One replication's rank for one quantity.
struct RankRecord {
  std::int64_t replication_index = 0;
  std::string quantity;
  std::int64_t rank = 0;
  std::int64_t L = 0;
  std::optional<double> ess;
  std::int64_t raw_chain_length = 0;

  friend bool operator==(const RankRecord&, const RankRecord&) = default;
};

/// Binned rank counts with the binomial band for one displayed bin.
struct SbcHistogram {
  std::vector<std::int64_t> counts;
  std::int64_t N = 0;
  std::int64_t L = 0;
  std::int64_t band_low = 0;
  std::int64_t band_high = 0;
  double band_coverage = 0.99;

  [[nodiscard]] std::int64_t bins() const { return static_cast<std::int64_t>(counts.size()); }
  [[nodiscard]] std::int64_t ranks_per_bin() const { return (L + 1) / bins(); }
  /// Ranks [first, last] collected by bin b.
  [[nodiscard]] std::pair<std::int64_t, std::int64_t> bin_to_ranks(std::int64_t b) const {
    return {b * ranks_per_bin(), (b + 1) * ranks_per_bin() - 1};
  }
};

struct EcdfSummary {
  std::vector<double> values;
  std::vector<double> expected;
  std::vector<double> envelope_low;
  std::vector<double> envelope_high;
};

/// Number of posterior values strictly below the prior value.
inline std::int64_t rank_statistic(std::span<const double> posterior_values, double prior_value) {
  if (posterior_values.empty()) fail(ErrorCode::kNonFiniteInput, "rank needs at least one posterior value");
  if (!std::isfinite(prior_value) || !detail::all_finite(posterior_values)) {
    fail(ErrorCode::kNonFiniteInput, "rank inputs must be finite");
  }
  std::int64_t rank = 0;
  for (double v : posterior_values) rank += v < prior_value ? 1 : 0;
  return rank;
}

/// The classic empirical posterior quantile, rank / L. Takes one of L+1 evenly spaced values.
inline double empirical_quantile(std::int64_t rank, std::int64_t L) {
  return static_cast<double>(rank) / static_cast<double>(L);
}

/// Exact binomial quantiles of Binomial(N, 1/B) at (1-coverage)/2 and 1-(1-coverage)/2.
inline std::pair<std::int64_t, std::int64_t> uniform_band(std::int64_t N, std::int64_t B, double coverage = 0.99) {
  if (N < 1 || B < 1 || !(coverage > 0.0 && coverage < 1.0)) {
    fail(ErrorCode::kInvalidSpec, "uniform band needs N >= 1, B >= 1, 0 < coverage < 1");
  }
  const double p = 1.0 / static_cast<double>(B);
  const double tail = 0.5 * (1.0 - coverage);
  return {detail::binomial_quantile(N, p, tail), detail::binomial_quantile(N, p, 1.0 - tail)};
}

/// Groups consecutive ranks into B equal-width bins and attaches the band.
inline SbcHistogram rebin(std::span<const std::int64_t> ranks, std::int64_t L, std::int64_t B,
                          double coverage = 0.99) {
  if (L < 1 || B < 1 || (L + 1) % B != 0) {
    fail(ErrorCode::kIndivisibleBinning,
         std::to_string(B) + " bins do not divide " + std::to_string(L + 1) +
             " rank values; choose L so that L+1 is divisible by a large power of 2");
  }
  SbcHistogram h;
  h.counts.assign(static_cast<std::size_t>(B), 0);
  h.L = L;
  h.N = static_cast<std::int64_t>(ranks.size());
  h.band_coverage = coverage;
  const std::int64_t width = (L + 1) / B;
  for (auto r : ranks) {
    if (r < 0 || r > L) fail(ErrorCode::kNonFiniteInput, "rank " + std::to_string(r) + " outside [0, L]");
    ++h.counts[static_cast<std::size_t>(r / width)];
  }
  if (h.N > 0) std::tie(h.band_low, h.band_high) = uniform_band(h.N, B, coverage);
  return h;
}

/// Largest divisor B of L+1 with N/B >= 20, or 1 when even one bin is too fine.
inline std::int64_t default_bins(std::int64_t N, std::int64_t L) {
  for (std::int64_t B = L + 1; B >= 1; --B) {
    if ((L + 1) % B == 0 && N >= 20 * B) return B;
  }
  return 1;
}

inline EcdfSummary ecdf_summary(std::span<const std::int64_t> ranks, std::int64_t L, double coverage = 0.99) {
  const auto N = static_cast<std::int64_t>(ranks.size());
  if (N < 1 || L < 1) fail(ErrorCode::kInvalidSpec, "ECDF needs at least one rank and L >= 1");
  std::vector<std::int64_t> counts(static_cast<std::size_t>(L + 1), 0);
  for (auto r : ranks) {
    if (r < 0 || r > L) fail(ErrorCode::kNonFiniteInput, "rank outside [0, L]");
    ++counts[static_cast<std::size_t>(r)];
  }
  EcdfSummary s;
  const double tail = 0.5 * (1.0 - coverage);
  const auto Nd = static_cast<double>(N);
  std::int64_t cumulative = 0;
  for (std::int64_t k = 0; k <= L; ++k) {
    cumulative += counts[static_cast<std::size_t>(k)];
    const double p = static_cast<double>(k + 1) / static_cast<double>(L + 1);
    s.values.push_back(static_cast<double>(cumulative) / Nd);
    s.expected.push_back(p);
    s.envelope_low.push_back(static_cast<double>(detail::binomial_quantile(N, p, tail)) / Nd);
    s.envelope_high.push_back(static_cast<double>(detail::binomial_quantile(N, p, 1.0 - tail)) / Nd);
  }
  return s;
}

/// The summary with the expected uniform CDF subtracted from curve and envelope alike.
inline EcdfSummary ecdf_diff_summary(const EcdfSummary& s) {
  EcdfSummary d = s;
  for (std::size_t k = 0; k < s.values.size(); ++k) {
    d.values[k] -= s.expected[k];
    d.envelope_low[k] -= s.expected[k];
    d.envelope_high[k] -= s.expected[k];
    d.expected[k] = 0.0;
  }
  return d;
}

inline std::vector<double> ecdf_diff(const EcdfSummary& s) { return ecdf_diff_summary(s).values; }

struct ChiSquare {
  double statistic;
  std::int64_t dof;
};

/// Pearson statistic against equal expected counts. A coarse summary, weak against structured deviations.
inline ChiSquare chi_square_uniformity(std::span<const std::int64_t> counts) {
  std::int64_t total = 0;
  for (auto c : counts) total += c;
  if (total < 1) fail(ErrorCode::kInvalidSpec, "chi-square needs at least one count");
  const double expected = static_cast<double>(total) / static_cast<double>(counts.size());
  double stat = 0.0;
  for (auto c : counts) {
    const double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  return {stat, static_cast<std::int64_t>(counts.size()) - 1};
}

/// Failure classes read off a rank histogram.
enum class Shape { kUniform, kUShaped, kCapShaped, kBiasedLowRanks, kBiasedHighRanks, kBoundarySpikes };

constexpr std::string_view to_string(Shape s) {
  switch (s) {
    case Shape::kUniform: return "uniform";
    case Shape::kUShaped: return "u-shaped";
    case Shape::kCapShaped: return "cap-shaped";
    case Shape::kBiasedLowRanks: return "biased-low-ranks";
    case Shape::kBiasedHighRanks: return "biased-high-ranks";
    case Shape::kBoundarySpikes: return "boundary-spikes";
  }
  return "unknown";
}

/// Mean of rank / L, using bin midpoints.
inline double mean_normalized_rank(const SbcHistogram& h) {
  double total = 0.0;
  for (std::int64_t b = 0; b < h.bins(); ++b) {
    const auto [lo, hi] = h.bin_to_ranks(b);
    total += static_cast<double>(h.counts[static_cast<std::size_t>(b)]) * 0.5 * static_cast<double>(lo + hi);
  }
  return total / static_cast<double>(h.N) / static_cast<double>(h.L);
}

/**
 * Heuristic shape label, checked in this order:
 *
 * - boundary-spikes: both extreme bins above band_high, no interior bin above
 *   band_high, and the two bins next to the extremes hold less than their
 *   uniform expectation (the excess is confined to the edges, not a slope).
 * - u-shaped: the two extreme bins hold more than 1.5x their uniform
 *   expectation and the central half holds less than its expectation.
 * - cap-shaped: the two extreme bins hold less than 1/1.5 of their
 *   expectation and the central half holds more than its expectation.
 * - biased-{low,high}-ranks: |mean normalized rank - 0.5| > 3 / sqrt(12 N).
 * - uniform otherwise.
 */
inline Shape classify_shape(const SbcHistogram& h) {
  const std::int64_t B = h.bins();
  if (h.N < 1 || B < 2) return Shape::kUniform;
  const auto Nd = static_cast<double>(h.N);
  const double per_bin = Nd / static_cast<double>(B);
  const auto count = [&](std::int64_t b) { return static_cast<double>(h.counts[static_cast<std::size_t>(b)]); };

  const double outer = count(0) + count(B - 1);
  const double outer_expected = 2.0 * per_bin;

  if (B >= 4 && count(0) > static_cast<double>(h.band_high) && count(B - 1) > static_cast<double>(h.band_high)) {
    bool interior_inside = true;
    for (std::int64_t b = 1; b + 1 < B; ++b) interior_inside = interior_inside && count(b) <= h.band_high;
    const double shoulders = count(1) + count(B - 2);
    if (interior_inside && shoulders < 2.0 * per_bin) return Shape::kBoundarySpikes;
  }

  double central = 0.0;
  const std::int64_t central_begin = B / 4;
  const std::int64_t central_end = B - B / 4;
  for (std::int64_t b = central_begin; b < central_end; ++b) central += count(b);
  const double central_expected = static_cast<double>(central_end - central_begin) * per_bin;

  if (outer > 1.5 * outer_expected && central < central_expected) return Shape::kUShaped;
  if (outer < outer_expected / 1.5 && central > central_expected) return Shape::kCapShaped;

  const double displacement = mean_normalized_rank(h) - 0.5;
  if (std::abs(displacement) > 3.0 / std::sqrt(12.0 * Nd)) {
    return displacement > 0 ? Shape::kBiasedHighRanks : Shape::kBiasedLowRanks;
  }
  return Shape::kUniform;
}

/// Number of bins whose count falls outside [band_low, band_high].
inline std::int64_t bins_outside_band(const SbcHistogram& h) {
  std::int64_t n = 0;
  for (auto c : h.counts) n += (c < h.band_low || c > h.band_high) ? 1 : 0;
  return n;
}

/// Equal-width histogram of empirical quantiles on [0, 1]; q = 1 lands in the last bin.
inline std::vector<std::int64_t> quantile_histogram(std::span<const double> quantiles, std::int64_t B) {
  std::vector<std::int64_t> counts(static_cast<std::size_t>(B), 0);
  for (double q : quantiles) {
    auto b = static_cast<std::int64_t>(std::floor(q * static_cast<double>(B)));
    ++counts[static_cast<std::size_t>(std::clamp<std::int64_t>(b, 0, B - 1))];
  }
  return counts;
}

}  // namespace sbc

#endif

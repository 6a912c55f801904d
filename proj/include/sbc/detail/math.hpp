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

#ifndef SBC_DETAIL_MATH_HPP
#define SBC_DETAIL_MATH_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace sbc::detail {

inline constexpr double kHalfLogTwoPi = 0.91893853320467274178;

inline double normal_lpdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -kHalfLogTwoPi - std::log(sd) - 0.5 * z * z;
}

/// Density of |N(0, scale^2)| on x > 0.
inline double half_normal_lpdf(double x, double scale) {
  return std::numbers::ln2 + normal_lpdf(x, 0.0, scale);
}

inline double binomial_log_pmf(std::int64_t k, std::int64_t n, double p) {
  if (p <= 0.0) return k == 0 ? 0.0 : -INFINITY;
  if (p >= 1.0) return k == n ? 0.0 : -INFINITY;
  const auto kd = static_cast<double>(k);
  const auto nd = static_cast<double>(n);
  return std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0) + kd * std::log(p) +
         (nd - kd) * std::log1p(-p);
}

/// Smallest k with P[X <= k] >= q for X ~ Binomial(n, p), by summing the exact pmf.
inline std::int64_t binomial_quantile(std::int64_t n, double p, double q) {
  double cdf = 0.0;
  for (std::int64_t k = 0; k < n; ++k) {
    cdf += std::exp(binomial_log_pmf(k, n, p));
    // The slack absorbs rounding in the running sum when q sits exactly on a CDF step.
    if (cdf >= q * (1.0 - 1e-12)) return k;
  }
  return n;
}

inline double mean(std::span<const double> xs) {
  double total = 0.0;
  for (double x : xs) total += x;
  return total / static_cast<double>(xs.size());
}

inline bool all_finite(std::span<const double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace sbc::detail

#endif

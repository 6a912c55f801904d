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

#ifndef SBC_ESS_HPP
#define SBC_ESS_HPP

#include <sbc/error.hpp>
#include <sbc/model.hpp>

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

/**
 * \file
 * \brief Autocorrelation, effective sample size and chain thinning.
 */

namespace sbc {

inline constexpr std::int64_t kDefaultMaxChainLength = 100000;

struct EssEstimate {
  double n_eff = 0.0;
  /// rho_0 .. rho_{truncation_lag}.
  std::vector<double> rho;
  std::int64_t truncation_lag = 0;
  std::int64_t n_samples = 0;
};

namespace detail {

/// FFTW planning is not thread-safe; execution on distinct plans is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

/// Autocovariance sum_t (x_t - mean)(x_{t+m} - mean) for m = 0..n-1, via a zero-padded FFT.
inline std::vector<double> autocovariance_sums(std::span<const double> series) {
  const std::size_t n = series.size();
  const std::size_t size = next_pow2(2 * n);
  const double center = mean(series);

  struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
  };
  std::unique_ptr<double, FftwFree> real{fftw_alloc_real(size)};
  std::unique_ptr<fftw_complex, FftwFree> spectrum{fftw_alloc_complex(size / 2 + 1)};
  fftw_plan forward;
  fftw_plan backward;
  {
    std::lock_guard lock{fftw_planner_mutex()};
    forward = fftw_plan_dft_r2c_1d(static_cast<int>(size), real.get(), spectrum.get(), FFTW_ESTIMATE);
    backward = fftw_plan_dft_c2r_1d(static_cast<int>(size), spectrum.get(), real.get(), FFTW_ESTIMATE);
  }
  for (std::size_t i = 0; i < size; ++i) real.get()[i] = i < n ? series[i] - center : 0.0;
  fftw_execute(forward);
  for (std::size_t k = 0; k < size / 2 + 1; ++k) {
    auto& c = spectrum.get()[k];
    c[0] = c[0] * c[0] + c[1] * c[1];
    c[1] = 0.0;
  }
  fftw_execute(backward);
  std::vector<double> sums(n);
  for (std::size_t m = 0; m < n; ++m) sums[m] = real.get()[m] / static_cast<double>(size);
  {
    std::lock_guard lock{fftw_planner_mutex()};
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }
  return sums;
}

inline std::vector<double> normalized_autocorrelation(std::span<const double> series) {
  if (series.size() < 4) fail(ErrorCode::kTooShort, "autocorrelation needs at least 4 values");
  const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
  if (*lo == *hi) fail(ErrorCode::kZeroVariance, "series has zero sample variance");
  auto rho = autocovariance_sums(series);
  const double norm = rho[0];
  for (auto& r : rho) r /= norm;
  rho[0] = 1.0;
  return rho;
}

}  // namespace detail

/// rho_0 .. rho_max_lag, each lag normalized by the overall sample variance.
inline std::vector<double> autocorrelation(std::span<const double> series, std::size_t max_lag) {
  auto rho = detail::normalized_autocorrelation(series);
  rho.resize(std::min(max_lag + 1, rho.size()));
  return rho;
}

/**
 * N_samp / (1 + 2 sum_{m>=1} rho_m), with the sum truncated at the first lag
 * pair (rho_{2t} + rho_{2t+1}) that is not positive. The denominator is
 * floored at 1/2 so antithetic chains report at most twice their length.
 */
inline EssEstimate effective_sample_size(std::span<const double> series) {
  const auto rho = detail::normalized_autocorrelation(series);
  const std::size_t n = series.size();
  double pair_sum = 0.0;
  std::size_t last = 1;
  for (std::size_t t = 0; 2 * t + 1 < n; ++t) {
    const double pair = rho[2 * t] + rho[2 * t + 1];
    if (!(pair > 0.0)) break;
    pair_sum += pair;
    last = 2 * t + 1;
  }
  const double tau = std::max(-1.0 + 2.0 * pair_sum, 0.5);
  EssEstimate est;
  est.n_samples = static_cast<std::int64_t>(n);
  est.truncation_lag = static_cast<std::int64_t>(last);
  est.rho.assign(rho.begin(), rho.begin() + static_cast<std::ptrdiff_t>(last + 1));
  est.n_eff = static_cast<double>(n) / tau;
  return est;
}

struct ChainLengthPlan {
  std::int64_t length = 0;
  bool rerun = false;
  bool cap_hit = false;
};

/// Chain length needed for L effective draws, given n_eff at the current length.
inline ChainLengthPlan required_chain_length(std::int64_t current_length, std::int64_t L, double n_eff,
                                             std::int64_t max_chain_length = kDefaultMaxChainLength) {
  if (n_eff >= static_cast<double>(L)) return {current_length, false, false};
  const double wanted = std::ceil(static_cast<double>(current_length) * static_cast<double>(L) / n_eff);
  if (wanted > static_cast<double>(max_chain_length)) return {max_chain_length, true, true};
  return {static_cast<std::int64_t>(wanted), true, false};
}

/// Keeps indices floor(i * length / L), i = 0..L-1.
inline PosteriorDraws thin_to(const PosteriorDraws& draws, std::size_t L) {
  const std::size_t length = draws.size();
  if (L < 1 || length < L) {
    fail(ErrorCode::kTooShort, "cannot thin " + std::to_string(length) + " draws to " + std::to_string(L));
  }
  PosteriorDraws out = draws;
  const std::size_t dim = draws.dimension();
  out.values.resize(L * dim);
  for (std::size_t i = 0; i < L; ++i) {
    const std::size_t src = i * length / L;
    std::copy_n(draws.values.begin() + static_cast<std::ptrdiff_t>(src * dim), dim,
                out.values.begin() + static_cast<std::ptrdiff_t>(i * dim));
  }
  out.thinned = true;
  return out;
}

/// Smallest n_eff over the quantities; constant quantities are skipped.
inline double min_ess_across_quantities(const PosteriorDraws& draws, std::span<const Quantity> quantities) {
  if (quantities.empty()) fail(ErrorCode::kInvalidSpec, "need at least one quantity");
  double smallest = std::numeric_limits<double>::infinity();
  bool any_varying = false;
  for (const auto& q : quantities) {
    const auto series = draws.evaluate(q);
    try {
      smallest = std::min(smallest, effective_sample_size(series).n_eff);
      any_varying = true;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kZeroVariance) throw;
    }
  }
  if (!any_varying) fail(ErrorCode::kAllConstant, "every quantity is constant across the chain");
  return smallest;
}

}  // namespace sbc

#endif
